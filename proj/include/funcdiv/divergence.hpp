#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "generator.hpp"
#include "transforms.hpp"

namespace funcdiv {

/// Outcome of a divergence-type integral. `infinite` marks a value that grew
/// without bound under refinement (reported as +-inf, never a garbage float).
struct DivResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
    bool infinite = false;
    std::string note;
};

namespace detail {

inline bool constant_generator(const Generator& g) {
    return g.family == GenFamily::Power && g.lambda == 0.0;
}

inline DivResult from_quad(const quad::IntegralResult& r) {
    DivResult out;
    out.value = r.value;
    out.error = r.error_estimate;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
    if (!std::isfinite(r.value)) {
        out.infinite = true;
        out.converged = false;
        out.note = "integrand unbounded at a quadrature node";
    } else if (!r.converged && r.sup_seen > 1e12) {
        out.infinite = true;
        out.value = r.value > 0 ? kInf : -kInf;
        out.note = "integrand grows without bound under refinement";
    }
    return out;
}

/// A box stands in for the full support only while the integrand has decayed
/// by its edges. When boundary samples rival the integral itself, the
/// untruncated integral diverges and the box value is an artifact.
template <typename F>
inline void flag_boundary_growth(const F& f, const quad::Domain& dom, DivResult& out) {
    if (dom.kind != quad::Domain::Kind::Box || out.infinite || !std::isfinite(out.value))
        return;
    const int n = dom.dim;
    double measure = 1.0;
    for (int a = 0; a < n; ++a) measure *= dom.hi(a) - dom.lo(a);
    double worst = 0.0;
    Vec x(n);
    for (int corner = 0; corner < (1 << n); ++corner) {
        for (int a = 0; a < n; ++a) x(a) = (corner >> a) & 1 ? dom.hi(a) : dom.lo(a);
        const double v = f(x);
        if (std::abs(v) > std::abs(worst)) worst = v;
    }
    const Vec mid = 0.5 * (dom.lo + dom.hi);
    for (int a = 0; a < n; ++a) {
        for (double side : {dom.lo(a), dom.hi(a)}) {
            x = mid;
            x(a) = side;
            const double v = f(x);
            if (std::abs(v) > std::abs(worst)) worst = v;
        }
    }
    if (std::abs(worst) * measure > 1e-3 * std::abs(out.value) &&
        std::abs(worst) * measure > 10.0 * out.error) {
        out.infinite = true;
        out.converged = false;
        out.value = worst > 0 ? kInf : -kInf;
        out.note = "integrand does not decay by the truncation boundary";
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// densities and ratios

/// log of the density ratio: 2 psi - <grad psi, x> + log det Hess psi.
inline double log_density_ratio(const ScalarField& psi, const Vec& x) {
    // convexity keeps the true determinant nonnegative; differencing noise
    // can cross zero, which reads as a vanishing ratio
    const double det = psi.hess(x).determinant();
    return 2.0 * psi(x) - psi.grad(x).dot(x) -
           (det > 0.0 ? -std::log(det) : kInf);
}

/// P- and Q-densities of a pair, with their integration domain.
struct DensityPair {
    std::function<double(const Vec&)> p;
    std::function<double(const Vec&)> q;
    quad::Domain domain;
};

/// Q = exp(-psi), P = exp(psi - <grad psi, x>) det Hess psi = Q * ratio.
inline DensityPair density_pair(const LogConcaveFn& fn) {
    const ScalarField psi = fn.effective_potential();
    DensityPair pair;
    pair.q = [psi](const Vec& x) { return std::exp(-psi(x)); };
    pair.p = [psi](const Vec& x) {
        return std::exp(psi(x) - psi.grad(x).dot(x)) * psi.hess(x).determinant();
    };
    pair.domain = integration_domain(fn);
    return pair;
}

/// D_f(P,Q) = int f(p/q) q, with q = 0 contributing p * f*(0) (0*inf = 0).
inline DivResult df_pair(const Generator& g, const DensityPair& pair,
                         quad::QuadOptions qopt = {}) {
    auto integrand = [&](const Vec& x) {
        const double qv = pair.q(x);
        const double pv = pair.p(x);
        if (qv > 0.0) return mul0inf(qv, eval_extended(g, pv / qv));
        return mul0inf(pv, g.fstar_at_zero);
    };
    return detail::from_quad(quad::integrate(integrand, pair.domain, qopt));
}

// ---------------------------------------------------------------------------
// log-concave divergences

/// D_f of a log-concave function: int exp(-psi) f(ratio) dx over the support.
inline DivResult df_log_concave(const Generator& g, const LogConcaveFn& fn,
                                quad::QuadOptions qopt = {},
                                const quad::Domain* domain = nullptr) {
    const ScalarField psi = fn.effective_potential();
    const bool constant_f = detail::constant_generator(g);
    auto integrand = [psi, g, constant_f](const Vec& x) {
        const double p = psi(x);
        const double qv = std::exp(-p);
        if (qv == 0.0 || constant_f) return qv;
        const double lr =
            2.0 * p - psi.grad(x).dot(x) + std::log(psi.hess(x).determinant());
        return mul0inf(qv, eval_extended(g, std::exp(lr)));
    };
    const quad::Domain dom = domain ? *domain : integration_domain(fn);
    DivResult out = detail::from_quad(quad::integrate(integrand, dom, qopt));
    detail::flag_boundary_growth(integrand, dom, out);
    return out;
}

inline DivResult integral_of(const LogConcaveFn& fn, quad::QuadOptions qopt = {},
                             const quad::Domain* domain = nullptr) {
    const quad::Domain dom = domain ? *domain : integration_domain(fn);
    return detail::from_quad(
        quad::integrate([&fn](const Vec& x) { return fn.phi(x); }, dom, qopt));
}

inline DivResult kl_divergence(const LogConcaveFn& fn, quad::QuadOptions qopt = {}) {
    return df_log_concave(make_tlogt(), fn, qopt);
}

/// int Q log(P/Q): the log-generator divergence driving Omega and the
/// integral-ratio bound. Equals -D_f for f = -log t.
inline DivResult log_divergence(const LogConcaveFn& fn, quad::QuadOptions qopt = {}) {
    DivResult r = df_log_concave(make_neglog(), fn, qopt);
    r.value = -r.value;
    return r;
}

/// Ent(phi) = int phi log phi.
inline DivResult entropy(const LogConcaveFn& fn, quad::QuadOptions qopt = {}) {
    const ScalarField psi = fn.effective_potential();
    auto integrand = [psi](const Vec& x) {
        const double p = psi(x);
        return -p * std::exp(-p);
    };
    return detail::from_quad(
        quad::integrate(integrand, integration_domain(fn), qopt));
}

inline DivResult affine_surface_area(const LogConcaveFn& fn, double lambda,
                                     quad::QuadOptions qopt = {}) {
    if (lambda == 0.0) return integral_of(fn, qopt);
    return df_log_concave(make_power(lambda), fn, qopt);
}

/// sup (sign > 0) of the density ratio over the truncated support, or the
/// independently optimized min of the reciprocal ratio (sign < 0). The two
/// runs work on the ratio and its reciprocal as separate objectives, so their
/// product being 1 is a real consistency statement, not bookkeeping.
inline double as_extreme(const LogConcaveFn& fn, int sign) {
    const ScalarField psi = fn.effective_potential();
    auto obj = [&, sign](const Vec& x) {
        const double lr = log_density_ratio(psi, x);
        return sign > 0 ? std::exp(lr) : -std::exp(-lr);
    };
    const quad::Domain box = truncation_box(psi, fn.dim());
    const int n = fn.dim();

    Vec best = Vec::Zero(n);
    double bval = obj(best);
    const int per_axis = 41;
    Vec x(n);
    const long total = static_cast<long>(std::pow(per_axis, n));
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int a = 0; a < n; ++a) {
            const int i = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            x(a) = box.lo(a) + (box.hi(a) - box.lo(a)) * i / (per_axis - 1.0);
        }
        const double v = obj(x);
        if (v > bval) {
            bval = v;
            best = x;
        }
    }
    // coordinate-wise golden refinement
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int round = 0; round < 10; ++round) {
        for (int a = 0; a < n; ++a) {
            double lo = std::max(box.lo(a), best(a) - (box.hi(a) - box.lo(a)) / per_axis);
            double hi = std::min(box.hi(a), best(a) + (box.hi(a) - box.lo(a)) / per_axis);
            auto g1 = [&](double t) {
                Vec z = best;
                z(a) = t;
                return obj(z);
            };
            double a1 = hi - gr * (hi - lo), a2 = lo + gr * (hi - lo);
            double f1 = g1(a1), f2 = g1(a2);
            for (int it = 0; it < 50; ++it) {
                if (f1 < f2) {
                    lo = a1;
                    a1 = a2;
                    f1 = f2;
                    a2 = lo + gr * (hi - lo);
                    f2 = g1(a2);
                } else {
                    hi = a2;
                    a2 = a1;
                    f2 = f1;
                    a1 = hi - gr * (hi - lo);
                    f1 = g1(a1);
                }
            }
            best(a) = f1 > f2 ? a1 : a2;
            bval = std::max(f1, f2);
        }
    }
    return sign > 0 ? bval : -bval;
}

inline double omega_ladder(const LogConcaveFn& fn, double lambda,
                           quad::QuadOptions qopt = {}) {
    const double as = affine_surface_area(fn, lambda, qopt).value;
    const double mass = integral_of(fn, qopt).value;
    return std::pow(as / mass, 1.0 / lambda);
}

/// Omega = exp([int Q log(P/Q)] / int phi): the lambda -> 0 limit of the
/// normalized surface-area ladder.
inline double omega(const LogConcaveFn& fn, quad::QuadOptions qopt = {}) {
    return std::exp(log_divergence(fn, qopt).value / integral_of(fn, qopt).value);
}

// ---------------------------------------------------------------------------
// s-concave divergences

/// D_f at concavity s: int f(rho_s) w^(1/s-1) e dx with w = 1 - s psi and
/// e = 1 + s(<grad psi, x> - psi). Bounded supports are integrated on
/// (1-delta)-shrunken copies, delta in {1e-2, 1e-3, 1e-4}, and the boundary
/// tail is removed by fitting I(delta) = I - A sqrt(delta) - B delta, which
/// covers both smooth tails and the half-power edge singularities these
/// integrands develop. A shrink sequence that fails to contract flags the
/// integral as divergent.
inline DivResult df_s_concave(const Generator& g, const SConcaveFn& fn,
                              quad::QuadOptions qopt = {}, bool shrink = true) {
    const double s = fn.s;
    const int n = fn.dim();
    const ScalarField psi = fn.psi;
    const bool constant_f = detail::constant_generator(g);
    auto integrand = [psi, g, s, n, constant_f](const Vec& x) {
        const double p = psi(x);
        const double w = 1.0 - s * p;
        if (w <= 0.0) return 0.0;
        const double e = 1.0 + s * (psi.grad(x).dot(x) - p);
        const double qdens = std::pow(w, 1.0 / s - 1.0) * e;
        if (constant_f) return qdens;
        const double rho = psi.hess(x).determinant() /
                           (std::pow(w, 1.0 / s - 1.0) *
                            std::pow(e, n + 1.0 / s + 1.0));
        return mul0inf(qdens, eval_extended(g, rho));
    };

    const quad::Domain base = integration_domain(fn);
    if (!fn.support.bounded() || !shrink)
        return detail::from_quad(quad::integrate(integrand, base, qopt));

    const double deltas[4] = {1e-2, 1e-3, 1e-4, 1e-5};
    double I[4];
    DivResult out;
    double errsum = 0.0;
    bool allconv = true;
    auto shrunk = [&](int k) {
        quad::Domain d = base;
        const double factor = 1.0 - deltas[k];
        auto rho = base.radius;
        d.radius = [rho, factor](const Vec& u) { return factor * rho(u); };
        return quad::integrate(integrand, d, qopt);
    };
    for (int k = 0; k < 3; ++k) {
        auto r = shrunk(k);
        out.evaluations += r.evaluations;
        errsum += r.error_estimate;
        allconv = allconv && r.converged;
        if (!std::isfinite(r.value)) {
            out.value = r.value;
            out.infinite = true;
            out.note = "integrand unbounded inside the shrunken support";
            return out;
        }
        I[k] = r.value;
    }
    const double d1 = I[1] - I[0], d2 = I[2] - I[1];

    if (std::abs(d1) <= 10.0 * errsum + 1e-13 * std::abs(I[2])) {
        out.value = I[2];
        out.error = errsum + std::abs(d2);
        out.converged = allconv;
        out.note = "boundary tail below quadrature noise";
        return out;
    }
    if (d1 * d2 > 0.0 && std::abs(d2) >= 0.6 * std::abs(d1)) {
        out.infinite = true;
        out.converged = false;
        out.value = d2 > 0 ? kInf : -kInf;
        out.note = "shrink sequence does not contract: boundary tail diverges";
        return out;
    }

    // The contraction ratio identifies the leading tail power under the
    // tenfold delta refinement: sqrt(delta) contracts by 0.32, delta by 0.1,
    // delta^2 by 0.01. Fit I(delta) = I - sum_j A_j delta^(e1 + j h) over a
    // fourth, finer shrink; three correction terms are needed because the
    // half-power edge tails carry sqrt(delta), delta, and delta^(3/2) parts of
    // comparable size. Columns are scaled to their delta = 1e-2 entry so the
    // solve stays well conditioned.
    const double ratio = std::abs(d2) / std::abs(d1);
    double e1 = 0.5;
    if (ratio <= 0.0316) e1 = 2.0;
    else if (ratio <= 0.178) e1 = 1.0;
    const double h = e1 == 0.5 ? 0.5 : 1.0;
    {
        auto r = shrunk(3);
        out.evaluations += r.evaluations;
        errsum += r.error_estimate;
        allconv = allconv && r.converged;
        if (!std::isfinite(r.value)) {
            out.value = r.value;
            out.infinite = true;
            out.note = "integrand unbounded inside the shrunken support";
            return out;
        }
        I[3] = r.value;
    }
    auto fit = [&](int first, int terms) {
        Mat M(terms + 1, terms + 1);
        Vec rhs(terms + 1);
        for (int k = 0; k <= terms; ++k) {
            M(k, 0) = 1.0;
            for (int j = 1; j <= terms; ++j)
                M(k, j) = -std::pow(deltas[first + k] / deltas[first], e1 + (j - 1) * h);
            rhs(k) = I[first + k];
        }
        return M.fullPivLu().solve(rhs)(0);
    };
    const double full = fit(0, 3);
    const double coarse = fit(1, 2);
    out.value = full;
    out.error = 3.0 * errsum + std::abs(full - coarse);
    out.converged = allconv;
    out.note = "boundary tail extrapolated from shrunken supports";
    return out;
}

/// int phi for an s-concave function (phi is continuous up to the boundary,
/// so no shrink machinery is needed).
inline DivResult integral_of(const SConcaveFn& fn, quad::QuadOptions qopt = {}) {
    return detail::from_quad(quad::integrate(
        [&fn](const Vec& x) { return fn.phi_at(x); }, integration_domain(fn), qopt));
}

// ---------------------------------------------------------------------------
// pointwise lattice operations (for the valuation identity)

namespace detail {

/// min (combine_max = true: potentials of the pointwise max) or max of two
/// potentials, with derivatives taken from the attaining branch. Ties go to
/// the second branch for max and the first for min, so a nested pair passed
/// smaller-phi-first keeps the branch that attains the extreme nearby.
inline ScalarField combine_potentials(const ScalarField& a, const ScalarField& b,
                                      bool combine_max) {
    ScalarField out;
    out.dim = a.dim;
    auto pick_b = [a, b, combine_max](const Vec& x) {
        const double va = a(x), vb = b(x);
        return combine_max ? !(va < vb) : vb > va;
    };
    out.value = [a, b, pick_b](const Vec& x) { return pick_b(x) ? b(x) : a(x); };
    out.gradient = [a, b, pick_b](const Vec& x) {
        return pick_b(x) ? b.grad(x) : a.grad(x);
    };
    out.hessian = [a, b, pick_b](const Vec& x) {
        return pick_b(x) ? b.hess(x) : a.hess(x);
    };
    return out;
}

}  // namespace detail

/// Pointwise max of two full-support log-concave functions (min of potentials).
inline LogConcaveFn pointwise_max(const LogConcaveFn& a, const LogConcaveFn& b) {
    if (a.support.bounded() || b.support.bounded())
        throw NumericError("pointwise lattice operations need full supports");
    LogConcaveFn out;
    out.potential =
        detail::combine_potentials(a.effective_potential(), b.effective_potential(),
                                   /*combine_max=*/true);
    out.support = Support::all_space();
    out.name = "max(" + a.name + "," + b.name + ")";
    return out;
}

/// Pointwise min of two full-support log-concave functions (max of potentials).
inline LogConcaveFn pointwise_min(const LogConcaveFn& a, const LogConcaveFn& b) {
    if (a.support.bounded() || b.support.bounded())
        throw NumericError("pointwise lattice operations need full supports");
    LogConcaveFn out;
    out.potential =
        detail::combine_potentials(a.effective_potential(), b.effective_potential(),
                                   /*combine_max=*/false);
    out.support = Support::all_space();
    out.name = "min(" + a.name + "," + b.name + ")";
    return out;
}

// ---------------------------------------------------------------------------
// gaussian closed forms (C exp(-<Ax,x>))

namespace gauss {

inline double integral(const Mat& A, double C) {
    const double n = static_cast<double>(A.rows());
    return C * std::pow(M_PI, 0.5 * n) / std::sqrt(A.determinant());
}

inline double ratio(const Mat& A, double C) {
    const double n = static_cast<double>(A.rows());
    return std::pow(2.0, n) * A.determinant() / (C * C);
}

inline double df(const Generator& g, const Mat& A, double C) {
    return mul0inf(integral(A, C), eval_extended(g, ratio(A, C)));
}

inline double polar_integral(const Mat& A, double C) {
    const double n = static_cast<double>(A.rows());
    return std::pow(M_PI, 0.5 * n) * std::pow(2.0, n) * std::sqrt(A.determinant()) / C;
}

inline double entropy(const Mat& A, double C) {
    const double n = static_cast<double>(A.rows());
    return integral(A, C) * (std::log(C) - 0.5 * n);
}

}  // namespace gauss

}  // namespace funcdiv

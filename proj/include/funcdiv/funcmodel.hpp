#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"
#include "scalar_field.hpp"

namespace funcdiv {

/// Where a function lives. Bounded supports are stored as balls, as sublevel
/// sets {psi_ref < level} of a convex reference field, or by an explicit
/// radius function over unit directions (star-shaped about the origin).
struct Support {
    enum class Kind { AllSpace, Ball, SubLevel, Radial };
    Kind kind = Kind::AllSpace;
    double radius = 0.0;                       // Ball
    ScalarField ref;                           // SubLevel
    double level = 0.0;                        // SubLevel
    std::function<double(const Vec&)> radial;  // Radial

    static Support all_space() { return {}; }
    static Support ball(double r) {
        Support s;
        s.kind = Kind::Ball;
        s.radius = r;
        return s;
    }
    static Support sublevel(ScalarField ref, double level) {
        Support s;
        s.kind = Kind::SubLevel;
        s.ref = std::move(ref);
        s.level = level;
        return s;
    }
    static Support star(std::function<double(const Vec&)> radial) {
        Support s;
        s.kind = Kind::Radial;
        s.radial = std::move(radial);
        return s;
    }

    bool bounded() const { return kind != Kind::AllSpace; }

    bool contains(const Vec& x) const {
        switch (kind) {
            case Kind::AllSpace: return true;
            case Kind::Ball: return x.norm() < radius;
            case Kind::SubLevel: return ref(x) < level;
            case Kind::Radial: {
                const double r = x.norm();
                return r == 0.0 || r < radial(Vec(x / r));
            }
        }
        return false;
    }

    /// Lower bound for the distance to the boundary. The radial gap is scaled
    /// down to stay conservative for moderately eccentric convex sets.
    double margin(const Vec& x) const {
        switch (kind) {
            case Kind::AllSpace: return kInf;
            case Kind::Ball: return radius - x.norm();
            case Kind::SubLevel: {
                const double gap = level - ref(x);
                if (gap <= 0.0) return 0.0;
                const double gn = ref.grad(x).norm();
                return gap / std::max(gn, 1e-8);
            }
            case Kind::Radial: {
                const double r = x.norm();
                const Vec u = r == 0.0 ? Vec(Vec::Unit(x.size(), 0)) : Vec(x / r);
                return 0.5 * (radial(u) - r);
            }
        }
        return 0.0;
    }

    /// Radius of the support along unit direction u from the origin.
    double extent(const Vec& u) const {
        switch (kind) {
            case Kind::AllSpace: return kInf;
            case Kind::Ball: return radius;
            case Kind::Radial: return radial(u);
            case Kind::SubLevel: {
                double lo = 0.0, hi = 1.0;
                while (ref(hi * u) < level && hi < 1e12) hi *= 2.0;
                if (hi >= 1e12) return kInf;
                for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (ref(mid * u) < level ? lo : hi) = mid;
                }
                return 0.5 * (lo + hi);
            }
        }
        return 0.0;
    }
};

/// phi = normalization * exp(-potential), potential strictly convex.
struct LogConcaveFn {
    ScalarField potential;
    Support support;
    double normalization = 1.0;
    std::string name;
    bool is_gaussian = false;  // phi = C exp(-<Ax,x>): closed forms available
    Mat gauss_A;

    int dim() const { return potential.dim; }

    double phi(const Vec& x) const {
        if (!support.contains(x)) return 0.0;
        return normalization * std::exp(-potential(x));
    }

    /// Potential with the normalization constant folded in: phi = exp(-psi).
    ScalarField effective_potential() const {
        ScalarField f = potential;
        const double shift = std::log(normalization);
        f.value = [v = potential.value, shift](const Vec& x) { return v(x) - shift; };
        return f;
    }
};

/// phi with phi^s concave on its support; psi = (1 - phi^s)/s is the convex
/// potential driving every computation. Both views carry derivatives.
struct SConcaveFn {
    double s = 1.0;
    ScalarField phi;
    ScalarField psi;
    Support support;
    bool boundary_decay = true;  // phi^s -> 0 at the support boundary
    std::string name;

    int dim() const { return phi.dim; }

    double phi_at(const Vec& x) const {
        if (!support.contains(x)) return 0.0;
        return phi(x);
    }
};

/// The convex potential of an s-concave function.
inline ScalarField s_potential(const SConcaveFn& f) { return f.psi; }

namespace detail {

/// psi derivatives from phi derivatives: psi = (1 - phi^s)/s, so
/// grad psi = -phi^(s-1) grad phi,
/// Hess psi = -phi^(s-1) Hess phi + (1-s) phi^(s-2) grad phi (x) grad phi.
inline ScalarField psi_from_phi(const ScalarField& phi, double s) {
    ScalarField psi;
    psi.dim = phi.dim;
    psi.margin = phi.margin;
    psi.value = [phi, s](const Vec& x) { return (1.0 - std::pow(phi(x), s)) / s; };
    if (phi.gradient) {
        psi.gradient = [phi, s](const Vec& x) {
            return Vec(-std::pow(phi(x), s - 1.0) * phi.grad(x));
        };
    }
    if (phi.gradient && phi.hessian) {
        psi.hessian = [phi, s](const Vec& x) {
            const double p = phi(x);
            const Vec g = phi.grad(x);
            return Mat(-std::pow(p, s - 1.0) * phi.hess(x) +
                       (1.0 - s) * std::pow(p, s - 2.0) * (g * g.transpose()));
        };
    }
    return psi;
}

inline ScalarField phi_from_psi(const ScalarField& psi, double s) {
    ScalarField phi;
    phi.dim = psi.dim;
    phi.margin = psi.margin;
    phi.value = [psi, s](const Vec& x) {
        const double w = 1.0 - s * psi(x);
        return w > 0.0 ? std::pow(w, 1.0 / s) : 0.0;
    };
    if (psi.gradient) {
        phi.gradient = [psi, s](const Vec& x) {
            const double w = 1.0 - s * psi(x);
            return Vec(-std::pow(w, 1.0 / s - 1.0) * psi.grad(x));
        };
    }
    return phi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// log-concave families

/// phi = C exp(-<Ax,x>), A symmetric positive definite.
inline LogConcaveFn make_gaussian(const Mat& A, double C = 1.0) {
    const int n = static_cast<int>(A.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ConfigError("gaussian matrix must be positive definite");
    LogConcaveFn f;
    f.potential = make_field(
        n, [A](const Vec& x) { return x.dot(A * x); },
        [A](const Vec& x) { return Vec(2.0 * A * x); },
        [A](const Vec&) { return Mat(2.0 * A); });
    f.support = Support::all_space();
    f.normalization = C;
    f.name = "gaussian";
    f.is_gaussian = true;
    f.gauss_A = A;
    return f;
}

inline LogConcaveFn make_gaussian_iso(int dim, double a = 1.0, double C = 1.0) {
    return make_gaussian(Mat(a * Mat::Identity(dim, dim)), C);
}

/// psi = sum_i (cosh x_i - 1); superlinear with unit curvature at the origin.
inline LogConcaveFn make_cosh_potential(int dim = 1) {
    LogConcaveFn f;
    f.potential = make_field(
        dim,
        [](const Vec& x) {
            double v = 0.0;
            for (int i = 0; i < x.size(); ++i) v += std::cosh(x(i)) - 1.0;
            return v;
        },
        [](const Vec& x) { return Vec(x.array().sinh()); },
        [](const Vec& x) { return Mat(x.array().cosh().matrix().asDiagonal()); });
    f.support = Support::all_space();
    f.name = "cosh";
    return f;
}

/// psi = sum_i (x_i^4/4 + a x_i^2/2), a > 0.
inline LogConcaveFn make_quartic_potential(double a = 1.0, int dim = 1) {
    if (a <= 0.0) throw ConfigError("quartic potential needs a > 0");
    LogConcaveFn f;
    f.potential = make_field(
        dim,
        [a](const Vec& x) {
            double v = 0.0;
            for (int i = 0; i < x.size(); ++i)
                v += 0.25 * std::pow(x(i), 4) + 0.5 * a * x(i) * x(i);
            return v;
        },
        [a](const Vec& x) { return Vec(x.array().cube() + a * x.array()); },
        [a](const Vec& x) {
            return Mat((3.0 * x.array().square() + a).matrix().asDiagonal());
        });
    f.support = Support::all_space();
    f.name = "quartic(" + std::to_string(a) + ")";
    return f;
}

/// A polynomial potential given as monomials {coef, powers}. Convexity is
/// checked by sampling; see validate_log_concave.
struct Monomial {
    double coef = 0.0;
    std::vector<int> powers;
};

inline LogConcaveFn make_polynomial_potential(int dim, std::vector<Monomial> terms) {
    for (const auto& m : terms)
        if (static_cast<int>(m.powers.size()) != dim)
            throw ConfigError("monomial power list must match dimension");
    auto eval = [terms, dim](const Vec& x) {
        double v = 0.0;
        for (const auto& m : terms) {
            double t = m.coef;
            for (int i = 0; i < dim; ++i) t *= std::pow(x(i), m.powers[i]);
            v += t;
        }
        return v;
    };
    auto grad = [terms, dim](const Vec& x) {
        Vec g = Vec::Zero(dim);
        for (const auto& m : terms)
            for (int i = 0; i < dim; ++i) {
                if (m.powers[i] == 0) continue;
                double t = m.coef * m.powers[i] * std::pow(x(i), m.powers[i] - 1);
                for (int j = 0; j < dim; ++j)
                    if (j != i) t *= std::pow(x(j), m.powers[j]);
                g(i) += t;
            }
        return g;
    };
    auto hess = [terms, dim](const Vec& x) {
        Mat H = Mat::Zero(dim, dim);
        for (const auto& m : terms)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    const int pi = m.powers[i], pj = m.powers[j];
                    double t;
                    if (i == j) {
                        if (pi < 2) continue;
                        t = m.coef * pi * (pi - 1) * std::pow(x(i), pi - 2);
                        for (int k = 0; k < dim; ++k)
                            if (k != i) t *= std::pow(x(k), m.powers[k]);
                    } else {
                        if (pi == 0 || pj == 0) continue;
                        t = m.coef * pi * pj * std::pow(x(i), pi - 1) *
                            std::pow(x(j), pj - 1);
                        for (int k = 0; k < dim; ++k)
                            if (k != i && k != j) t *= std::pow(x(k), m.powers[k]);
                    }
                    H(i, j) += t;
                }
        return H;
    };
    LogConcaveFn f;
    f.potential = make_field(dim, eval, grad, hess);
    f.support = Support::all_space();
    f.name = "polynomial";
    return f;
}

// ---------------------------------------------------------------------------
// s-concave families

/// phi = (1 - |x|^2)_+^(1/s) on the unit ball; psi = |x|^2 / s.
inline SConcaveFn make_s_ball(double s, int dim = 1) {
    if (s <= 0.0) throw ConfigError("s_ball needs s > 0");
    SConcaveFn f;
    f.s = s;
    f.support = Support::ball(1.0);
    f.psi = make_field(
        dim, [s](const Vec& x) { return x.squaredNorm() / s; },
        [s](const Vec& x) { return Vec(2.0 / s * x); },
        [s, dim](const Vec&) { return Mat(2.0 / s * Mat::Identity(dim, dim)); });
    f.phi = make_field(
        dim,
        [s](const Vec& x) {
            const double w = 1.0 - x.squaredNorm();
            return w > 0.0 ? std::pow(w, 1.0 / s) : 0.0;
        },
        [s](const Vec& x) {
            const double w = 1.0 - x.squaredNorm();
            return Vec(-2.0 / s * std::pow(w, 1.0 / s - 1.0) * x);
        },
        [s, dim](const Vec& x) {
            const double w = 1.0 - x.squaredNorm();
            return Mat(4.0 / s * (1.0 / s - 1.0) * std::pow(w, 1.0 / s - 2.0) *
                           (x * x.transpose()) -
                       2.0 / s * std::pow(w, 1.0 / s - 1.0) *
                           Mat::Identity(dim, dim));
        });
    auto margin = [](const Vec& x) { return 1.0 - x.norm(); };
    f.phi.margin = margin;
    f.psi.margin = margin;
    f.boundary_decay = true;
    f.name = "s_ball(" + std::to_string(s) + ")";
    return f;
}

/// phi = sqrt(1 - |x|^2) on the unit ball, taken at concavity parameter s = 1;
/// psi = 1 - sqrt(1 - |x|^2).
inline SConcaveFn make_s_lens(int dim = 1) {
    SConcaveFn f;
    f.s = 1.0;
    f.support = Support::ball(1.0);
    auto u_of = [](const Vec& x) { return std::sqrt(std::max(0.0, 1.0 - x.squaredNorm())); };
    f.phi = make_field(
        dim, u_of,
        [u_of](const Vec& x) { return Vec(-x / u_of(x)); },
        [u_of, dim](const Vec& x) {
            const double u = u_of(x);
            return Mat(-Mat::Identity(dim, dim) / u - x * x.transpose() / (u * u * u));
        });
    f.psi = make_field(
        dim, [u_of](const Vec& x) { return 1.0 - u_of(x); },
        [u_of](const Vec& x) { return Vec(x / u_of(x)); },
        [u_of, dim](const Vec& x) {
            const double u = u_of(x);
            return Mat(Mat::Identity(dim, dim) / u + x * x.transpose() / (u * u * u));
        });
    auto margin = [](const Vec& x) { return 1.0 - x.norm(); };
    f.phi.margin = margin;
    f.psi.margin = margin;
    f.boundary_decay = true;
    f.name = "s_lens";
    return f;
}

/// An s-concave function from explicit phi (s fixed); psi via the chain rule.
inline SConcaveFn make_s_concave(double s, ScalarField phi, Support support,
                                 bool boundary_decay, std::string name = "custom") {
    SConcaveFn f;
    f.s = s;
    f.phi = std::move(phi);
    f.psi = detail::psi_from_phi(f.phi, s);
    f.support = std::move(support);
    f.boundary_decay = boundary_decay;
    f.name = std::move(name);
    return f;
}

/// phi_s = (1 + s log phi)_+^(1/s): the s-concave approximation of a
/// log-concave function. Its potential is the log-concave potential restricted
/// to {psi < 1/s}; phi_s increases to phi as s -> 0.
inline SConcaveFn s_approximation(const LogConcaveFn& lc, double s) {
    if (s <= 0.0) throw ConfigError("s_approximation needs s > 0");
    SConcaveFn f;
    f.s = s;
    ScalarField psi = lc.effective_potential();
    f.support = Support::sublevel(psi, 1.0 / s);
    Support sup = f.support;
    psi.margin = [sup](const Vec& x) { return sup.margin(x); };
    f.psi = psi;
    f.phi = detail::phi_from_psi(psi, s);
    f.boundary_decay = true;
    f.name = lc.name + "_s(" + std::to_string(s) + ")";
    return f;
}

// ---------------------------------------------------------------------------
// affine images and truncation

/// phi(Tx): potential psi(Tx), support pulled back through T.
inline LogConcaveFn compose_linear(const LogConcaveFn& f, const Mat& T) {
    LogConcaveFn g;
    g.normalization = f.normalization;
    g.name = f.name + "@T";
    if (f.is_gaussian) {
        g.is_gaussian = true;
        g.gauss_A = T.transpose() * f.gauss_A * T;
    }
    const ScalarField& p = f.potential;
    g.potential = make_field(
        p.dim, [p, T](const Vec& x) { return p(Vec(T * x)); },
        p.gradient ? std::function<Vec(const Vec&)>(
                         [p, T](const Vec& x) { return Vec(T.transpose() * p.grad(Vec(T * x))); })
                   : nullptr,
        p.hessian ? std::function<Mat(const Vec&)>([p, T](const Vec& x) {
            return Mat(T.transpose() * p.hess(Vec(T * x)) * T);
        })
                  : nullptr);
    if (f.support.kind == Support::Kind::AllSpace) {
        g.support = Support::all_space();
    } else {
        Support orig = f.support;
        ScalarField ref = make_field(p.dim, [orig, T](const Vec& x) {
            switch (orig.kind) {
                case Support::Kind::Ball: return Vec(T * x).squaredNorm();
                default: return orig.ref(Vec(T * x));
            }
        });
        const double level = orig.kind == Support::Kind::Ball
                                 ? orig.radius * orig.radius
                                 : orig.level;
        g.support = Support::sublevel(ref, level);
    }
    return g;
}

/// phi(x + x0). Only for full-space supports, which translation keeps.
inline LogConcaveFn translate(const LogConcaveFn& f, const Vec& x0) {
    if (f.support.kind != Support::Kind::AllSpace)
        throw ConfigError("translate: only full-space supports");
    LogConcaveFn g;
    g.normalization = f.normalization;
    g.support = Support::all_space();
    g.name = f.name + "@shift";
    const ScalarField& p = f.potential;
    g.potential = make_field(
        p.dim, [p, x0](const Vec& x) { return p(Vec(x + x0)); },
        p.gradient ? std::function<Vec(const Vec&)>(
                         [p, x0](const Vec& x) { return p.grad(Vec(x + x0)); })
                   : nullptr,
        p.hessian ? std::function<Mat(const Vec&)>(
                        [p, x0](const Vec& x) { return p.hess(Vec(x + x0)); })
                  : nullptr);
    return g;
}

/// Minimizer of a strictly convex field by damped Newton, started at 0.
inline Vec minimize_convex(const ScalarField& psi, int dim) {
    Vec x = Vec::Zero(dim);
    for (int it = 0; it < 50; ++it) {
        const Vec g = psi.grad(x);
        if (g.norm() < 1e-12) break;
        Vec step = psi.hess(x).ldlt().solve(g);
        double t = 1.0;
        const double f0 = psi(x);
        while (t > 1e-6 && !(finite(psi(Vec(x - t * step))) &&
                             psi(Vec(x - t * step)) < f0))
            t *= 0.5;
        x -= t * step;
    }
    return x;
}

namespace detail {

inline std::vector<Vec> direction_set(int dim) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(vec1(1.0));
        dirs.push_back(vec1(-1.0));
        return dirs;
    }
    if (dim == 2) {
        for (int k = 0; k < 16; ++k) {
            const double a = 2.0 * M_PI * k / 16.0;
            dirs.push_back(vec2(std::cos(a), std::sin(a)));
        }
        return dirs;
    }
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                Vec u = vec3(i, j, k);
                dirs.push_back(Vec(u / u.norm()));
            }
    return dirs;
}

}  // namespace detail

/// Box outside which exp(-psi) is below 1e-12 of its peak, inflated by 1.25.
/// The radius along each direction is found by bisecting psi = psi_min + dpsi.
inline quad::Domain truncation_box(const ScalarField& psi, int dim,
                                   double tail = 1e-12, double safety = 1.25) {
    const Vec x0 = minimize_convex(psi, dim);
    const double pmin = psi(x0);
    const double target = pmin - std::log(tail);
    Vec lo = x0, hi = x0;
    for (const Vec& u : detail::direction_set(dim)) {
        double a = 0.0, b = 1.0;
        while (psi(Vec(x0 + b * u)) < target && b < 1e9) b *= 2.0;
        for (int it = 0; it < 80 && b - a > 1e-9 * b; ++it) {
            const double mid = 0.5 * (a + b);
            (psi(Vec(x0 + mid * u)) < target ? a : b) = mid;
        }
        const Vec p = x0 + b * u;
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec c = 0.5 * (lo + hi);
    lo = c + safety * (lo - c);
    hi = c + safety * (hi - c);
    return quad::Domain::box(lo, hi);
}

/// Integration domain for a function: truncated box for full-support
/// functions, the exact support for bounded ones.
inline quad::Domain integration_domain(const LogConcaveFn& f) {
    if (!f.support.bounded()) return truncation_box(f.potential, f.dim());
    if (f.support.kind == Support::Kind::Ball) {
        const double r = f.support.radius;
        return quad::Domain::radial(f.dim(), [r](const Vec&) { return r; });
    }
    Support sup = f.support;
    return quad::Domain::radial(f.dim(), [sup](const Vec& u) { return sup.extent(u); });
}

inline quad::Domain integration_domain(const SConcaveFn& f) {
    if (!f.support.bounded()) return truncation_box(f.psi, f.dim());
    if (f.support.kind == Support::Kind::Ball) {
        const double r = f.support.radius;
        return quad::Domain::radial(f.dim(), [r](const Vec&) { return r; });
    }
    Support sup = f.support;
    return quad::Domain::radial(f.dim(), [sup](const Vec& u) { return sup.extent(u); });
}

// ---------------------------------------------------------------------------
// validation

/// Sampled sanity checks: positive-definite Hessian at seeded points and
/// finite-difference agreement with analytic derivatives where present.
inline void validate_log_concave(const LogConcaveFn& f, unsigned seed = default_seed()) {
    auto rng = make_rng(seed);
    const quad::Domain box = truncation_box(f.potential, f.dim());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&] {
        Vec x(f.dim());
        for (int i = 0; i < f.dim(); ++i)
            x(i) = box.lo(i) + unif(rng) * (box.hi(i) - box.lo(i));
        return x;
    };
    for (int k = 0; k < 100; ++k) {
        const Vec x = draw();
        Eigen::SelfAdjointEigenSolver<Mat> es(f.potential.hess(x));
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw ConfigError(f.name + ": potential is not strictly convex at a sampled point");
    }
    if (f.potential.derivative_mode() == DerivativeMode::Analytic) {
        ScalarField fd = f.potential;
        fd.gradient = nullptr;
        fd.hessian = nullptr;
        for (int k = 0; k < 50; ++k) {
            const Vec x = 0.5 * draw();
            const double gscale = std::max(1.0, f.potential.grad(x).norm());
            if ((f.potential.grad(x) - fd.grad(x)).norm() > 1e-6 * gscale)
                throw NumericError(f.name + ": analytic gradient disagrees with differences");
            const double hscale = std::max(1.0, f.potential.hess(x).norm());
            if ((f.potential.hess(x) - fd.hess(x)).norm() > 1e-4 * hscale)
                throw NumericError(f.name + ": analytic Hessian disagrees with differences");
        }
    }
}

/// Sampled s-concavity: phi^s midpoint-concave on random segments inside the
/// support, plus derivative cross-checks as above.
inline void validate_s_concave(const SConcaveFn& f, unsigned seed = default_seed()) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto draw = [&] {
        for (;;) {
            Vec x(f.dim());
            for (int i = 0; i < f.dim(); ++i) x(i) = unif(rng);
            if (f.support.bounded()) {
                if (f.support.contains(x) && f.support.margin(x) > 0.05) return x;
            } else {
                return x;
            }
        }
    };
    for (int k = 0; k < 100; ++k) {
        const Vec x = draw(), y = draw();
        const double ps = std::pow(f.phi(x), f.s), qs = std::pow(f.phi(y), f.s);
        const double ms = std::pow(f.phi(Vec(0.5 * (x + y))), f.s);
        if (ms < 0.5 * (ps + qs) - 1e-9)
            throw ConfigError(f.name + ": phi^s fails midpoint concavity at a sampled pair");
    }
    if (f.psi.derivative_mode() == DerivativeMode::Analytic) {
        ScalarField fd = f.psi;
        fd.gradient = nullptr;
        fd.hessian = nullptr;
        for (int k = 0; k < 50; ++k) {
            const Vec x = draw();
            if ((f.psi.grad(x) - fd.grad(x)).norm() >
                1e-6 * std::max(1.0, f.psi.grad(x).norm()))
                throw NumericError(f.name + ": analytic gradient disagrees with differences");
        }
    }
}

}  // namespace funcdiv

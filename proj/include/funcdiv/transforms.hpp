#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "funcmodel.hpp"

namespace funcdiv {

enum class DualMethod { ClosedForm, PointwiseOptimization, Grid };

template <class F>
struct DualPair {
    F primal;
    F dual;
    DualMethod method = DualMethod::PointwiseOptimization;
};

namespace detail {

/// argmax over the support of the concave map x -> <x,y> - psi(x), by damped
/// Newton with an ascent line search. For y outside the gradient range of a
/// bounded-support psi the iterate settles on the boundary supremum.
inline Vec legendre_argmax(const ScalarField& psi, const Support& sup, const Vec& y) {
    Vec x = Vec::Zero(psi.dim);
    auto h = [&](const Vec& z) {
        return sup.contains(z) ? z.dot(y) - psi(z) : -kInf;
    };
    double hx = h(x);
    for (int it = 0; it < 80; ++it) {
        const Vec g = y - psi.grad(x);
        if (g.norm() <= 1e-12 * std::max(1.0, y.norm())) break;
        Vec step = psi.hess(x).ldlt().solve(g);
        if (!step.allFinite()) step = g;
        bool moved = false;
        for (double t = 1.0; t > 1e-14; t *= 0.5) {
            const Vec xn = x + t * step;
            const double hn = h(xn);
            if (std::isfinite(hn) && hn > hx) {
                x = xn;
                hx = hn;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return x;
}

}  // namespace detail

/// Legendre transform sup_x [<x,y> - psi(x)] with envelope derivatives:
/// grad = x*(y), Hess = Hess psi(x*)^-1 (valid at interior maximizers).
inline ScalarField legendre(const ScalarField& psi, Support sup = Support::all_space()) {
    ScalarField out;
    out.dim = psi.dim;
    out.value = [psi, sup](const Vec& y) {
        const Vec x = detail::legendre_argmax(psi, sup, y);
        return x.dot(y) - psi(x);
    };
    out.gradient = [psi, sup](const Vec& y) {
        return detail::legendre_argmax(psi, sup, y);
    };
    out.hessian = [psi, sup](const Vec& y) {
        const Vec x = detail::legendre_argmax(psi, sup, y);
        return Mat(psi.hess(x).inverse());
    };
    return out;
}

/// Polar dual phi° = exp(-L psi). Gaussians C exp(-<Ax,x>) map in closed form
/// to (1/C) exp(-<A^-1 y, y>/4).
inline DualPair<LogConcaveFn> polar_dual(const LogConcaveFn& f) {
    DualPair<LogConcaveFn> pair;
    pair.primal = f;
    if (f.is_gaussian) {
        pair.dual = make_gaussian(Mat(0.25 * f.gauss_A.inverse()), 1.0 / f.normalization);
        pair.dual.name = f.name + "_polar";
        pair.method = DualMethod::ClosedForm;
        return pair;
    }
    LogConcaveFn d;
    d.potential = legendre(f.effective_potential(), f.support);
    d.potential.dim = f.dim();
    d.support = Support::all_space();
    d.normalization = 1.0;
    d.name = f.name + "_polar";
    pair.dual = d;
    pair.method = DualMethod::PointwiseOptimization;
    return pair;
}

// ---------------------------------------------------------------------------
// support functions and dual supports

/// h_K(u) = sup_{x in K} <x,u> for unit u; K the (convex) support.
inline double support_function(const Support& sup, const Vec& u) {
    const int n = static_cast<int>(u.size());
    switch (sup.kind) {
        case Support::Kind::AllSpace: return kInf;
        case Support::Kind::Ball: return sup.radius;
        default: break;
    }
    if (n == 1) return sup.extent(u);
    if (n == 2) {
        // coarse scan over boundary directions, then golden refinement
        auto g = [&](double a) {
            const Vec v = vec2(std::cos(a), std::sin(a));
            return sup.extent(v) * v.dot(u);
        };
        const double base = std::atan2(u(1), u(0));
        double best = -kInf, besta = base;
        for (int k = -90; k <= 90; ++k) {
            const double a = base + k * (M_PI / 180.0);
            const double val = g(a);
            if (val > best) {
                best = val;
                besta = a;
            }
        }
        double lo = besta - M_PI / 180.0, hi = besta + M_PI / 180.0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a1 = hi - gr * (hi - lo), a2 = lo + gr * (hi - lo);
        double f1 = g(a1), f2 = g(a2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                lo = a1;
                a1 = a2;
                f1 = f2;
                a2 = lo + gr * (hi - lo);
                f2 = g(a2);
            } else {
                hi = a2;
                a2 = a1;
                f2 = f1;
                a1 = hi - gr * (hi - lo);
                f1 = g(a1);
            }
        }
        return std::max(f1, f2);
    }
    throw NumericError("support function sampling is limited to dimensions 1 and 2");
}

/// Support of the s-dual: the polar of the primal support, scaled by 1/s.
inline Support s_dual_support(const Support& sup, double s, int dim) {
    if (sup.kind == Support::Kind::Ball) return Support::ball(1.0 / (s * sup.radius));
    if (!sup.bounded())
        throw NumericError("s-dual needs a bounded primal support");
    Support src = sup;
    return Support::star([src, s](const Vec& u) {
        return 1.0 / (s * support_function(src, u));
    });
}

// ---------------------------------------------------------------------------
// the s-dual transform

struct SDualOptions {
    int grid_1d = 801;
    int grid_2d = 201;
};

namespace detail {

/// argmax over supp phi of q(x) = (<x,y> - psi) / (1 - s psi): coarse grid,
/// then damped Newton on q with analytic first and second derivatives.
inline Vec s_dual_argmax(const ScalarField& psi, const Support& sup, double s,
                         const Vec& y, const SDualOptions& opt) {
    const int n = psi.dim;
    auto q = [&](const Vec& x) -> double {
        if (!sup.contains(x)) return -kInf;
        const double p = psi(x);
        const double D = 1.0 - s * p;
        if (D <= 0.0) return -kInf;
        return (x.dot(y) - p) / D;
    };

    Vec best = Vec::Zero(n);
    double qbest = q(best);
    const double inset = 1.0 - 1e-9;
    if (n == 1) {
        const double a = -sup.extent(vec1(-1.0)) * inset, b = sup.extent(vec1(1.0)) * inset;
        for (int i = 0; i < opt.grid_1d; ++i) {
            const Vec x = vec1(a + (b - a) * i / (opt.grid_1d - 1.0));
            const double v = q(x);
            if (v > qbest) {
                qbest = v;
                best = x;
            }
        }
    } else if (n == 2) {
        double R = 0.0;
        for (int k = 0; k < 32; ++k) {
            const double ang = 2.0 * M_PI * k / 32.0;
            R = std::max(R, sup.extent(vec2(std::cos(ang), std::sin(ang))));
        }
        for (int i = 0; i < opt.grid_2d; ++i)
            for (int j = 0; j < opt.grid_2d; ++j) {
                const Vec x = vec2(-R + 2.0 * R * i / (opt.grid_2d - 1.0),
                                   -R + 2.0 * R * j / (opt.grid_2d - 1.0));
                const double v = q(x);
                if (v > qbest) {
                    qbest = v;
                    best = x;
                }
            }
    } else {
        throw NumericError("s-dual optimization is limited to dimensions 1 and 2");
    }

    // Newton refinement: with N = <x,y> - psi and D = 1 - s psi,
    // grad q = (grad N - q grad D)/D,
    // Hess q = (HN - q HD - grad D grad q^T - grad q grad D^T)/D.
    Vec x = best;
    for (int it = 0; it < 30; ++it) {
        const double p = psi(x);
        const double D = 1.0 - s * p;
        const Vec gpsi = psi.grad(x);
        const Mat Hpsi = psi.hess(x);
        const double qx = (x.dot(y) - p) / D;
        const Vec gN = y - gpsi;
        const Vec gD = -s * gpsi;
        const Vec gq = (gN - qx * gD) / D;
        if (gq.norm() <= 1e-13 * std::max(1.0, y.norm())) break;
        const Mat Hq =
            (-Hpsi + qx * s * Hpsi - gD * gq.transpose() - gq * gD.transpose()) / D;
        Vec step = (-Hq).ldlt().solve(gq);
        if (!step.allFinite() || step.dot(gq) <= 0.0) step = gq;
        bool moved = false;
        for (double t = 1.0; t > 1e-14; t *= 0.5) {
            const Vec xn = x + t * step;
            const double v = q(xn);
            if (std::isfinite(v) && v > qx) {
                x = xn;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return x;
}

}  // namespace detail

/// The s-dual function: psi*(y) = sup_x (<x,y> - psi)/(1 - s psi) on the
/// scaled polar of the primal support. The gradient comes from the envelope
/// rule grad psi*(y) = x*/(1 - s psi(x*)); the Hessian from differentiating
/// the stationarity system in y, which needs an interior maximizer.
inline DualPair<SConcaveFn> s_dual(const SConcaveFn& f, SDualOptions opt = {}) {
    const double s = f.s;
    DualPair<SConcaveFn> pair;
    pair.primal = f;
    pair.method = DualMethod::PointwiseOptimization;

    SConcaveFn d;
    d.s = s;
    d.support = s_dual_support(f.support, s, f.dim());
    Support dsup = d.support;

    ScalarField psi = f.psi;
    Support psup = f.support;
    ScalarField dpsi;
    dpsi.dim = f.dim();
    dpsi.value = [psi, psup, s, opt](const Vec& y) {
        const Vec x = detail::s_dual_argmax(psi, psup, s, y, opt);
        return (x.dot(y) - psi(x)) / (1.0 - s * psi(x));
    };
    dpsi.gradient = [psi, psup, s, opt](const Vec& y) {
        const Vec x = detail::s_dual_argmax(psi, psup, s, y, opt);
        return Vec(x / (1.0 - s * psi(x)));
    };
    dpsi.hessian = [psi, psup, s, opt](const Vec& y) {
        const Vec x = detail::s_dual_argmax(psi, psup, s, y, opt);
        const double p = psi(x);
        const double D = 1.0 - s * p;
        const Vec gpsi = psi.grad(x);
        const double q = (x.dot(y) - p) / D;
        const Vec gq = ((y - gpsi) - q * (-s) * gpsi) / D;
        if (gq.norm() > 1e-6 * std::max(1.0, y.norm()))
            throw NumericError("dual curvature needs an interior maximizer");
        // dx*/dy from the stationarity system, then the envelope gradient rule
        const Mat J = psi.hess(x).ldlt().solve(
                          Mat(Mat::Identity(x.size(), x.size()) +
                              s / D * gpsi * x.transpose())) /
                      (1.0 - s * q);
        const Mat H = J / D + s / (D * D) * x * (gpsi.transpose() * J);
        return Mat(0.5 * (H + H.transpose()));
    };
    dpsi.margin = [dsup](const Vec& y) { return dsup.margin(y); };
    d.psi = dpsi;
    d.phi = detail::phi_from_psi(dpsi, s);
    d.name = f.name + "_sdual";

    // sample the dual boundary for phi^s decay
    double worst = 0.0;
    for (const Vec& u : detail::direction_set(f.dim())) {
        const double r = dsup.extent(Vec(u / u.norm()));
        const Vec y = (1.0 - 1e-6) * r * (u / u.norm());
        worst = std::max(worst, 1.0 - s * dpsi(y));
    }
    d.boundary_decay = worst < 1e-2;

    pair.dual = d;
    return pair;
}

// ---------------------------------------------------------------------------
// the transport map behind the s-dual change of variables

/// T(x) = grad psi / (1 + s(<grad psi, x> - psi)).
inline Vec t_map_point(const SConcaveFn& f, const Vec& x) {
    const Vec g = f.psi.grad(x);
    const double e = 1.0 + f.s * (g.dot(x) - f.psi(x));
    return Vec(g / e);
}

/// |det dT| = (1 - s psi) det Hess psi / (1 + s(<grad psi, x> - psi))^(n+1).
inline double t_map_jacobian(const SConcaveFn& f, const Vec& x) {
    const double p = f.psi(x);
    const Vec g = f.psi.grad(x);
    const double e = 1.0 + f.s * (g.dot(x) - p);
    return (1.0 - f.s * p) * f.psi.hess(x).determinant() /
           std::pow(e, f.dim() + 1);
}

}  // namespace funcdiv

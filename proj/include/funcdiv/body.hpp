#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "divergence.hpp"

namespace funcdiv {

/// One-dimensional concave profile whose symmetric subgraph is a planar body.
struct LiftProfile {
    ScalarField phi;
    double lo = 0.0;
    double hi = 0.0;
};

/// A convex body described by its gauge (Minkowski functional): positively
/// 1-homogeneous, convex, positive away from 0, with gauge^2 twice
/// differentiable off 0 when `smooth` is set.
struct ConvexBody {
    int n = 2;
    ScalarField gauge;
    bool smooth = true;
    std::string name;
    std::shared_ptr<const LiftProfile> lift;  ///< set for subgraph bodies

    double operator()(const Vec& x) const { return gauge(x); }
};

namespace detail {

/// psi_K = gauge^2 / 2, with derivatives composed from the gauge's.
inline ScalarField half_square_field(const ScalarField& g) {
    ScalarField out;
    out.dim = g.dim;
    out.value = [g](const Vec& x) {
        const double v = g(x);
        return 0.5 * v * v;
    };
    if (g.gradient) {
        // the gauge's own derivatives are 0-homogeneous, so psi's are guarded
        // at the apex: grad psi -> 0 there, and the hessian takes its
        // diagonal-direction limit (exact for quadratic gauges)
        out.gradient = [g](const Vec& x) {
            if (x.norm() == 0.0) return Vec(Vec::Zero(x.size()));
            return Vec(g(x) * g.grad(x));
        };
        if (g.hessian) {
            out.hessian = [g](const Vec& x) {
                Vec p = x;
                if (p.norm() == 0.0)
                    p = Vec(Vec::Constant(x.size(), 1e-8));
                const Vec dg = g.grad(p);
                return Mat(dg * dg.transpose() + g(p) * g.hess(p));
            };
        }
    }
    return out;
}

inline Vec circle_dir(double th) { return vec2(std::cos(th), std::sin(th)); }

inline Vec sphere_dir(double th, double ph) {
    const double st = std::sin(th);
    return vec3(st * std::cos(ph), st * std::sin(ph), std::cos(th));
}

}  // namespace detail

/// Radial section of the boundary: u / ||u||_K.
inline Vec boundary_point(const ConvexBody& K, const Vec& u) {
    return Vec(u / K.gauge(u));
}

struct BoundaryGeometry {
    Vec x;             ///< boundary point
    Vec normal;        ///< outer unit normal
    double curvature;  ///< generalized Gauss curvature
    double xn;         ///< support distance <x, N>
};

/// Boundary data in direction u. The curvature comes from the curvature
/// identity kappa = det Hess(gauge^2/2)(x) * <x,N>^(n+1).
inline BoundaryGeometry boundary_geometry(const ConvexBody& K, const Vec& u) {
    BoundaryGeometry b;
    b.x = boundary_point(K, u);
    const Vec dg = K.gauge.grad(b.x);
    b.normal = dg.normalized();
    b.xn = b.x.dot(b.normal);
    const ScalarField psi = detail::half_square_field(K.gauge);
    b.curvature = psi.hess(b.x).determinant() * std::pow(b.xn, K.n + 1);
    return b;
}

/// |K| = (1/n) int_{S^(n-1)} ||u||_K^(-n) dsigma.
inline DivResult volume(const ConvexBody& K, quad::QuadOptions qopt = {}) {
    if (K.n == 2) {
        auto f = [&K](const Vec& t) {
            const double g = K.gauge(detail::circle_dir(t(0)));
            return 0.5 / (g * g);
        };
        return detail::from_quad(
            quad::integrate(f, quad::Domain::interval(0.0, 2.0 * M_PI), qopt));
    }
    if (K.n == 3) {
        auto f = [&K](const Vec& t) {
            const double g = K.gauge(detail::sphere_dir(t(0), t(1)));
            return std::sin(t(0)) / (3.0 * g * g * g);
        };
        return detail::from_quad(quad::integrate(
            f, quad::Domain::box(vec2(0.0, 0.0), vec2(M_PI, 2.0 * M_PI)), qopt));
    }
    throw NumericError("volume: bodies live in dimension 2 or 3");
}

/// Surface integral of g over the boundary, parametrized from the sphere by
/// the radial map; the pulled-back measure uses differenced tangents.
inline DivResult integrate_boundary(const ConvexBody& K,
                                    const std::function<double(const Vec&)>& g,
                                    quad::QuadOptions qopt = {}) {
    const double h = 1e-6;
    if (K.n == 2) {
        auto f = [&](const Vec& t) {
            const double th = t(0);
            const Vec x = boundary_point(K, detail::circle_dir(th));
            const Vec speed = (boundary_point(K, detail::circle_dir(th + h)) -
                               boundary_point(K, detail::circle_dir(th - h))) /
                              (2.0 * h);
            return g(x) * speed.norm();
        };
        return detail::from_quad(
            quad::integrate(f, quad::Domain::interval(0.0, 2.0 * M_PI), qopt));
    }
    if (K.n == 3) {
        auto f = [&](const Vec& t) {
            const double th = t(0), ph = t(1);
            const Vec x = boundary_point(K, detail::sphere_dir(th, ph));
            const Vec xt = (boundary_point(K, detail::sphere_dir(th + h, ph)) -
                            boundary_point(K, detail::sphere_dir(th - h, ph))) /
                           (2.0 * h);
            const Vec xp = (boundary_point(K, detail::sphere_dir(th, ph + h)) -
                            boundary_point(K, detail::sphere_dir(th, ph - h))) /
                           (2.0 * h);
            Vec cr(3);
            cr << xt(1) * xp(2) - xt(2) * xp(1), xt(2) * xp(0) - xt(0) * xp(2),
                xt(0) * xp(1) - xt(1) * xp(0);
            return g(x) * cr.norm();
        };
        return detail::from_quad(quad::integrate(
            f, quad::Domain::box(vec2(0.0, 0.0), vec2(M_PI, 2.0 * M_PI)), qopt));
    }
    throw NumericError("integrate_boundary: bodies live in dimension 2 or 3");
}

/// D_f(K) = int_dK f(kappa/<x,N>^(n+1)) <x,N> dmu. The argument of f equals
/// det Hess(gauge^2/2) by the curvature identity, which is what we evaluate.
/// Subgraph bodies integrate over their profile's graph chart instead, where
/// curvature and support distance have the classical plane-curve forms.
inline DivResult df_body(const Generator& g, const ConvexBody& K,
                         quad::QuadOptions qopt = {}) {
    if (K.lift) {
        const LiftProfile& L = *K.lift;
        const ScalarField phi = L.phi;
        auto f = [phi, g](const Vec& x) {
            const double v = phi(x);
            const double d1 = phi.grad(x)(0);
            const double d2 = phi.hess(x)(0, 0);
            const double m = std::sqrt(1.0 + d1 * d1);
            const double kappa = -d2 / (m * m * m);
            const double xn = (v - x(0) * d1) / m;
            const double ratio = kappa / (xn * xn * xn);
            return mul0inf(xn * m, eval_extended(g, ratio));
        };
        auto r = detail::from_quad(
            quad::integrate(f, quad::Domain::interval(L.lo, L.hi), qopt));
        r.value *= 2.0;  // the lower half mirrors the upper
        r.error *= 2.0;
        return r;
    }

    const ScalarField psi = detail::half_square_field(K.gauge);
    auto density = [&](const Vec& x) { return psi.hess(x).determinant(); };
    auto f = [&](const Vec& x) {
        const Vec nrm = K.gauge.grad(x).normalized();
        return mul0inf(x.dot(nrm), eval_extended(g, density(x)));
    };
    return integrate_boundary(K, f, qopt);
}

// ---------------------------------------------------------------------------
// families

inline ConvexBody make_ball_body(double r, int n = 2) {
    if (r <= 0.0) throw ConfigError("ball radius must be positive");
    ConvexBody K;
    K.n = n;
    K.gauge.dim = n;
    K.gauge.value = [r](const Vec& x) { return x.norm() / r; };
    K.gauge.gradient = [r](const Vec& x) { return Vec(x / (r * x.norm())); };
    K.gauge.hessian = [r](const Vec& x) {
        const double nr = x.norm();
        const int n = static_cast<int>(x.size());
        return Mat((Mat::Identity(n, n) - x * x.transpose() / (nr * nr)) / (r * nr));
    };
    K.name = "ball";
    return K;
}

inline ConvexBody make_ellipsoid_body(const Vec& semi_axes) {
    const int n = static_cast<int>(semi_axes.size());
    if (n < 2 || n > 3) throw ConfigError("ellipsoids live in dimension 2 or 3");
    for (int i = 0; i < n; ++i)
        if (semi_axes(i) <= 0.0) throw ConfigError("ellipsoid semi-axes must be positive");
    Mat A = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = 1.0 / (semi_axes(i) * semi_axes(i));
    ConvexBody K;
    K.n = n;
    K.gauge.dim = n;
    K.gauge.value = [A](const Vec& x) { return std::sqrt(x.dot(A * x)); };
    K.gauge.gradient = [A](const Vec& x) {
        return Vec(A * x / std::sqrt(x.dot(A * x)));
    };
    K.gauge.hessian = [A](const Vec& x) {
        const double q = x.dot(A * x);
        const Vec ax = A * x;
        return Mat(A / std::sqrt(q) - ax * ax.transpose() / std::pow(q, 1.5));
    };
    K.name = "ellipsoid";
    return K;
}

inline ConvexBody make_ellipsoid_body(double a, double b) {
    return make_ellipsoid_body(vec2(a, b));
}

inline ConvexBody make_ellipsoid_body(double a, double b, double c) {
    return make_ellipsoid_body(vec3(a, b, c));
}

/// The l_p unit ball for finite p > 1. For p > 2 the curvature vanishes on
/// the axes (the body flattens toward the cube), which the boundary
/// integrands absorb through the f(0) conventions.
inline ConvexBody make_lp_body(double p, int n = 2) {
    if (p <= 1.0) throw ConfigError("lp bodies need p > 1");
    ConvexBody K;
    K.n = n;
    K.gauge.dim = n;
    K.gauge.value = [p](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
        return std::pow(s, 1.0 / p);
    };
    K.gauge.gradient = [p](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
        const double g = std::pow(s, 1.0 / p);
        Vec out(x.size());
        for (int i = 0; i < x.size(); ++i) {
            const double a = std::abs(x(i));
            out(i) = (a == 0.0 ? 0.0
                               : (x(i) > 0 ? 1.0 : -1.0) * std::pow(a, p - 1.0)) *
                     std::pow(g, 1.0 - p);
        }
        return out;
    };
    K.name = "lp_smooth";
    return K;
}

/// Planar body with radial function 1 + eps cos(k theta); convex for
/// eps (k^2 + 1) < 1.
inline ConvexBody make_perturbed_ball_body(double eps, int k) {
    if (eps < 0.0 || eps * (k * k + 1.0) >= 1.0)
        throw ConfigError("perturbation too strong to stay convex");
    ConvexBody K;
    K.n = 2;
    K.gauge.dim = 2;
    auto radial = [eps, k](double th) { return 1.0 + eps * std::cos(k * th); };
    K.gauge.value = [radial](const Vec& x) {
        return x.norm() / radial(std::atan2(x(1), x(0)));
    };
    K.gauge.gradient = [radial, eps, k](const Vec& x) {
        const double r = x.norm();
        const double th = std::atan2(x(1), x(0));
        const double R = radial(th);
        const Vec perp = vec2(-x(1), x(0));
        return Vec(x / (r * R) + eps * k * std::sin(k * th) / (r * R * R) * perp);
    };
    K.name = "perturbed_ball";
    return K;
}

/// Sampled shape checks: gauge 1-homogeneity, the Euler identity
/// <x, grad psi_K(x)> = 2 psi_K(x), and nonnegative boundary curvature.
inline void validate_body(const ConvexBody& K, int samples = 60) {
    auto rng = make_rng(default_seed());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.3, 3.0);
    const ScalarField psi = detail::half_square_field(K.gauge);
    for (int i = 0; i < samples; ++i) {
        Vec u(K.n);
        do {
            for (int a = 0; a < K.n; ++a) u(a) = unit(rng);
        } while (u.norm() < 0.1);
        const double t = scale(rng);
        const double g = K.gauge(u);
        if (std::abs(K.gauge(Vec(t * u)) - t * g) > 1e-10 * std::max(1.0, t * g))
            throw NumericError(K.name + ": gauge is not 1-homogeneous");
        const Vec x = boundary_point(K, u);
        const double two_psi = 2.0 * psi(x);
        if (std::abs(x.dot(psi.grad(x)) - two_psi) > 1e-6 * std::max(1.0, two_psi))
            throw NumericError(K.name + ": gauge squared fails the Euler identity");
        if (psi.hess(x).determinant() < -1e-8)
            throw NumericError(K.name + ": negative curvature at the boundary");
    }
}

// ---------------------------------------------------------------------------
// polar body

namespace detail {

using SupportFn = std::function<std::pair<double, Vec>(const Vec&)>;

inline double golden_max(const std::function<double(double)>& f, double lo,
                         double hi, int iters) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a1 = hi - gr * (hi - lo), a2 = lo + gr * (hi - lo);
    double f1 = f(a1), f2 = f(a2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            lo = a1;
            a1 = a2;
            f1 = f2;
            a2 = lo + gr * (hi - lo);
            f2 = f(a2);
        } else {
            hi = a2;
            a2 = a1;
            f2 = f1;
            a1 = hi - gr * (hi - lo);
            f1 = f(a1);
        }
    }
    return f1 > f2 ? a1 : a2;
}

/// h_K(y) = max <x,y> over dK: scan precomputed boundary points, then refine
/// the winning chart window by golden section. Returns the value and the
/// maximizing boundary point.
inline SupportFn support_evaluator(const ConvexBody& K) {
    if (K.n == 2) {
        const int m = 2048;
        auto pts = std::make_shared<std::vector<Vec>>();
        pts->reserve(m);
        for (int i = 0; i < m; ++i)
            pts->push_back(boundary_point(K, circle_dir(2.0 * M_PI * i / m)));
        ScalarField gauge = K.gauge;
        return [pts, gauge, m](const Vec& y) -> std::pair<double, Vec> {
            const auto& X = *pts;
            int best = 0;
            double bv = X[0].dot(y);
            for (int i = 1; i < m; ++i) {
                const double v = X[i].dot(y);
                if (v > bv) {
                    bv = v;
                    best = i;
                }
            }
            auto val = [&](double th) {
                const Vec u = circle_dir(th);
                return Vec(u / gauge(u)).dot(y);
            };
            const double step = 2.0 * M_PI / m;
            const double th = golden_max(val, (best - 1) * step, (best + 1) * step, 60);
            const Vec u = circle_dir(th);
            const Vec x = Vec(u / gauge(u));
            return {x.dot(y), x};
        };
    }
    if (K.n == 3) {
        const int m = 10'000;
        auto pts = std::make_shared<std::vector<Vec>>();
        auto angles = std::make_shared<std::vector<std::pair<double, double>>>();
        pts->reserve(m);
        angles->reserve(m);
        const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < m; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / m;
            const double th = std::acos(std::clamp(z, -1.0, 1.0));
            const double ph = std::fmod(golden_angle * i, 2.0 * M_PI);
            angles->emplace_back(th, ph);
            pts->push_back(boundary_point(K, sphere_dir(th, ph)));
        }
        ScalarField gauge = K.gauge;
        return [pts, angles, gauge](const Vec& y) -> std::pair<double, Vec> {
            const auto& X = *pts;
            int best = 0;
            double bv = X[0].dot(y);
            for (size_t i = 1; i < X.size(); ++i) {
                const double v = X[i].dot(y);
                if (v > bv) {
                    bv = v;
                    best = static_cast<int>(i);
                }
            }
            auto val = [&](double th, double ph) {
                const Vec u = sphere_dir(th, ph);
                return Vec(u / gauge(u)).dot(y);
            };
            double th = (*angles)[best].first, ph = (*angles)[best].second;
            double w = 0.08;
            for (int round = 0; round < 4; ++round) {
                th = golden_max([&](double t) { return val(t, ph); }, th - w, th + w, 40);
                ph = golden_max([&](double t) { return val(th, t); }, ph - w, ph + w, 40);
                w *= 0.25;
            }
            const Vec u = sphere_dir(th, ph);
            const Vec x = Vec(u / gauge(u));
            return {x.dot(y), x};
        };
    }
    throw NumericError("polar_body: bodies live in dimension 2 or 3");
}

}  // namespace detail

/// K° = {y : <x,y> <= 1 on K}; its gauge is the support function of K,
/// evaluated by boundary-sample maximization with local refinement. The
/// gradient is the maximizing boundary point (envelope rule), and the
/// hessian differentiates the stationarity system
///   y = h grad gauge(x*), gauge(x*) = 1
/// so no finite differencing of the argmax is involved.
inline ConvexBody polar_body(const ConvexBody& K) {
    ConvexBody P;
    P.n = K.n;
    P.smooth = K.smooth;
    P.name = K.name + "_polar";
    P.gauge.dim = K.n;

    detail::SupportFn ev = detail::support_evaluator(K);
    P.gauge.value = [ev](const Vec& y) { return ev(y).first; };
    P.gauge.gradient = [ev](const Vec& y) { return ev(y).second; };
    if (K.gauge.gradient) {
        ScalarField primal = K.gauge;
        P.gauge.hessian = [ev, primal](const Vec& y) {
            const auto [h, x] = ev(y);
            const int n = static_cast<int>(x.size());
            Mat M = Mat::Zero(n + 1, n + 1);
            M.topLeftCorner(n, n) = h * primal.hess(x);
            const Vec dg = primal.grad(x);
            M.topRightCorner(n, 1) = dg;
            M.bottomLeftCorner(1, n) = dg.transpose();
            Mat rhs = Mat::Zero(n + 1, n);
            rhs.topRows(n) = Mat::Identity(n, n);
            const Mat sol = M.fullPivLu().solve(rhs);
            if (!sol.allFinite() ||
                (M * sol - rhs).norm() > 1e-7 * (1.0 + sol.norm()))
                throw NumericError("support hessian: stationarity system is singular");
            const Mat J = sol.topRows(n);
            return Mat(0.5 * (J + J.transpose()));
        };
    }
    return P;
}

// ---------------------------------------------------------------------------
// the body <-> function bridge

/// phi_K = exp(-gauge^2/2), a log-concave function on all of space.
inline LogConcaveFn body_to_function(const ConvexBody& K) {
    LogConcaveFn f;
    f.potential = detail::half_square_field(K.gauge);
    f.support = Support::all_space();
    f.name = K.name + "_gaussian";
    return f;
}

/// The symmetric planar subgraph body of a concave profile that is positive
/// on an interval around 0 and vanishes at its endpoints. Divergences of the
/// profile at concavity 1 equal half the body's.
inline ConvexBody lift_body(const SConcaveFn& f) {
    if (f.s != 1.0 || f.dim() != 1)
        throw ConfigError("lift_body covers concavity 1 profiles on the line");
    auto L = std::make_shared<LiftProfile>();
    L->phi = f.phi;
    L->lo = -f.support.extent(vec1(-1.0));
    L->hi = f.support.extent(vec1(1.0));
    if (f.phi_at(vec1(0.0)) <= 0.0)
        throw ConfigError("lift_body needs a profile positive at 0");

    ConvexBody K;
    K.n = 2;
    K.name = f.name + "_lift";
    K.lift = L;
    K.gauge.dim = 2;
    ScalarField phi = f.phi;
    const double lo = L->lo, hi = L->hi;
    K.gauge.value = [phi, lo, hi](const Vec& v) {
        // smallest t with v/t inside the subgraph: phi(v_x/t) >= |v_y|/t,
        // found by bisection on the concave slice g(t) = t phi(v_x/t) - |v_y|
        const double ax = v(0), ay = std::abs(v(1));
        if (ax == 0.0 && ay == 0.0) return 0.0;
        auto inside = [&](double t) {
            const double s = ax / t;
            if (s <= lo || s >= hi) return false;
            return t * phi(vec1(s)) >= ay;
        };
        double thi = std::max({ay, ax / (ax > 0 ? hi : lo), 1e-12}) * (1.0 + 1e-9);
        while (!inside(thi)) {
            thi *= 2.0;
            if (thi > 1e12) throw NumericError("lift gauge failed to bracket");
        }
        double tlo = thi;
        while (inside(tlo)) tlo *= 0.5;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (tlo + thi);
            (inside(mid) ? thi : tlo) = mid;
        }
        return 0.5 * (tlo + thi);
    };
    return K;
}

}  // namespace funcdiv

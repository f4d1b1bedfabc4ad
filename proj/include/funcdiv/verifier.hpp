#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "body.hpp"
#include "divergence.hpp"
#include "transforms.hpp"

namespace funcdiv {

/// Outcome of one verified statement. For identities margin = |lhs - rhs|
/// and tolerance is relative: pass needs margin <= tolerance * max(1, |lhs|,
/// |rhs|). For inequalities margin is the signed slack of the asserted
/// direction and tolerance is absolute: pass needs margin >= -tolerance.
/// A report never passes when an underlying quadrature failed to converge.
struct CheckReport {
    std::string check_id;
    std::string subject;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string diagnostics;
};

inline constexpr double kIdentityTol = 1e-4;    ///< relative, two numeric sides
inline constexpr double kClosedFormTol = 1e-6;  ///< relative, one side closed form

namespace detail {

/// Accumulates quadrature effort across the evaluations feeding one report.
struct QuadBudget {
    double err = 0.0;
    long evals = 0;
    bool ok = true;
    std::string notes;

    double track(const DivResult& r) {
        err += r.error;
        evals += r.evaluations;
        if (!r.converged || r.infinite) ok = false;
        if (!r.note.empty()) {
            if (!notes.empty()) notes += "; ";
            notes += r.note;
        }
        return r.value;
    }
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
}

inline std::string quad_note(const QuadBudget& q) {
    std::string s = "quad_err=" + fmt(q.err) + " evals=" + std::to_string(q.evals);
    if (!q.ok) s += " NOT-CONVERGED";
    if (!q.notes.empty()) s += " [" + q.notes + "]";
    return s;
}

inline CheckReport identity_report(std::string id, std::string subject, double lhs,
                                   double rhs, double rel_tol, const QuadBudget& q,
                                   std::string extra = "") {
    CheckReport r;
    r.check_id = std::move(id);
    r.subject = std::move(subject);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = std::abs(lhs - rhs);
    r.tolerance = rel_tol;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    r.pass = q.ok && std::isfinite(lhs) && std::isfinite(rhs) &&
             r.margin <= rel_tol * scale;
    r.diagnostics = "identity; " + quad_note(q);
    if (!extra.empty()) r.diagnostics += "; " + extra;
    return r;
}

inline CheckReport inequality_report(std::string id, std::string subject, double lhs,
                                     double rhs, double margin, const QuadBudget& q,
                                     double floor_tol, std::string claim) {
    CheckReport r;
    r.check_id = std::move(id);
    r.subject = std::move(subject);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = margin;
    r.tolerance = 10.0 * q.err + floor_tol;
    r.pass = q.ok && std::isfinite(margin) && margin >= -r.tolerance;
    r.diagnostics = "inequality (" + std::move(claim) + "); " + quad_note(q);
    return r;
}

inline quad::Domain domain_hull(const quad::Domain& a, const quad::Domain& b) {
    return quad::Domain::box(a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// closed forms and structural identities

/// Numeric divergences of C exp(-<Ax,x>) against their closed forms, over a
/// family of generators; the report carries the worst pair.
inline CheckReport check_gaussian_closed_form(const Mat& A, double C,
                                              const std::vector<Generator>& gens,
                                              quad::QuadOptions qopt = {}) {
    const LogConcaveFn fn = make_gaussian(A, C);
    detail::QuadBudget q;
    double wl = 0.0, wr = 0.0, worst = -1.0;
    std::string which;
    for (const Generator& g : gens) {
        const double num = q.track(df_log_concave(g, fn, qopt));
        const double ref = gauss::df(g, A, C);
        const double rel =
            std::abs(num - ref) / std::max({1.0, std::abs(num), std::abs(ref)});
        if (rel > worst) {
            worst = rel;
            wl = num;
            wr = ref;
            which = g.name;
        }
    }
    const std::string subject = "gaussian(n=" + std::to_string(A.rows()) +
                                ",C=" + detail::fmt(C) + ")";
    return detail::identity_report("check_gaussian_closed_form", subject, wl, wr,
                                   kClosedFormTol, q,
                                   std::to_string(gens.size()) +
                                       " generators; worst: " + which);
}

/// f == 1 integrates the function itself; f == id integrates the polar.
inline CheckReport check_mass_identity(const LogConcaveFn& fn,
                                       quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double mass = q.track(integral_of(fn, qopt));
    const double d_one = q.track(df_log_concave(make_power(0.0), fn, qopt));
    const double d_id = q.track(df_log_concave(make_power(1.0), fn, qopt));
    const double polar_mass = q.track(integral_of(polar_dual(fn).dual, qopt));
    CheckReport r = detail::identity_report(
        "check_mass_identity", fn.name, d_id, polar_mass, kIdentityTol, q,
        "f==1 side: " + detail::fmt(d_one) + " vs mass " + detail::fmt(mass));
    r.pass = r.pass && std::abs(d_one - mass) <= kIdentityTol * std::max(1.0, mass);
    return r;
}

/// f == 1 recovers (1 + ns) times the mass at concavity s; requires the
/// density to vanish on the support boundary.
inline CheckReport check_s_mass_identity(const SConcaveFn& fn,
                                         quad::QuadOptions qopt = {}) {
    if (!fn.boundary_decay)
        throw ConfigError("s mass identity needs boundary decay");
    detail::QuadBudget q;
    const double d_one = q.track(df_s_concave(make_power(0.0), fn, qopt));
    const double mass = q.track(integral_of(fn, qopt));
    const double rhs = (1.0 + fn.s * fn.dim()) * mass;
    return detail::identity_report("check_s_mass_identity", fn.name, d_one, rhs,
                                   kIdentityTol, q);
}

// ---------------------------------------------------------------------------
// duality

/// D_f of the polar equals D_{f*} of the function.
inline CheckReport check_duality(const Generator& g, const LogConcaveFn& fn,
                                 quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const auto pair = polar_dual(fn);
    const double lhs = q.track(df_log_concave(g, pair.dual, qopt));
    const double rhs = q.track(df_log_concave(adjoint(g), fn, qopt));
    return detail::identity_report("check_duality", fn.name + " | " + g.name, lhs,
                                   rhs, kIdentityTol, q);
}

/// Same statement at concavity s through the s-dual.
inline CheckReport check_duality(const Generator& g, const SConcaveFn& fn,
                                 quad::QuadOptions qopt = {},
                                 SDualOptions dopt = {}) {
    detail::QuadBudget q;
    const auto pair = s_dual(fn, dopt);
    const double lhs = q.track(df_s_concave(g, pair.dual, qopt));
    const double rhs = q.track(df_s_concave(adjoint(g), fn, qopt));
    return detail::identity_report("check_duality", fn.name + " | " + g.name, lhs,
                                   rhs, kIdentityTol, q);
}

/// Surface-area exponents lambda and 1 - lambda swap under polarity.
inline CheckReport check_as_duality(double lambda, const LogConcaveFn& fn,
                                    quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const auto pair = polar_dual(fn);
    const double lhs = q.track(affine_surface_area(fn, lambda, qopt));
    const double rhs = q.track(affine_surface_area(pair.dual, 1.0 - lambda, qopt));
    return detail::identity_report("check_as_duality",
                                   fn.name + " | lambda=" + detail::fmt(lambda),
                                   lhs, rhs, kIdentityTol, q);
}

/// Mass of the s-dual against the identity-generator divergence of the
/// function: the f == 1 face of s-duality, evaluated without forming the
/// dual's density ratio.
inline CheckReport check_s_identity(const SConcaveFn& fn, quad::QuadOptions qopt = {},
                                    SDualOptions dopt = {}) {
    detail::QuadBudget q;
    const auto pair = s_dual(fn, dopt);
    const double lhs = q.track(df_s_concave(make_power(0.0), pair.dual, qopt));
    const double rhs = q.track(df_s_concave(make_power(1.0), fn, qopt));
    return detail::identity_report("check_s_identity", fn.name, lhs, rhs,
                                   kIdentityTol, q);
}

// ---------------------------------------------------------------------------
// convexity bounds

/// D_f against mass * f(polar mass / mass): at least for convex f, at most
/// for concave f, equality for linear f.
inline CheckReport check_jensen_bound(const Generator& g, const LogConcaveFn& fn,
                                      quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double mass = q.track(integral_of(fn, qopt));
    const double polar_mass = q.track(integral_of(polar_dual(fn).dual, qopt));
    const double lhs = q.track(df_log_concave(g, fn, qopt));
    const double rhs = mul0inf(mass, eval_extended(g, polar_mass / mass));
    const bool flip = g.shape == Shape::Concave && !g.linear;
    return detail::inequality_report("check_jensen_bound", fn.name + " | " + g.name,
                                     lhs, rhs, flip ? rhs - lhs : lhs - rhs, q,
                                     1e-9 * std::max(1.0, std::abs(rhs)),
                                     flip ? "lhs <= rhs" : "lhs >= rhs");
}

/// s-case bound: D_f^(s) against |Q| f(mean ratio) with |Q| = D_1^(s) and
/// mean = D_id^(s) / |Q|. Using the measured |Q| instead of (1+ns) * mass
/// keeps the bound valid when the s-dual loses boundary decay; the two
/// normalizations agree whenever the decay holds (see s mass identity).
inline CheckReport check_jensen_bound(const Generator& g, const SConcaveFn& fn,
                                      quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double total = q.track(df_s_concave(make_power(0.0), fn, qopt));
    const double d_id = q.track(df_s_concave(make_power(1.0), fn, qopt));
    const double lhs = q.track(df_s_concave(g, fn, qopt));
    const double rhs = mul0inf(total, eval_extended(g, d_id / total));
    const bool flip = g.shape == Shape::Concave && !g.linear;
    return detail::inequality_report(
        "check_jensen_bound", fn.name + " | " + g.name, lhs, rhs,
        flip ? rhs - lhs : lhs - rhs, q, 1e-9 * std::max(1.0, std::abs(rhs)),
        flip ? "lhs <= rhs" : "lhs >= rhs");
}

/// Log divergence against mass * ln(polar mass / mass); the centered variant
/// recenters the function and uses the volume constant (2 pi)^n / mass^2.
/// Both routes to the left side (composed ratio and raw density pair) must
/// agree before the bound is trusted.
inline CheckReport check_kl_bound(const LogConcaveFn& fn, bool centered,
                                  quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    LogConcaveFn subject = fn;
    std::string extra;
    if (centered) {
        const double mass0 = q.track(integral_of(fn, qopt));
        const quad::Domain dom = integration_domain(fn);
        const int n = fn.dim();
        Vec x0(n);
        for (int i = 0; i < n; ++i) {
            auto mom = [&fn, i](const Vec& x) { return x(i) * fn.phi(x); };
            x0(i) = q.track(detail::from_quad(quad::integrate(mom, dom, qopt))) / mass0;
        }
        if (x0.norm() > 1e-9) subject = translate(fn, x0);
        extra = "center shift " + detail::fmt(x0.norm());
    }

    const double mass = q.track(integral_of(subject, qopt));
    const double lhs = q.track(log_divergence(subject, qopt));
    double rhs;
    if (centered) {
        rhs = mass * std::log(std::pow(2.0 * M_PI, subject.dim()) / (mass * mass));
    } else {
        const double polar_mass = q.track(integral_of(polar_dual(subject).dual, qopt));
        rhs = mass * std::log(polar_mass / mass);
    }

    // independent route: same quantity through the raw density pair, plus the
    // p-weighted log generator for contrast (a strictly larger quantity off
    // equality of the two densities)
    const double brute = -q.track(df_pair(make_neglog(), density_pair(subject), qopt));
    const double gap = std::abs(brute - lhs) / std::max(1.0, std::abs(lhs));
    const DivResult pw = df_pair(make_tlogt(), density_pair(subject), qopt);

    CheckReport r = detail::inequality_report(
        centered ? "check_kl_bound_centered" : "check_kl_bound", subject.name, lhs,
        rhs, rhs - lhs, q, 1e-9 * std::max(1.0, std::abs(rhs)), "lhs <= rhs");
    r.diagnostics += "; density-pair route gap=" + detail::fmt(gap) +
                     "; p-weighted=" + detail::fmt(pw.value);
    if (!extra.empty()) r.diagnostics += "; " + extra;
    if (gap > 1e-6) {
        r.pass = false;
        r.diagnostics += "; ROUTES-DISAGREE";
    }
    return r;
}

// ---------------------------------------------------------------------------
// invariance and valuation

/// D_f is unchanged by symmetric determinant-one changes of variable.
inline CheckReport check_invariance(const Generator& g, const LogConcaveFn& fn,
                                    const std::vector<Mat>& maps,
                                    quad::QuadOptions qopt = {}) {
    for (const Mat& T : maps) {
        if ((T - T.transpose()).norm() > 1e-12 * (1.0 + T.norm()) ||
            std::abs(T.determinant() - 1.0) > 1e-12)
            throw ConfigError("invariance maps must be symmetric with det 1");
    }
    detail::QuadBudget q;
    const double base = q.track(df_log_concave(g, fn, qopt));
    double wl = base, worst = -1.0;
    std::string which = "none";
    for (std::size_t k = 0; k < maps.size(); ++k) {
        const double v = q.track(df_log_concave(g, compose_linear(fn, maps[k]), qopt));
        const double rel =
            std::abs(v - base) / std::max({1.0, std::abs(v), std::abs(base)});
        if (rel > worst) {
            worst = rel;
            wl = v;
            which = "map " + std::to_string(k + 1) + "/" + std::to_string(maps.size());
        }
    }
    return detail::identity_report("check_invariance", fn.name + " | " + g.name, wl,
                                   base, kIdentityTol, q, "worst: " + which);
}

/// D_f(max) + D_f(min) = D_f(a) + D_f(b) on a common domain. Stated for
/// nested pairs, where the decomposition is node-exact.
inline CheckReport check_valuation(const Generator& g, const LogConcaveFn& a,
                                   const LogConcaveFn& b,
                                   quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const quad::Domain dom =
        detail::domain_hull(integration_domain(a), integration_domain(b));
    const double dv = q.track(df_log_concave(g, pointwise_max(a, b), qopt, &dom));
    const double dw = q.track(df_log_concave(g, pointwise_min(a, b), qopt, &dom));
    const double da = q.track(df_log_concave(g, a, qopt, &dom));
    const double db = q.track(df_log_concave(g, b, qopt, &dom));
    return detail::identity_report("check_valuation",
                                   "max/min(" + a.name + "," + b.name + ") | " + g.name,
                                   dv + dw, da + db, 1e-10, q);
}

// ---------------------------------------------------------------------------
// surface-area monotonicity and the omega invariant

/// Clause 1: interpolation between two exponents; clause 2: mass anchor;
/// clause 3: sup-ratio anchor. Each clause runs the fixed parameter triples
/// (alpha, beta, lambda) = (1, 0, 1/2) and (2, 0, 1); the report carries the
/// tightest margin.
inline CheckReport check_monotonicity(int clause, const LogConcaveFn& fn,
                                      quad::QuadOptions qopt = {}) {
    if (clause < 1 || clause > 3)
        throw ConfigError("monotonicity clause must be 1, 2, or 3");
    detail::QuadBudget q;
    const double mass = q.track(integral_of(fn, qopt));
    struct Triple {
        double alpha, beta, lambda;
    };
    const Triple triples[2] = {{1.0, 0.0, 0.5}, {2.0, 0.0, 1.0}};
    double wl = 0.0, wr = 0.0, margin = kInf;
    for (const Triple& t : triples) {
        const double as_l = q.track(affine_surface_area(fn, t.lambda, qopt));
        double bound = 0.0;
        if (clause == 1) {
            const double w = (t.lambda - t.beta) / (t.alpha - t.beta);
            const double as_a = q.track(affine_surface_area(fn, t.alpha, qopt));
            const double as_b = q.track(affine_surface_area(fn, t.beta, qopt));
            bound = std::pow(as_a, w) * std::pow(as_b, 1.0 - w);
        } else if (clause == 2) {
            const double w = t.lambda / t.alpha;
            const double as_a = q.track(affine_surface_area(fn, t.alpha, qopt));
            bound = std::pow(as_a, w) * std::pow(mass, 1.0 - w);
        } else {
            const double as_b = q.track(affine_surface_area(fn, t.beta, qopt));
            bound = std::pow(as_extreme(fn, +1), t.lambda - t.beta) * as_b;
        }
        if (bound - as_l < margin) {
            margin = bound - as_l;
            wl = as_l;
            wr = bound;
        }
    }
    static const char* kIds[3] = {"check_monotonicity_interp",
                                  "check_monotonicity_mass",
                                  "check_monotonicity_sup"};
    return detail::inequality_report(kIds[clause - 1], fn.name, wl, wr, margin, q,
                                     1e-8 * std::max({1.0, wl, wr}), "lhs <= rhs");
}

/// (as_lambda / mass)^(1/lambda) is nondecreasing in lambda.
inline CheckReport check_ladder_monotone(const LogConcaveFn& fn,
                                         quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const DivResult mass = integral_of(fn, qopt);
    q.track(mass);
    const double lams[5] = {0.05, 0.1, 0.2, 0.5, 1.0};
    double v[5], prop = 0.0;
    std::string ladder;
    for (int i = 0; i < 5; ++i) {
        const DivResult as = affine_surface_area(fn, lams[i], qopt);
        q.track(as);
        v[i] = std::pow(as.value / mass.value, 1.0 / lams[i]);
        // error of the powered rung, to first order
        prop += v[i] / lams[i] *
                (as.error / std::abs(as.value) + mass.error / mass.value);
        ladder += (i ? ", " : "") + detail::fmt(v[i]);
    }
    double margin = kInf;
    for (int i = 0; i + 1 < 5; ++i) margin = std::min(margin, v[i + 1] - v[i]);
    CheckReport r = detail::inequality_report(
        "check_ladder_monotone", fn.name, v[4], v[0], margin, q,
        10.0 * prop + 1e-8 * std::max(1.0, std::abs(v[4])), "nondecreasing in lambda");
    r.diagnostics += "; ladder: " + ladder;
    return r;
}

/// Positive-exponent rungs bound omega from above with gaps shrinking as the
/// exponent drops; negative rungs bound it from below. margin is the worst
/// of all bracketing and gap-shrinking constraints.
inline CheckReport check_omega_ladder(const LogConcaveFn& fn,
                                      quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const DivResult mass = integral_of(fn, qopt);
    q.track(mass);
    const double om = std::exp(q.track(log_divergence(fn, qopt)) / mass.value);
    const double lams[3] = {0.2, 0.1, 0.05};
    double up[3], dn[3], prop = 0.0;
    std::string rungs;
    for (int i = 0; i < 3; ++i) {
        const DivResult as_p = affine_surface_area(fn, lams[i], qopt);
        const DivResult as_m = affine_surface_area(fn, -lams[i], qopt);
        q.track(as_p);
        q.track(as_m);
        up[i] = std::pow(as_p.value / mass.value, 1.0 / lams[i]);
        dn[i] = std::pow(as_m.value / mass.value, -1.0 / lams[i]);
        prop += up[i] / lams[i] *
                    (as_p.error / std::abs(as_p.value) + mass.error / mass.value) +
                dn[i] / lams[i] *
                    (as_m.error / std::abs(as_m.value) + mass.error / mass.value);
        rungs += (i ? ", " : "") + detail::fmt(dn[i]) + " < " + detail::fmt(up[i]);
    }
    const double margin =
        std::min({up[0] - up[1], up[1] - up[2], up[2] - om, om - dn[2],
                  dn[2] - dn[1], dn[1] - dn[0]});
    CheckReport r = detail::inequality_report(
        "check_omega_ladder", fn.name, up[2], om, margin, q,
        10.0 * prop + 1e-8 * std::max(1.0, om), "rungs bracket omega, gaps shrink");
    r.diagnostics += "; omega=" + detail::fmt(om) + "; rungs: " + rungs;
    return r;
}

/// omega(fn) * omega(polar) <= 1, with equality at gaussians.
inline CheckReport check_omega_product(const LogConcaveFn& fn,
                                       quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const auto pair = polar_dual(fn);
    const double mass_p = q.track(integral_of(fn, qopt));
    const double mass_d = q.track(integral_of(pair.dual, qopt));
    const double om_p = std::exp(q.track(log_divergence(fn, qopt)) / mass_p);
    const double om_d = std::exp(q.track(log_divergence(pair.dual, qopt)) / mass_d);
    CheckReport r = detail::inequality_report("check_omega_product", fn.name, 1.0,
                                              om_p * om_d, 1.0 - om_p * om_d, q,
                                              1e-9, "product <= 1");
    r.diagnostics +=
        "; omega=" + detail::fmt(om_p) + " omega_polar=" + detail::fmt(om_d);
    return r;
}

// ---------------------------------------------------------------------------
// the s -> 0 limit

/// |D_f^(s)(fn_s) - D_f(fn)| along s in {0.2, 0.1, 0.05}: strictly shrinking,
/// final relative error within 1e-2.
inline CheckReport check_s_limit(const Generator& g, const LogConcaveFn& fn,
                                 quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double target = q.track(df_log_concave(g, fn, qopt));
    const double scale = std::max(1.0, std::abs(target));
    const double ss[3] = {0.2, 0.1, 0.05};
    double err[3];
    std::string ladder;
    for (int i = 0; i < 3; ++i) {
        const double v = q.track(df_s_concave(g, s_approximation(fn, ss[i]), qopt));
        err[i] = std::abs(v - target) / scale;
        ladder += (i ? ", " : "") + detail::fmt(err[i]);
    }
    const double margin = std::min({err[0] - err[1], err[1] - err[2], 1e-2 - err[2]});
    CheckReport r = detail::inequality_report(
        "check_s_limit", fn.name + " | " + g.name, err[2], 1e-2, margin, q, 0.0,
        "errors shrink, final <= 1e-2");
    r.diagnostics += "; relative errors: " + ladder;
    return r;
}

// ---------------------------------------------------------------------------
// bodies

/// Boundary divergence against n|K| f(|K polar| / |K|).
inline CheckReport check_body_jensen(const Generator& g, const ConvexBody& K,
                                     quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double lhs = q.track(df_body(g, K, qopt));
    const double vol = q.track(volume(K, qopt));
    const double vol_polar = q.track(volume(polar_body(K), qopt));
    const double rhs = mul0inf(K.n * vol, eval_extended(g, vol_polar / vol));
    const bool flip = g.shape == Shape::Concave && !g.linear;
    return detail::inequality_report("check_body_jensen", K.name + " | " + g.name,
                                     lhs, rhs, flip ? rhs - lhs : lhs - rhs, q,
                                     1e-9 * std::max(1.0, std::abs(rhs)),
                                     flip ? "lhs <= rhs" : "lhs >= rhs");
}

/// D_f of the polar body equals D_{f*} of the body.
inline CheckReport check_body_duality(const Generator& g, const ConvexBody& K,
                                      quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double lhs = q.track(df_body(g, polar_body(K), qopt));
    const double rhs = q.track(df_body(adjoint(g), K, qopt));
    return detail::identity_report("check_body_duality", K.name + " | " + g.name,
                                   lhs, rhs, kIdentityTol, q);
}

/// The gaussian lift exp(-gauge^2/2) carries the boundary divergence up to
/// the dimensional factor (2 pi)^(n/2) / (n vol(unit ball)).
inline CheckReport check_body_bridge(const Generator& g, const ConvexBody& K,
                                     quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const double fun = q.track(df_log_concave(g, body_to_function(K), qopt));
    const double body = q.track(df_body(g, K, qopt));
    const double n = K.n;
    const double unit_ball = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    const double factor = std::pow(2.0 * M_PI, 0.5 * n) / (n * unit_ball);
    return detail::identity_report("check_body_bridge", K.name + " | " + g.name, fun,
                                   factor * body, kIdentityTol, q,
                                   "factor " + detail::fmt(factor));
}

/// Hessian-route curvature against the parametric ellipse oracle
/// ab / (a^2 sin^2 t + b^2 cos^2 t)^(3/2) at equally spaced points.
inline CheckReport check_curvature_identity(double a, double b, int points = 50) {
    const ConvexBody K = make_ellipsoid_body(a, b);
    double wl = 0.0, wr = 1.0, worst = -1.0;
    for (int j = 0; j < points; ++j) {
        const double t = 2.0 * M_PI * (j + 0.5) / points;
        const Vec x = vec2(a * std::cos(t), b * std::sin(t));
        const double got = boundary_geometry(K, x).curvature;
        const double want =
            a * b / std::pow(a * a * std::sin(t) * std::sin(t) +
                                 b * b * std::cos(t) * std::cos(t),
                             1.5);
        const double rel = std::abs(got - want) / std::max(1.0, want);
        if (rel > worst) {
            worst = rel;
            wl = got;
            wr = want;
        }
    }
    detail::QuadBudget q;
    return detail::identity_report("check_curvature_identity",
                                   K.name + " | " + std::to_string(points) + " points",
                                   wl, wr, kClosedFormTol, q, "worst point shown");
}

/// One-dimensional unit-concavity profiles: the boundary divergence of the
/// subgraph body is twice the profile divergence.
inline CheckReport check_lift_consistency(const Generator& g, const SConcaveFn& fn,
                                          quad::QuadOptions qopt = {}) {
    detail::QuadBudget q;
    const ConvexBody K = lift_body(fn);
    const double lhs = 0.5 * q.track(df_body(g, K, qopt));
    const double rhs = q.track(df_s_concave(g, fn, qopt));
    return detail::identity_report("check_lift_consistency", fn.name + " | " + g.name,
                                   lhs, rhs, kIdentityTol, q, "body route halved");
}

// ---------------------------------------------------------------------------
// second-order gaussian inequalities

enum class LinearizationVariant {
    HessianDominates,  ///< hess energy >= half the rough-field energy
    VarianceLower,     ///< variance >= grad energy - rough/4
    VarianceUpper,     ///< grad energy - rough/2 + hess/2 >= variance
    ReversePoincare,   ///< variance >= grad energy - hess/2
};

inline const char* to_string(LinearizationVariant v) {
    switch (v) {
        case LinearizationVariant::HessianDominates: return "hessian-dominates";
        case LinearizationVariant::VarianceLower: return "variance-lower";
        case LinearizationVariant::VarianceUpper: return "variance-upper";
        default: return "reverse-poincare";
    }
}

/// Gaussian-measure inequalities for an even C^2 perturbation eta, all
/// moments taken by Gauss-Hermite at two orders that must agree.
inline CheckReport check_linearization(const ScalarField& eta, int dim,
                                       LinearizationVariant variant,
                                       const std::string& label, int order_lo = 32,
                                       int order_hi = 48) {
    auto rng = make_rng(default_seed());
    std::normal_distribution<double> nd(0.0, 1.5);
    for (int k = 0; k < 16; ++k) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x(i) = nd(rng);
        const double va = eta(x), vb = eta(Vec(-x));
        if (std::abs(va - vb) > 1e-8 * std::max(1.0, std::abs(va)))
            throw ConfigError("linearization needs an even perturbation");
    }

    struct Moments {
        double rough = 0.0, grad2 = 0.0, hess2 = 0.0, mean = 0.0, second = 0.0;
    };
    auto moments = [&eta, dim](int order) {
        Moments m;
        m.rough = quad::integrate_gaussian(
            [&eta](const Vec& x) {
                const double t = eta.hess(x).trace() - eta.grad(x).dot(x);
                return t * t;
            },
            dim, order);
        m.grad2 = quad::integrate_gaussian(
            [&eta](const Vec& x) { return eta.grad(x).squaredNorm(); }, dim, order);
        m.hess2 = quad::integrate_gaussian(
            [&eta](const Vec& x) { return eta.hess(x).squaredNorm(); }, dim, order);
        m.mean = quad::integrate_gaussian([&eta](const Vec& x) { return eta(x); }, dim, order);
        m.second = quad::integrate_gaussian(
            [&eta](const Vec& x) { return eta(x) * eta(x); }, dim, order);
        return m;
    };
    const Moments lo = moments(order_lo);
    const Moments hi = moments(order_hi);
    double disc = 0.0;
    for (auto [a, b] : {std::pair{lo.rough, hi.rough}, {lo.grad2, hi.grad2},
                        {lo.hess2, hi.hess2}, {lo.mean, hi.mean},
                        {lo.second, hi.second}})
        disc = std::max(disc, std::abs(a - b));

    const double var = hi.second - hi.mean * hi.mean;
    double lhs = 0.0, rhs = 0.0;
    switch (variant) {
        case LinearizationVariant::HessianDominates:
            lhs = hi.hess2;
            rhs = 0.5 * hi.rough;
            break;
        case LinearizationVariant::VarianceLower:
            lhs = var;
            rhs = hi.grad2 - 0.25 * hi.rough;
            break;
        case LinearizationVariant::VarianceUpper:
            lhs = hi.grad2 - 0.5 * hi.rough + 0.5 * hi.hess2;
            rhs = var;
            break;
        case LinearizationVariant::ReversePoincare:
            lhs = var;
            rhs = hi.grad2 - 0.5 * hi.hess2;
            break;
    }

    CheckReport r;
    r.check_id = "check_linearization";
    r.subject = label + " | " + to_string(variant);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = lhs - rhs;
    r.tolerance = 1e-8 * std::max({1.0, std::abs(lhs), std::abs(rhs)}) + 10.0 * disc;
    const double disc_rel = disc / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    r.pass = std::isfinite(r.margin) && r.margin >= -r.tolerance && disc_rel <= 1e-6;
    r.diagnostics = "inequality (lhs >= rhs); gh orders " + std::to_string(order_lo) +
                    "/" + std::to_string(order_hi) +
                    " disagreement=" + detail::fmt(disc);
    if (disc_rel > 1e-6) r.diagnostics += "; TOO-ROUGH";
    return r;
}

// ---------------------------------------------------------------------------
// registry

struct CheckInfo {
    std::string id;
    std::string description;
};

inline const std::vector<CheckInfo>& check_registry() {
    static const std::vector<CheckInfo> table = {
        {"check_gaussian_closed_form",
         "numeric gaussian divergences against their closed forms"},
        {"check_mass_identity",
         "f == 1 and f == id recover the mass and the polar mass"},
        {"check_s_mass_identity",
         "f == 1 recovers (1 + ns) times the mass at concavity s"},
        {"check_duality", "polar duality swaps the generator with its adjoint"},
        {"check_as_duality",
         "surface-area exponents lambda and 1 - lambda swap under polarity"},
        {"check_s_identity",
         "mass of the s-dual equals the identity-generator divergence"},
        {"check_jensen_bound", "divergence against the mean-ratio bound"},
        {"check_kl_bound", "log divergence against the mass-ratio bound"},
        {"check_kl_bound_centered",
         "log divergence of a centered function against the volume bound"},
        {"check_invariance",
         "divergence unchanged by symmetric volume-preserving maps"},
        {"check_valuation", "divergence adds over pointwise max/min pairs"},
        {"check_monotonicity_interp",
         "surface-area interpolation bound between two exponents"},
        {"check_monotonicity_mass", "surface-area bound anchored at the mass"},
        {"check_monotonicity_sup", "surface-area bound anchored at the sup ratio"},
        {"check_ladder_monotone", "normalized surface-area ladder is nondecreasing"},
        {"check_omega_ladder",
         "finite-exponent ladder brackets omega with shrinking gaps"},
        {"check_omega_product", "omega times omega of the polar stays at most one"},
        {"check_s_limit",
         "s-divergences approach the log-concave divergence as s -> 0"},
        {"check_body_jensen", "boundary divergence against the volume-ratio bound"},
        {"check_body_duality",
         "polarity swaps the generator with its adjoint on bodies"},
        {"check_body_bridge",
         "gaussian lift of a body reproduces its boundary divergence"},
        {"check_curvature_identity",
         "hessian curvature formula against the parametric oracle"},
        {"check_lift_consistency",
         "profile lifts halve the divergence of their subgraph body"},
        {"check_linearization",
         "second-order gaussian inequalities for even perturbations"},
    };
    return table;
}

}  // namespace funcdiv

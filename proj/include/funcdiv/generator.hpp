#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace funcdiv {

enum class Shape { Convex, Concave };
enum class GenFamily { Power, TLogT, NegLog, Custom };

/// The function f defining an f-divergence, together with its limits at 0+.
/// Immutable after construction; safe for concurrent evaluation.
struct Generator {
    std::function<double(double)> eval;  ///< defined on (0, inf)
    Shape shape = Shape::Convex;
    double f_at_zero = 0.0;      ///< lim_{t->0+} f(t), may be +-inf
    double fstar_at_zero = 0.0;  ///< lim_{t->0+} t f(1/t)
    GenFamily family = GenFamily::Custom;
    double lambda = 0.0;  ///< Power only
    bool linear = false;
    std::string name;

    double operator()(double t) const { return eval(t); }
};

namespace detail {

/// Sign of the sampled curvature on a log-spaced grid over (1e-6, 1e6).
/// Returns +1 for convex, -1 for concave, 2 for linear, 0 for mixed.
/// Convexity on the grid means slopes are nondecreasing; slope differences
/// are compared at slack 1e-8 relative to the local slope scale.
inline int sampled_curvature_sign(const std::function<double(double)>& f) {
    constexpr int kPoints = 200;
    constexpr double kTol = 1e-8;
    std::vector<double> t(kPoints), v(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        t[i] = std::pow(10.0, -6.0 + 12.0 * i / (kPoints - 1));
        v[i] = f(t[i]);
    }
    bool pos = false, neg = false;
    for (int i = 0; i + 2 < kPoints; ++i) {
        const double s01 = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
        const double s12 = (v[i + 2] - v[i + 1]) / (t[i + 2] - t[i + 1]);
        const double scale = std::abs(s01) + std::abs(s12) + 1e-300;
        const double curv = (s12 - s01) / scale;
        if (curv > kTol) pos = true;
        if (curv < -kTol) neg = true;
    }
    if (pos && neg) return 0;
    if (!pos && !neg) return 2;  // flat within slack: linear
    return pos ? 1 : -1;
}

}  // namespace detail

/// Numerically extrapolated limit of f(t) as t -> 0+. Returns +-inf when divergent.
inline double extrapolate_zero_limit(const std::function<double(double)>& f) {
    double prev = f(1e-4);
    for (int k = 5; k <= 10; ++k) {
        const double cur = f(std::pow(10.0, -k));
        if (std::abs(cur) > 1e6 && std::abs(cur) > 2.0 * std::abs(prev))
            return cur > 0 ? kInf : -kInf;
        prev = cur;
    }
    return std::abs(prev) > 1e8 ? (prev > 0 ? kInf : -kInf) : prev;
}

inline Generator make_power(double lambda) {
    Generator g;
    g.family = GenFamily::Power;
    g.lambda = lambda;
    g.eval = [lambda](double t) { return std::pow(t, lambda); };
    g.linear = (lambda == 0.0 || lambda == 1.0);
    g.shape = (lambda > 0.0 && lambda < 1.0) ? Shape::Concave : Shape::Convex;
    g.f_at_zero = lambda > 0.0 ? 0.0 : (lambda == 0.0 ? 1.0 : kInf);
    const double mu = 1.0 - lambda;  // adjoint exponent
    g.fstar_at_zero = mu > 0.0 ? 0.0 : (mu == 0.0 ? 1.0 : kInf);
    g.name = "power(" + std::to_string(lambda) + ")";
    return g;
}

inline Generator make_tlogt() {
    Generator g;
    g.family = GenFamily::TLogT;
    g.eval = [](double t) { return t * std::log(t); };
    g.shape = Shape::Convex;
    g.f_at_zero = 0.0;
    g.fstar_at_zero = kInf;
    g.name = "tlogt";
    return g;
}

inline Generator make_neglog() {
    Generator g;
    g.family = GenFamily::NegLog;
    g.eval = [](double t) { return -std::log(t); };
    g.shape = Shape::Convex;
    g.f_at_zero = kInf;
    g.fstar_at_zero = 0.0;
    g.name = "neglog";
    return g;
}

/// Custom generator; the sampled shape test rejects functions that are neither
/// convex nor concave. Limits default to numeric extrapolation.
inline Generator make_custom(std::string name, std::function<double(double)> eval,
                             double f_at_zero = std::numeric_limits<double>::quiet_NaN(),
                             double fstar_at_zero = std::numeric_limits<double>::quiet_NaN()) {
    Generator g;
    g.family = GenFamily::Custom;
    g.eval = std::move(eval);
    g.name = std::move(name);
    const int sign = detail::sampled_curvature_sign(g.eval);
    if (sign == 0)
        throw ConfigError("generator '" + g.name + "' is neither convex nor concave");
    g.shape = sign < 0 ? Shape::Concave : Shape::Convex;
    g.linear = (sign == 2);
    g.f_at_zero = std::isnan(f_at_zero) ? extrapolate_zero_limit(g.eval) : f_at_zero;
    auto star = [e = g.eval](double t) { return t * e(1.0 / t); };
    g.fstar_at_zero = std::isnan(fstar_at_zero) ? extrapolate_zero_limit(star) : fstar_at_zero;
    return g;
}

/// The *-adjoint f*(t) = t f(1/t). Involutive; preserves shape. Builtin
/// families map onto builtin families, keeping exact evaluation.
inline Generator adjoint(const Generator& g) {
    switch (g.family) {
        case GenFamily::Power:
            return make_power(1.0 - g.lambda);
        case GenFamily::TLogT:
            return make_neglog();
        case GenFamily::NegLog:
            return make_tlogt();
        case GenFamily::Custom:
            break;
    }
    Generator a;
    a.family = GenFamily::Custom;
    a.eval = [e = g.eval](double t) { return t * e(1.0 / t); };
    a.shape = g.shape;
    a.linear = g.linear;
    a.f_at_zero = g.fstar_at_zero;
    a.fstar_at_zero = g.f_at_zero;
    a.name = g.name + "*";
    return a;
}

/// Generator evaluation with the 0-limit convention applied for nonpositive
/// arguments (density ratios can underflow to 0 at support edges).
inline double eval_extended(const Generator& g, double t) {
    if (t > 0.0 && std::isfinite(t)) return g.eval(t);
    if (t <= 0.0) return g.f_at_zero;
    return t;  // +inf argument: propagate
}

inline Generator builtin(const std::string& family, double lambda = 0.0) {
    if (family == "power") return make_power(lambda);
    if (family == "tlogt") return make_tlogt();
    if (family == "neglog") return make_neglog();
    throw ConfigError("unknown generator family '" + family + "'");
}

}  // namespace funcdiv

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "core.hpp"

namespace funcdiv::quad {

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = false;
    double sup_seen = 0.0;  ///< largest |integrand| sampled; grows without bound on divergent integrals
};

struct QuadOptions {
    double tol = 0.0;       ///< relative target; 0 picks the per-dimension default
    int max_depth = 48;     ///< bisection depth limit per region
    long max_evals = 4'000'000;
};

/// Default relative tolerance: 1e-7 in one dimension, 1e-5 in two and three.
inline double default_tol(int dim) { return dim <= 1 ? 1e-7 : 1e-5; }

struct Domain {
    int dim = 1;
    enum class Kind { Box, Radial } kind = Kind::Box;
    Vec lo, hi;
    std::function<double(const Vec&)> radius;  ///< Radial: boundary distance along a unit direction

    static Domain box(const Vec& lo, const Vec& hi) {
        Domain d;
        d.dim = static_cast<int>(lo.size());
        d.kind = Kind::Box;
        d.lo = lo;
        d.hi = hi;
        return d;
    }
    static Domain interval(double a, double b) { return box(vec1(a), vec1(b)); }
    static Domain radial(int dim, std::function<double(const Vec&)> rho) {
        Domain d;
        d.dim = dim;
        d.kind = Kind::Radial;
        d.radius = std::move(rho);
        return d;
    }
    static Domain ball(int dim, double R) {
        return radial(dim, [R](const Vec&) { return R; });
    }
};

namespace detail {

/// 15-point Kronrod extension of 7-point Gauss on [-1,1], nodes ascending.
/// The embedded Gauss nodes sit at the odd indices.
inline constexpr int kNodes = 15;
inline constexpr double kX[kNodes] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kWK[kNodes] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kWG[kNodes] = {
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0, 0.381830050505119, 0.0,
    0.417959183673469, 0.0, 0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0};

struct Region {
    double lo[3], hi[3];
    double value = 0.0;
    double err = 0.0;
    int split_axis = 0;
    int depth = 0;
    long seq = 0;
};

struct RegionOrder {
    bool operator()(const Region& a, const Region& b) const {
        if (a.err != b.err) return a.err < b.err;  // max-heap on error
        return a.seq > b.seq;
    }
};

/// Tensor Kronrod value over one box plus the per-axis Gauss defects.
template <typename F>
inline bool evaluate_region(const F& f, int dim, Region& r, long& evals, double& sup_seen,
                            double& bad_value) {
    double mid[3], half[3];
    for (int a = 0; a < dim; ++a) {
        mid[a] = 0.5 * (r.lo[a] + r.hi[a]);
        half[a] = 0.5 * (r.hi[a] - r.lo[a]);
    }
    double scale = 1.0;
    for (int a = 0; a < dim; ++a) scale *= half[a];

    double sumK = 0.0;
    double sumG[3] = {0.0, 0.0, 0.0};
    Vec x(dim);
    int idx[3] = {0, 0, 0};
    const long total = (dim == 1) ? kNodes : (dim == 2 ? kNodes * kNodes : kNodes * kNodes * kNodes);
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int a = 0; a < dim; ++a) {
            idx[a] = static_cast<int>(rem % kNodes);
            rem /= kNodes;
        }
        double wk = 1.0;
        for (int a = 0; a < dim; ++a) {
            x[a] = mid[a] + half[a] * kX[idx[a]];
            wk *= kWK[idx[a]];
        }
        const double fv = f(x);
        ++evals;
        if (!std::isfinite(fv)) {
            bad_value = fv;
            return false;
        }
        sup_seen = std::max(sup_seen, std::abs(fv));
        sumK += wk * fv;
        for (int a = 0; a < dim; ++a) sumG[a] += fv * wk * (kWG[idx[a]] / kWK[idx[a]]);
    }
    r.value = sumK * scale;
    r.err = 0.0;
    r.split_axis = 0;
    double worst = -1.0;
    for (int a = 0; a < dim; ++a) {
        const double d = std::abs(sumK - sumG[a]) * scale;
        r.err += d;
        if (d > worst) {
            worst = d;
            r.split_axis = a;
        }
    }
    return true;
}

template <typename F>
inline IntegralResult adaptive_box(const F& f, const Vec& lo, const Vec& hi, QuadOptions opt) {
    const int dim = static_cast<int>(lo.size());
    const double tol = opt.tol > 0 ? opt.tol : default_tol(dim);
    IntegralResult res;
    double bad = 0.0;

    std::vector<Region> heap;
    long seq = 0;
    Region root{};
    for (int a = 0; a < dim; ++a) {
        root.lo[a] = lo[a];
        root.hi[a] = hi[a];
    }
    root.seq = seq++;
    if (!evaluate_region(f, dim, root, res.evaluations, res.sup_seen, bad)) {
        res.value = bad;
        return res;
    }
    heap.push_back(root);
    double total_val = root.value, total_err = root.err;

    const RegionOrder order;
    while (total_err > tol * std::max(1.0, std::abs(total_val))) {
        if (res.evaluations >= opt.max_evals) break;
        std::pop_heap(heap.begin(), heap.end(), order);
        Region worst = heap.back();
        heap.pop_back();
        if (worst.err <= 0.0 || worst.depth >= opt.max_depth) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), order);
            break;
        }
        total_val -= worst.value;
        total_err -= worst.err;
        const int a = worst.split_axis;
        const double cut = 0.5 * (worst.lo[a] + worst.hi[a]);
        for (int side = 0; side < 2; ++side) {
            Region child = worst;
            (side == 0 ? child.hi[a] : child.lo[a]) = cut;
            child.depth = worst.depth + 1;
            child.seq = seq++;
            if (!evaluate_region(f, dim, child, res.evaluations, res.sup_seen, bad)) {
                res.value = bad;
                res.converged = false;
                return res;
            }
            total_val += child.value;
            total_err += child.err;
            heap.push_back(child);
            std::push_heap(heap.begin(), heap.end(), order);
        }
    }

    // deterministic reduction: leaves in creation order, compensated summation
    std::sort(heap.begin(), heap.end(), [](const Region& a, const Region& b) { return a.seq < b.seq; });
    double sum = 0.0, comp = 0.0, errsum = 0.0, errcomp = 0.0;
    for (const Region& r : heap) {
        double y = r.value - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        y = r.err - errcomp;
        t = errsum + y;
        errcomp = (t - errsum) - y;
        errsum = t;
    }
    res.value = sum;
    res.error_estimate = errsum;
    res.converged = errsum <= tol * std::max(1.0, std::abs(sum));
    return res;
}

}  // namespace detail

/// Adaptive integration over a box or a radially described set.
/// Radial sets are mapped to boxes in polar coordinates before subdivision.
inline IntegralResult integrate(const std::function<double(const Vec&)>& f, const Domain& dom,
                                QuadOptions opt = {}) {
    if (dom.dim < 1 || dom.dim > 3) throw NumericError("integrate: dimension must be 1..3");
    if (dom.kind == Domain::Kind::Box) return detail::adaptive_box(f, dom.lo, dom.hi, opt);

    if (dom.dim == 1) {
        const double a = dom.radius(vec1(-1.0));
        const double b = dom.radius(vec1(1.0));
        return detail::adaptive_box(f, vec1(-a), vec1(b), opt);
    }
    if (dom.dim == 2) {
        auto g = [&](const Vec& p) {
            const double t = p[0], th = p[1];
            Vec u = vec2(std::cos(th), std::sin(th));
            const double rho = dom.radius(u);
            Vec x = (t * rho) * u;
            return f(x) * t * rho * rho;
        };
        return detail::adaptive_box(g, vec2(0.0, 0.0), vec2(1.0, 2.0 * M_PI), opt);
    }
    auto g = [&](const Vec& p) {
        const double t = p[0], th = p[1], ph = p[2];
        const double st = std::sin(th);
        Vec u = vec3(st * std::cos(ph), st * std::sin(ph), std::cos(th));
        const double rho = dom.radius(u);
        Vec x = (t * rho) * u;
        return f(x) * t * t * rho * rho * rho * st;
    };
    Vec lo(3), hi(3);
    lo << 0.0, 0.0, 0.0;
    hi << 1.0, M_PI, 2.0 * M_PI;
    return detail::adaptive_box(g, lo, hi, opt);
}

struct GaussHermite {
    Vec nodes;    ///< abscissae for the weight (2pi)^{-1/2} e^{-x^2/2}
    Vec weights;  ///< normalized: weights sum to 1
};

/// Golub-Welsch nodes for the normalized one-dimensional Gaussian weight.
inline const GaussHermite& gauss_hermite(int order) {
    if (order < 1 || order > 64) throw NumericError("gauss_hermite: order must be 1..64");
    static std::mutex mu;
    static std::map<int, GaussHermite> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    Vec diag = Vec::Zero(order);
    Vec sub(order > 1 ? order - 1 : 0);
    for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub);
    GaussHermite gh;
    gh.nodes = es.eigenvalues();
    gh.weights = Vec(order);
    for (int k = 0; k < order; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        gh.weights[k] = v0 * v0;
    }
    return cache.emplace(order, std::move(gh)).first->second;
}

/// Expectation of g under the standard Gaussian measure, tensor rule.
/// Exact for polynomials of degree <= 2*order - 1.
inline double integrate_gaussian(const std::function<double(const Vec&)>& g, int dim, int order) {
    if (dim < 1 || dim > 3) throw NumericError("integrate_gaussian: dimension must be 1..3");
    const GaussHermite& gh = gauss_hermite(order);
    Vec x(dim);
    double sum = 0.0, comp = 0.0;
    int idx[3] = {0, 0, 0};
    const long total = (dim == 1) ? order : (dim == 2 ? long(order) * order : long(order) * order * order);
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            idx[a] = static_cast<int>(rem % order);
            rem /= order;
            x[a] = gh.nodes[idx[a]];
            w *= gh.weights[idx[a]];
        }
        const double y = w * g(x) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Plain Monte Carlo with antithetic pairs. Test oracle only, never a primary path.
inline double mc_integrate_box(const std::function<double(const Vec&)>& f, const Vec& lo,
                               const Vec& hi, long samples, std::uint64_t seed) {
    const int dim = static_cast<int>(lo.size());
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol *= hi[a] - lo[a];
    double sum = 0.0, comp = 0.0;
    Vec x(dim), xa(dim);
    for (long i = 0; i < samples / 2; ++i) {
        for (int a = 0; a < dim; ++a) {
            const double u = unif(rng);
            x[a] = lo[a] + (hi[a] - lo[a]) * u;
            xa[a] = lo[a] + (hi[a] - lo[a]) * (1.0 - u);
        }
        const double y = 0.5 * (f(x) + f(xa)) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return vol * sum / static_cast<double>(samples / 2);
}

}  // namespace funcdiv::quad

#pragma once

#include <functional>
#include <utility>

#include "core.hpp"

namespace funcdiv {

enum class DerivativeMode { Analytic, FiniteDifference };

namespace detail {

constexpr double kGradStep = 6.0554544523933395e-6;  // eps^(1/3)
constexpr double kHessStep = 1.2207031250000000e-4;  // eps^(1/4)

inline double clamp_step(double h, const Vec& x,
                         const std::function<double(const Vec&)>& margin) {
    if (!margin) return h;
    const double scale = std::max(1.0, x.norm());
    const double m = margin(x);
    if (m <= 1.5e-7 * scale)
        throw NumericError("finite difference step does not fit inside the domain");
    return std::min(h, m / 3.0);
}

}  // namespace detail

/// A smooth function R^n -> R with optional analytic derivatives. Missing
/// derivatives fall back to central finite differences; `margin` (distance to
/// the domain boundary) shrinks the step near bounded supports.
struct ScalarField {
    int dim = 1;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;   // optional
    std::function<Mat(const Vec&)> hessian;    // optional
    std::function<double(const Vec&)> margin;  // optional; distance to domain edge

    double operator()(const Vec& x) const { return value(x); }

    DerivativeMode derivative_mode() const {
        return (gradient && hessian) ? DerivativeMode::Analytic
                                     : DerivativeMode::FiniteDifference;
    }

    Vec grad(const Vec& x) const {
        if (gradient) return gradient(x);
        const double h =
            detail::clamp_step(detail::kGradStep * std::max(1.0, x.norm()), x, margin);
        Vec g(dim), xp = x, xm = x;
        for (int i = 0; i < dim; ++i) {
            xp(i) = x(i) + h;
            xm(i) = x(i) - h;
            g(i) = (value(xp) - value(xm)) / (2.0 * h);
            xp(i) = x(i);
            xm(i) = x(i);
        }
        return g;
    }

    Mat hess(const Vec& x) const {
        if (hessian) return hessian(x);
        const double h =
            detail::clamp_step(detail::kHessStep * std::max(1.0, x.norm()), x, margin);
        Mat H(dim, dim);
        if (gradient) {
            // differentiate the analytic gradient once, then symmetrize
            Vec xp = x, xm = x;
            for (int j = 0; j < dim; ++j) {
                xp(j) = x(j) + h;
                xm(j) = x(j) - h;
                H.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * h);
                xp(j) = x(j);
                xm(j) = x(j);
            }
            return 0.5 * (H + H.transpose());
        }
        const double f0 = value(x);
        Vec xt = x;
        for (int i = 0; i < dim; ++i) {
            xt(i) = x(i) + h;
            const double fp = value(xt);
            xt(i) = x(i) - h;
            const double fm = value(xt);
            xt(i) = x(i);
            H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
            for (int j = i + 1; j < dim; ++j) {
                double q[4];
                const double si[] = {1.0, 1.0, -1.0, -1.0};
                const double sj[] = {1.0, -1.0, 1.0, -1.0};
                for (int k = 0; k < 4; ++k) {
                    xt(i) = x(i) + si[k] * h;
                    xt(j) = x(j) + sj[k] * h;
                    q[k] = value(xt);
                    xt(i) = x(i);
                    xt(j) = x(j);
                }
                H(i, j) = H(j, i) = (q[0] - q[1] - q[2] + q[3]) / (4.0 * h * h);
            }
        }
        return H;
    }
};

/// Gradient and Hessian at a point in one call.
inline std::pair<Vec, Mat> differentiate(const ScalarField& f, const Vec& x) {
    return {f.grad(x), f.hess(x)};
}

inline ScalarField make_field(int dim, std::function<double(const Vec&)> value,
                              std::function<Vec(const Vec&)> gradient = nullptr,
                              std::function<Mat(const Vec&)> hessian = nullptr) {
    ScalarField f;
    f.dim = dim;
    f.value = std::move(value);
    f.gradient = std::move(gradient);
    f.hessian = std::move(hessian);
    return f;
}

}  // namespace funcdiv

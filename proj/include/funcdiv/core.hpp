#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace funcdiv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool finite(double x) { return std::isfinite(x); }

/// Product with the convention 0 * inf = 0 (mass-zero regions never contribute).
inline double mul0inf(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

/// Seed for every randomized sampling routine. Overridable via FUNC_DIV_SEED.
inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("FUNC_DIV_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    }
    return 12345u;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

inline Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

inline Vec vec3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

}  // namespace funcdiv

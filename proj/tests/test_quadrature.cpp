#include <catch2/catch_amalgamated.hpp>

#include "funcdiv/quadrature.hpp"

using namespace funcdiv;
using namespace funcdiv::quad;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double kSqrt2Pi = std::sqrt(2.0 * M_PI);
}

TEST_CASE("polynomial on a unit interval") {
    auto r = integrate([](const Vec& x) { return x[0] * x[0]; }, Domain::interval(0.0, 1.0));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.value, WithinAbs(1.0 / 3.0, 1e-12));
    REQUIRE(r.error_estimate <= 1e-7 * std::max(1.0, std::abs(r.value)));
}

TEST_CASE("gaussian mass in one dimension") {
    auto f = [](const Vec& x) { return std::exp(-0.5 * x[0] * x[0]); };
    auto r = integrate(f, Domain::interval(-12.0, 12.0));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.value, WithinAbs(kSqrt2Pi, 1e-8));
}

TEST_CASE("anisotropic gaussian mass in two dimensions") {
    auto f = [](const Vec& x) { return std::exp(-(x[0] * x[0] + 2.0 * x[1] * x[1])); };
    Vec lo(2), hi(2);
    lo << -7.0, -5.0;
    hi << 7.0, 5.0;
    auto r = integrate(f, Domain::box(lo, hi));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.value, WithinRel(M_PI / std::sqrt(2.0), 1e-9));
}

TEST_CASE("radial domains reproduce areas and volumes") {
    auto one = [](const Vec&) { return 1.0; };
    auto disc = integrate(one, Domain::ball(2, 1.0));
    REQUIRE(disc.converged);
    REQUIRE_THAT(disc.value, WithinRel(M_PI, 1e-9));

    auto ball3 = integrate(one, Domain::ball(3, 1.0));
    REQUIRE(ball3.converged);
    REQUIRE_THAT(ball3.value, WithinRel(4.0 * M_PI / 3.0, 1e-7));

    // ellipse semi-axes (2,1) described by its radial function
    auto rho = [](const Vec& u) {
        return 1.0 / std::sqrt(u[0] * u[0] / 4.0 + u[1] * u[1]);
    };
    auto ell = integrate(one, Domain::radial(2, rho));
    REQUIRE(ell.converged);
    REQUIRE_THAT(ell.value, WithinRel(2.0 * M_PI, 1e-8));
}

TEST_CASE("periodic integrand") {
    auto r = integrate([](const Vec& x) { return std::cos(x[0]) * std::cos(x[0]); },
                       Domain::interval(0.0, 2.0 * M_PI));
    REQUIRE(r.converged);
    REQUIRE_THAT(r.value, WithinAbs(M_PI, 1e-10));
}

TEST_CASE("integrable logarithmic endpoint singularity") {
    auto f = [](const Vec& x) { return -std::log(1.0 - x[0] * x[0]); };
    QuadOptions opt;
    opt.tol = 1e-6;
    auto r = integrate(f, Domain::interval(-1.0, 1.0), opt);
    REQUIRE(r.converged);
    REQUIRE_THAT(r.value, WithinRel(4.0 - 4.0 * std::log(2.0), 1e-6));
}

TEST_CASE("divergent integrand is flagged, never silently returned") {
    auto f = [](const Vec& x) { return 1.0 / std::abs(x[0]); };
    QuadOptions opt;
    opt.max_evals = 200000;
    auto r = integrate(f, Domain::interval(0.0, 1.0), opt);
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.sup_seen > 1e6);
}

TEST_CASE("doubling the depth stays within the reported error") {
    auto f = [](const Vec& x) { return std::cos(3.0 * x[0]) * std::exp(x[0]); };
    QuadOptions shallow;
    shallow.tol = 1e-6;
    shallow.max_depth = 10;
    auto a = integrate(f, Domain::interval(0.0, 3.0), shallow);
    REQUIRE(a.converged);
    QuadOptions deep = shallow;
    deep.max_depth = 20;
    deep.tol = 1e-12;
    auto b = integrate(f, Domain::interval(0.0, 3.0), deep);
    REQUIRE(std::abs(a.value - b.value) <= 2.0 * std::max(a.error_estimate, 1e-15));
}

TEST_CASE("gauss-hermite moments") {
    REQUIRE_THAT(integrate_gaussian([](const Vec&) { return 1.0; }, 1, 32), WithinAbs(1.0, 1e-13));
    REQUIRE_THAT(integrate_gaussian([](const Vec& x) { return x[0] * x[0]; }, 1, 32),
                 WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(integrate_gaussian([](const Vec& x) { return std::pow(x[0], 4); }, 1, 32),
                 WithinAbs(3.0, 1e-11));
    // order 5 integrates degree 9 exactly: E x^8 = 105
    REQUIRE_THAT(integrate_gaussian([](const Vec& x) { return std::pow(x[0], 8); }, 1, 5),
                 WithinRel(105.0, 1e-12));
    auto sq = [](const Vec& x) {
        const double s = x[0] * x[0] + x[1] * x[1];
        return s * s;
    };
    REQUIRE_THAT(integrate_gaussian(sq, 2, 32), WithinRel(8.0, 1e-12));
}

TEST_CASE("gauss-hermite orders 32 and 48 agree on smooth integrands") {
    auto g = [](const Vec& x) { return std::cos(1.3 * x[0]) * std::exp(-0.2 * x[0] * x[0]); };
    const double a = integrate_gaussian(g, 1, 32);
    const double b = integrate_gaussian(g, 1, 48);
    REQUIRE_THAT(a, WithinAbs(b, 1e-10));
}

TEST_CASE("monte carlo oracle approximates a smooth integral") {
    const double mc = mc_integrate_box([](const Vec& x) { return x[0] * x[0]; }, vec1(0.0),
                                       vec1(1.0), 1000000, default_seed());
    REQUIRE_THAT(mc, WithinAbs(1.0 / 3.0, 3e-3));
}

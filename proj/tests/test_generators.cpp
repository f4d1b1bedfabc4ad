#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "funcdiv/generator.hpp"

using namespace funcdiv;

TEST_CASE("builtin families evaluate") {
    auto p = make_power(0.3);
    CHECK(p(8.0) == Catch::Approx(std::pow(8.0, 0.3)).epsilon(1e-14));
    CHECK(p.shape == Shape::Concave);

    auto sq = make_power(2.0);
    CHECK(sq(3.0) == Catch::Approx(9.0));
    CHECK(sq.shape == Shape::Convex);

    auto kl = make_tlogt();
    CHECK(kl(std::exp(1.0)) == Catch::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(kl.shape == Shape::Convex);

    auto nl = make_neglog();
    CHECK(nl(std::exp(2.0)) == Catch::Approx(-2.0).epsilon(1e-14));

    CHECK(make_power(1.0).linear);
    CHECK(make_power(0.0).linear);
    CHECK_FALSE(make_power(0.5).linear);
}

TEST_CASE("adjoint is the map t f(1/t) and an involution") {
    std::mt19937_64 rng(default_seed());
    std::uniform_real_distribution<double> uexp(-3.0, 3.0);

    const Generator gens[] = {make_power(0.3), make_power(2.0), make_power(-1.0),
                              make_tlogt(), make_neglog(),
                              make_custom("coshgen", [](double t) { return std::cosh(t) - 1.0; })};
    for (const auto& g : gens) {
        auto a = adjoint(g);
        auto aa = adjoint(a);
        for (int k = 0; k < 50; ++k) {
            const double t = std::pow(10.0, uexp(rng));
            const double want = t * g(1.0 / t);
            CHECK(a(t) == Catch::Approx(want).epsilon(1e-12).margin(1e-14));
            CHECK(aa(t) == Catch::Approx(g(t)).epsilon(1e-12).margin(1e-14));
        }
        CHECK(a.shape == g.shape);
    }
}

TEST_CASE("adjoint of power maps exponent to its reflection") {
    auto a = adjoint(make_power(0.3));
    REQUIRE(a.family == GenFamily::Power);
    CHECK(a.lambda == Catch::Approx(0.7));
    CHECK(a(2.0) == Catch::Approx(std::pow(2.0, 0.7)).epsilon(1e-14));

    CHECK(adjoint(make_tlogt()).family == GenFamily::NegLog);
    CHECK(adjoint(make_neglog()).family == GenFamily::TLogT);
}

TEST_CASE("zero limits per family") {
    CHECK(make_power(0.3).f_at_zero == 0.0);
    CHECK(make_power(0.3).fstar_at_zero == 0.0);
    CHECK(make_power(0.0).f_at_zero == 1.0);
    CHECK(make_power(1.0).fstar_at_zero == 1.0);
    CHECK(make_power(-1.0).f_at_zero == kInf);
    CHECK(make_power(2.0).fstar_at_zero == kInf);
    CHECK(make_tlogt().f_at_zero == 0.0);
    CHECK(make_tlogt().fstar_at_zero == kInf);
    CHECK(make_neglog().f_at_zero == kInf);
    CHECK(make_neglog().fstar_at_zero == 0.0);

    auto g = make_custom("expgen", [](double t) { return std::exp(-t); });
    CHECK(g.f_at_zero == Catch::Approx(1.0).margin(1e-4));
    CHECK(g.fstar_at_zero == Catch::Approx(0.0).margin(1e-4));
}

TEST_CASE("extended evaluation applies zero-limit convention") {
    auto nl = make_neglog();
    CHECK(eval_extended(nl, 0.0) == kInf);
    CHECK(eval_extended(make_tlogt(), 0.0) == 0.0);
    CHECK(eval_extended(nl, 2.0) == Catch::Approx(-std::log(2.0)));
}

TEST_CASE("custom generator shape detection") {
    auto cvx = make_custom("coshgen", [](double t) { return std::cosh(t - 1.0); });
    CHECK(cvx.shape == Shape::Convex);

    auto ccv = make_custom("rootgen", [](double t) { return std::sqrt(t); });
    CHECK(ccv.shape == Shape::Concave);

    auto lin = make_custom("affine", [](double t) { return 3.0 * t - 2.0; });
    CHECK(lin.linear);

    CHECK_THROWS_AS(make_custom("wobble", [](double t) { return std::sin(3.0 * std::log(t)); }),
                    ConfigError);
}

TEST_CASE("builtin lookup by name") {
    CHECK(builtin("power", 2.0)(4.0) == Catch::Approx(16.0));
    CHECK(builtin("tlogt").family == GenFamily::TLogT);
    CHECK(builtin("neglog").family == GenFamily::NegLog);
    CHECK_THROWS_AS(builtin("nope"), ConfigError);
}

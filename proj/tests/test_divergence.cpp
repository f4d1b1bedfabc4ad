#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "funcdiv/divergence.hpp"

using namespace funcdiv;

namespace {
const double kPi = M_PI;
const double kSqrtPi = std::sqrt(M_PI);

quad::Domain hull(const quad::Domain& a, const quad::Domain& b) {
    return quad::Domain::box(a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi));
}
}  // namespace

TEST_CASE("gaussian closed forms match quadrature") {
    Mat A(2, 2);
    A << 1.0, 0.0, 0.0, 2.0;
    const double C = 2.0;
    auto fn = make_gaussian(A, C);
    quad::QuadOptions tight;
    tight.tol = 1e-9;

    CHECK(integral_of(fn, tight).value ==
          Catch::Approx(gauss::integral(A, C)).epsilon(1e-8));
    CHECK(gauss::ratio(A, C) == Catch::Approx(2.0));

    for (const Generator& g :
         {make_tlogt(), make_neglog(), make_power(0.3), make_power(2.0)}) {
        auto r = df_log_concave(g, fn, tight);
        CHECK(r.converged);
        CHECK(r.evaluations > 0);
        CHECK(r.value == Catch::Approx(gauss::df(g, A, C)).epsilon(1e-7));
    }

    CHECK(kl_divergence(fn, tight).value ==
          Catch::Approx(2.0 * std::log(2.0) * gauss::integral(A, C)).epsilon(1e-8));
    CHECK(entropy(fn, tight).value ==
          Catch::Approx(gauss::entropy(A, C)).epsilon(1e-8));

    auto polar = polar_dual(fn);
    CHECK(integral_of(polar.dual, tight).value ==
          Catch::Approx(gauss::polar_integral(A, C)).epsilon(1e-7));
}

TEST_CASE("surface area ladder on a one-dimensional gaussian") {
    auto fn = make_gaussian_iso(1, 1.0, 1.0);  // exp(-x^2), ratio = 2
    CHECK(log_density_ratio(fn.effective_potential(), vec1(0.7)) ==
          Catch::Approx(std::log(2.0)).epsilon(1e-12));

    CHECK(integral_of(fn).value == Catch::Approx(kSqrtPi).epsilon(1e-9));
    CHECK(affine_surface_area(fn, 0.0).value == Catch::Approx(kSqrtPi).epsilon(1e-9));
    for (double lam : {0.05, 0.2, 0.5, 1.0}) {
        CHECK(affine_surface_area(fn, lam).value ==
              Catch::Approx(std::pow(2.0, lam) * kSqrtPi).epsilon(1e-8));
    }
    CHECK(affine_surface_area(fn, 1.0).value ==
          Catch::Approx(std::sqrt(4.0 * kPi)).epsilon(1e-8));

    CHECK(kl_divergence(fn).value ==
          Catch::Approx(2.0 * kSqrtPi * std::log(2.0)).epsilon(1e-9));
    CHECK(log_divergence(fn).value ==
          Catch::Approx(kSqrtPi * std::log(2.0)).epsilon(1e-9));
    CHECK(omega(fn) == Catch::Approx(2.0).epsilon(1e-7));

    auto half = make_gaussian_iso(1, 0.5, 1.0);  // self-dual, ratio = 1
    CHECK(omega(half) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("omega ladder brackets omega and is monotone") {
    auto fn = make_quartic_potential(1.0, 1);
    const double lams[] = {-0.2, -0.1, -0.05, 0.05, 0.1, 0.2};
    double prev = -kInf;
    for (double lam : lams) {
        const double v = omega_ladder(fn, lam);
        CHECK(v >= prev - 1e-10);
        prev = v;
    }
    const double om = omega(fn);
    CHECK(om >= omega_ladder(fn, -0.05) - 1e-9);
    CHECK(om <= omega_ladder(fn, 0.05) + 1e-9);
}

TEST_CASE("ratio extremes: gaussian closed form and reciprocal consistency") {
    Mat A(2, 2);
    A << 1.0, 0.0, 0.0, 2.0;
    auto fn = make_gaussian(A, 1.0);  // constant ratio 2^2 det A = 8
    CHECK(as_extreme(fn, +1) == Catch::Approx(8.0).epsilon(1e-9));
    CHECK(as_extreme(fn, -1) == Catch::Approx(0.125).epsilon(1e-9));

    auto ch = make_cosh_potential(1);  // bimodal ratio, interior maxima
    const double up = as_extreme(ch, +1);
    const double dn = as_extreme(ch, -1);
    CHECK(up > 1.49);
    CHECK(up < 1.53);
    CHECK(up * dn == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("log divergence decomposes through entropy and curvature") {
    // int Q log(P/Q) = -2 Ent(phi) - n int phi + int phi log det Hess psi
    auto check_identity = [](const LogConcaveFn& fn, double tol) {
        const ScalarField psi = fn.effective_potential();
        const auto dom = integration_domain(fn);
        const double curv =
            quad::integrate(
                [&](const Vec& x) {
                    return std::exp(-psi(x)) * std::log(psi.hess(x).determinant());
                },
                dom)
                .value;
        const double lhs = log_divergence(fn).value;
        const double rhs = -2.0 * entropy(fn).value -
                           fn.dim() * integral_of(fn).value + curv;
        CHECK(lhs == Catch::Approx(rhs).epsilon(tol));
    };
    Mat A(2, 2);
    A << 1.0, 0.0, 0.0, 2.0;
    check_identity(make_gaussian(A, 2.0), 1e-6);
    check_identity(make_cosh_potential(1), 1e-6);
}

TEST_CASE("density pairs and the adjoint swap") {
    Mat A(2, 2);
    A << 1.0, 0.0, 0.0, 2.0;
    auto fn = make_gaussian(A, 2.0);
    auto pair = density_pair(fn);

    for (const Generator& g : {make_power(0.3), make_tlogt()}) {
        auto direct = df_log_concave(g, fn);
        auto via_pair = df_pair(g, pair);
        CHECK(via_pair.value == Catch::Approx(direct.value).epsilon(1e-9));

        DensityPair swapped{pair.q, pair.p, pair.domain};
        auto swapped_r = df_pair(adjoint(g), swapped);
        CHECK(swapped_r.value == Catch::Approx(via_pair.value).epsilon(1e-10));
    }
}

TEST_CASE("zero-density conventions in a raw pair") {
    DensityPair pr;
    pr.p = [](const Vec&) { return 1.0; };
    pr.q = [](const Vec& x) { return x(0) < 0.5 ? 0.0 : 1.0; };
    pr.domain = quad::Domain::interval(0.0, 1.0);

    // f* (0) = 0 for the 0.3-power, so the q = 0 half contributes nothing
    auto finite_r = df_pair(make_power(0.3), pr);
    CHECK(finite_r.value == Catch::Approx(0.5).margin(1e-9));

    // f*(0) = +inf for t log t, so the q = 0 half blows up
    auto inf_r = df_pair(make_tlogt(), pr);
    CHECK(inf_r.infinite);
    CHECK_FALSE(inf_r.converged);
}

TEST_CASE("lattice combinations make divergence a valuation") {
    auto f1 = make_gaussian_iso(1, 1.0, 1.0);  // narrower, smaller phi
    auto f2 = make_gaussian_iso(1, 0.5, 1.0);  // wider; equal to f1 only at 0
    const auto dom = hull(integration_domain(f1), integration_domain(f2));

    auto vee = pointwise_max(f1, f2);   // = f2 pointwise
    auto wedge = pointwise_min(f1, f2); // = f1 pointwise

    for (const Generator& g : {make_tlogt(), make_power(0.3)}) {
        const double dv = df_log_concave(g, vee, {}, &dom).value;
        const double dw = df_log_concave(g, wedge, {}, &dom).value;
        const double d1 = df_log_concave(g, f1, {}, &dom).value;
        const double d2 = df_log_concave(g, f2, {}, &dom).value;
        CHECK(dv + dw == Catch::Approx(d1 + d2).margin(1e-10));
        CHECK(dv == Catch::Approx(d2).epsilon(1e-13));
        CHECK(dw == Catch::Approx(d1).epsilon(1e-13));
    }

    // genuinely crossing pair: branches swap at |x| ~ 0.668
    auto f3 = make_gaussian_iso(1, 0.5, 0.8);
    const auto dom3 = hull(integration_domain(f1), integration_domain(f3));
    auto vee3 = pointwise_max(f1, f3);
    auto wedge3 = pointwise_min(f1, f3);
    const Generator g = make_tlogt();
    const double lhs = df_log_concave(g, vee3, {}, &dom3).value +
                       df_log_concave(g, wedge3, {}, &dom3).value;
    const double rhs = df_log_concave(g, f1, {}, &dom3).value +
                       df_log_concave(g, f3, {}, &dom3).value;
    CHECK(lhs == Catch::Approx(rhs).margin(1e-6));

    LogConcaveFn bounded;
    bounded.potential = make_field(1, [](const Vec& x) { return x.squaredNorm(); });
    bounded.support = Support::ball(1.0);
    CHECK_THROWS_AS(pointwise_max(f1, bounded), NumericError);
}

TEST_CASE("unit concavity ball divergences hit their closed forms") {
    auto ball = make_s_ball(1.0, 1);

    auto d_one = df_s_concave(make_power(0.0), ball);
    CHECK(d_one.converged);
    CHECK(d_one.value == Catch::Approx(8.0 / 3.0).epsilon(1e-5));

    auto d_id = df_s_concave(make_power(1.0), ball);
    CHECK(d_id.value == Catch::Approx(1.0 + kPi / 2.0).epsilon(1e-5));

    auto d_sq = df_s_concave(make_power(2.0), ball);
    CHECK(d_sq.value == Catch::Approx(35.0 * kPi / 64.0 + 5.0 / 3.0).epsilon(1e-5));

    // mass identity: D_1 = (1 + n s) int phi when phi decays at the boundary
    const double mass = integral_of(ball).value;
    CHECK(mass == Catch::Approx(4.0 / 3.0).epsilon(1e-8));
    CHECK(d_one.value == Catch::Approx(2.0 * mass).epsilon(1e-5));
}

TEST_CASE("half concavity ball divergences hit their closed forms") {
    auto ball = make_s_ball(0.5, 1);

    auto d_id = df_s_concave(make_power(1.0), ball);
    CHECK(d_id.value == Catch::Approx(3.0 * kPi / 4.0 + 2.0).epsilon(1e-5));

    auto d_one = df_s_concave(make_power(0.0), ball);
    CHECK(d_one.value == Catch::Approx(8.0 / 5.0).epsilon(1e-5));

    const double mass = integral_of(ball).value;
    CHECK(mass == Catch::Approx(16.0 / 15.0).epsilon(1e-8));
    CHECK(d_one.value == Catch::Approx(1.5 * mass).epsilon(1e-5));
}

TEST_CASE("duality across the s-transform") {
    for (double s : {1.0, 0.5}) {
        auto ball = make_s_ball(s, 1);
        auto dual = s_dual(ball).dual;

        auto lhs = df_s_concave(make_power(0.0), dual);
        auto rhs = df_s_concave(make_power(1.0), ball);
        INFO("s = " << s);
        CHECK(lhs.converged);
        CHECK(lhs.value == Catch::Approx(rhs.value).epsilon(1e-4));

        const double closed = s == 1.0 ? 1.0 + kPi / 2.0 : 3.0 * kPi / 4.0 + 2.0;
        CHECK(lhs.value == Catch::Approx(closed).epsilon(1e-4));
        CHECK(rhs.value == Catch::Approx(closed).epsilon(1e-4));
    }
}

TEST_CASE("squared-ratio duality carries the edge singularity") {
    auto ball = make_s_ball(1.0, 1);
    const double closed = 1328.0 / 315.0;

    // f = t^2 adjoint is 1/t, which lands on the smooth primal side
    auto primal = df_s_concave(make_power(-1.0), ball);
    CHECK(primal.value == Catch::Approx(closed).epsilon(1e-5));

    // direct dual side integrand behaves like 1/sqrt(1-y^2): the shrink fit
    // absorbs the half-power tail but keeps a larger cubic-order residue
    auto dual = df_s_concave(make_power(2.0), s_dual(ball).dual);
    CHECK(dual.converged);
    CHECK(dual.value == Catch::Approx(closed).epsilon(5e-3));
    CHECK(dual.note.find("extrapolated") != std::string::npos);
}

TEST_CASE("half concavity squared generator diverges") {
    auto ball = make_s_ball(0.5, 1);
    auto r = df_s_concave(make_power(2.0), ball);
    CHECK(r.infinite);
    CHECK_FALSE(r.converged);
    CHECK(r.value == kInf);
    CHECK(r.note.find("contract") != std::string::npos);
}

TEST_CASE("small-s approximations converge to the log concave divergence") {
    auto lc = make_gaussian_iso(1, 1.0, 1.0);
    const double target = df_log_concave(make_power(1.0), lc).value;  // 2 sqrt(pi)
    CHECK(target == Catch::Approx(2.0 * kSqrtPi).epsilon(1e-8));

    double prev_err = kInf;
    for (double s : {0.2, 0.1, 0.05}) {
        auto fs = s_approximation(lc, s);
        const double v = df_s_concave(make_power(1.0), fs).value;
        const double err = std::abs(v - target);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.05);
}

TEST_CASE("affine changes of variables leave divergences fixed") {
    Mat A(2, 2);
    A << 1.0, 0.0, 0.0, 2.0;
    auto fn = make_gaussian(A, 2.0);
    Mat shear(2, 2);
    shear << 1.0, 0.5, 0.0, 1.0;  // det 1
    auto sheared = compose_linear(fn, shear);
    const Generator g = make_tlogt();
    CHECK(df_log_concave(g, sheared).value ==
          Catch::Approx(df_log_concave(g, fn).value).epsilon(1e-4));

    auto ch = make_cosh_potential(2);
    Mat rr(2, 2);
    rr << 0.6, 0.8, 0.8, -0.6;  // rotation-reflection, det -1
    auto moved = compose_linear(ch, rr);
    CHECK(df_log_concave(g, moved).value ==
          Catch::Approx(df_log_concave(g, ch).value).epsilon(1e-4));
}

TEST_CASE("divergent ladder exponents are reported infinite") {
    auto fn = make_quartic_potential(1.0, 1);
    quad::QuadOptions opt;
    opt.max_evals = 50'000;
    auto r = affine_surface_area(fn, -3.0, opt);
    CHECK(r.infinite);
    CHECK(r.value == kInf);
}

TEST_CASE("constant density over a box integrates to zero entropy") {
    auto r = quad::integrate(
        [](const Vec&) { return 1.0 * std::log(1.0); },
        quad::Domain::interval(0.0, 1.0));
    CHECK(r.value == Catch::Approx(0.0).margin(1e-15));
}

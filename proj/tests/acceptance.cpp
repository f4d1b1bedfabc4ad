// End-to-end acceptance gate: one line per criterion, exit 0 iff all pass.
// Each criterion re-runs its checks from scratch at library defaults; nothing
// here depends on the scenario runner or any config file.

#include <funcdiv/scenario.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace funcdiv;

namespace {

struct Gate {
    bool pass = true;
    std::size_t checks = 0;
    std::string note;

    // Absorb a report; optionally also require |margin| <= eq_tol * scale
    // (the equality cases several criteria pin down).
    void take(const CheckReport& r, double eq_tol = -1.0) {
        ++checks;
        bool ok = r.pass;
        if (ok && eq_tol >= 0.0) {
            const double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
            ok = std::abs(r.margin) <= eq_tol * scale;
        }
        if (!ok && note.empty())
            note = r.check_id + " " + r.subject + " margin=" + detail::fmt(r.margin);
        pass = pass && ok;
    }

    void require(bool ok, const std::string& why) {
        ++checks;
        if (!ok && note.empty()) note = why;
        pass = pass && ok;
    }
};

Mat mat1(double a) {
    Mat m(1, 1);
    m << a;
    return m;
}

Mat diag2(double a, double b) {
    Mat m(2, 2);
    m << a, 0.0, 0.0, b;
    return m;
}

LogConcaveFn aniso_gaussian() { return make_gaussian(diag2(1.0, 2.0)); }

LogConcaveFn std_gaussian() { return make_gaussian(mat1(0.5)); }

std::vector<Generator> all_generators() {
    return {make_tlogt(),     make_neglog(),    make_power(2.0), make_power(0.3),
            make_power(0.5),  make_power(0.0),  make_power(1.0)};
}

// 1. numeric divergences of gaussians against their closed forms
Gate closed_forms() {
    Gate g;
    const std::vector<Generator> gens = {make_tlogt(), make_neglog(),
                                         make_power(0.3), make_power(2.0)};
    for (double C : {1.0, 2.0}) {
        for (double a : {0.5, 1.0}) g.take(check_gaussian_closed_form(mat1(a), C, gens));
        for (const Mat& A : {diag2(0.5, 0.5), diag2(1.0, 1.0), diag2(1.0, 2.0)})
            g.take(check_gaussian_closed_form(A, C, gens));
    }
    return g;
}

// 2. polarity swaps the generator for its adjoint
Gate duality() {
    Gate g;
    const Generator p03 = make_power(0.3), sq = make_power(2.0);
    const std::vector<LogConcaveFn> slow_tail = {make_cosh_potential(),
                                                 make_quartic_potential(1.0)};
    for (const auto& fn : slow_tail) {
        g.take(check_duality(p03, fn));
        // the square generator has no finite value on these tails: the
        // identity survives as infinity on both sides, and the report must
        // flag the blow-up rather than produce numbers
        const CheckReport r = check_duality(sq, fn);
        g.require(std::isinf(r.lhs) && std::isinf(r.rhs) && !r.pass,
                  "expected a flagged blow-up for " + fn.name);
    }
    g.take(check_duality(p03, aniso_gaussian()));
    g.take(check_duality(sq, aniso_gaussian()));
    for (double lambda : {0.3, 0.7}) {
        g.take(check_as_duality(lambda, make_cosh_potential()));
        g.take(check_as_duality(lambda, make_quartic_potential(1.0)));
        g.take(check_as_duality(lambda, aniso_gaussian()));
    }
    return g;
}

// 3. the s-deformed conjugate: duality plus the generator-free identity
Gate s_duality() {
    Gate g;
    for (double s : {1.0, 0.5}) {
        g.take(check_duality(make_power(2.0), make_s_ball(s)));
        g.take(check_s_identity(make_s_ball(s)));
    }
    return g;
}

// 4. convexity bounds with equality at gaussians and linear generators
Gate jensen() {
    Gate g;
    const auto gens = all_generators();
    for (const auto& fn :
         {std_gaussian(), aniso_gaussian(), make_cosh_potential(),
          make_quartic_potential(1.0)}) {
        const bool equality_case = fn.is_gaussian;
        for (const auto& gen : gens)
            g.take(check_jensen_bound(gen, fn),
                   equality_case || gen.linear ? 1e-6 : -1.0);
    }
    for (double s : {1.0, 0.5}) {
        for (const auto& gen : gens) {
            if (s == 0.5 && gen.name == "power(2.000000)")
                continue;  // left side is infinite; bound holds trivially
            g.take(check_jensen_bound(gen, make_s_ball(s)), gen.linear ? 1e-6 : -1.0);
        }
    }
    return g;
}

// 5. the relative-entropy bound, with its built-in raw-density cross-check
Gate kl_bound() {
    Gate g;
    const CheckReport std_case = check_kl_bound(std_gaussian(), false);
    g.take(std_case, 1e-6);
    g.require(std::abs(std_case.lhs) <= 1e-6 && std::abs(std_case.rhs) <= 1e-6,
              "standard gaussian should give 0 = 0");
    g.take(check_kl_bound(aniso_gaussian(), false), 1e-6);  // nonzero equality
    g.take(check_kl_bound(aniso_gaussian(), true), 1e-6);
    g.take(check_kl_bound(make_cosh_potential(), false));
    g.take(check_kl_bound(make_quartic_potential(1.0), false));
    g.take(check_kl_bound(make_quartic_potential(1.0), true));
    return g;
}

// 6. surface-area monotonicity, all clauses, plus the powered ladder
Gate monotonicity() {
    Gate g;
    for (const auto& fn :
         {std_gaussian(), make_cosh_potential(), make_quartic_potential(1.0)}) {
        for (int clause : {1, 2, 3}) g.take(check_monotonicity(clause, fn));
        g.take(check_ladder_monotone(fn));
    }
    return g;
}

// 7. the entropy invariant: bracketing ladder and the product bound
Gate omega() {
    Gate g;
    for (const auto& fn :
         {std_gaussian(), make_cosh_potential(), make_quartic_potential(1.0)})
        g.take(check_omega_ladder(fn));
    g.take(check_omega_product(std_gaussian()), 1e-6);  // product = 1 here
    g.take(check_omega_product(aniso_gaussian()));
    g.take(check_omega_product(make_cosh_potential()));
    g.take(check_omega_product(make_quartic_potential(1.0)));
    return g;
}

// 8. boundary divergences of smooth planar bodies
Gate bodies() {
    Gate g;
    const std::vector<ConvexBody> bodies = {make_ball_body(1.0),
                                            make_ellipsoid_body(2.0, 1.0),
                                            make_lp_body(8.0)};
    for (const auto& K : bodies) {
        const bool ball = K.name == "ball";  // constant ratio: bound is tight
        g.take(check_body_jensen(make_power(2.0), K), ball ? 1e-6 : -1.0);
        g.take(check_body_jensen(make_tlogt(), K), ball ? 1e-6 : -1.0);
        g.take(check_body_duality(make_power(0.3), K));
        g.take(check_body_bridge(make_power(0.5), K));
    }
    g.take(check_curvature_identity(2.0, 1.0, 50));
    return g;
}

// 9. one-dimensional profiles against their subgraph bodies
Gate lift() {
    Gate g;
    for (const auto& fn : {make_s_ball(1.0), make_s_lens()})
        for (double lambda : {0.0, 1.0, 2.0})
            g.take(check_lift_consistency(make_power(lambda), fn));
    return g;
}

// 10. the concavity deformation collapses onto the log-concave value
Gate s_limit() {
    Gate g;
    g.take(check_s_limit(make_power(1.0), std_gaussian()));
    g.take(check_s_limit(make_power(1.0), make_quartic_potential(1.0)));
    return g;
}

// 11. second-order gaussian inequalities for even perturbations
Gate linearization() {
    Gate g;
    const std::uint64_t seed = default_seed();
    const auto fam = linearization_family(seed);
    g.require(fam.size() == 11, "family should hold 1 + 10 members");
    constexpr LinearizationVariant kVariants[4] = {
        LinearizationVariant::HessianDominates, LinearizationVariant::VarianceLower,
        LinearizationVariant::VarianceUpper, LinearizationVariant::ReversePoincare};
    for (const auto& m : fam) {
        for (auto v : kVariants) {
            const CheckReport r = check_linearization(m.eta, m.dim, v, m.label);
            const double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
            g.take(r);
            g.require(r.margin >= -1e-8 * scale,
                      m.label + " margin below -1e-8: " + detail::fmt(r.margin));
            // the two quadrature orders must agree: the report's tolerance is
            // 1e-8 * scale + 10 * disagreement
            g.require(r.tolerance <= 2e-8 * scale,
                      m.label + " order disagreement too large");
        }
    }
    // moment oracle for the quadratic witness <Bx,x>, B = diag(1,2): with
    // b = |B|_F^2 = 5 the five moments reduce to hess2 = 4b, rough = 8b,
    // grad2 = 4 tr(B^2) = 4b, var = 2b -- every variant is an equality
    const double b = 5.0;
    const struct {
        LinearizationVariant v;
        double lhs, rhs;
    } oracle[4] = {
        {LinearizationVariant::HessianDominates, 4.0 * b, 4.0 * b},
        {LinearizationVariant::VarianceLower, 2.0 * b, 2.0 * b},
        {LinearizationVariant::VarianceUpper, 2.0 * b, 2.0 * b},
        {LinearizationVariant::ReversePoincare, 2.0 * b, 2.0 * b},
    };
    for (const auto& o : oracle) {
        const CheckReport r =
            check_linearization(fam[0].eta, fam[0].dim, o.v, fam[0].label);
        const double scale = std::max(1.0, o.lhs);
        g.require(std::abs(r.lhs - o.lhs) <= 1e-8 * scale &&
                      std::abs(r.rhs - o.rhs) <= 1e-8 * scale,
                  std::string("quadratic moments off for ") + to_string(o.v));
        g.require(std::abs(r.margin) <= 1e-8 * scale,
                  std::string("quadratic equality broken for ") + to_string(o.v));
    }
    return g;
}

// 12. invariance under symmetric volume-preserving maps; the lattice identity
Gate invariance_valuation() {
    Gate g;
    const auto maps = invariance_maps(2, default_seed());
    g.require(maps.size() == 3, "three maps per subject");
    const LogConcaveFn poly = make_polynomial_potential(
        2, {{0.5, {2, 0}}, {0.5, {0, 2}}, {0.25, {4, 0}}, {0.25, {0, 4}}});
    g.take(check_invariance(make_tlogt(), aniso_gaussian(), maps));
    g.take(check_invariance(make_power(0.3), aniso_gaussian(), maps));
    g.take(check_invariance(make_tlogt(), poly, maps));
    for (const auto& fn : {std_gaussian(), make_cosh_potential()})
        g.take(check_valuation(make_tlogt(), fn, valuation_partner(fn)));
    return g;
}

}  // namespace

int main() {
    struct Entry {
        const char* what;
        Gate (*run)();
        double budget_s;  // per-criterion wall limit, <= 0 for none
    };
    const std::vector<Entry> entries = {
        {"gaussian closed forms, 10 configurations x 4 generators", closed_forms, 10.0},
        {"duality across polarity, incl. surface-area exponent swap", duality, 0.0},
        {"s-conjugate duality and the generator-free identity", s_duality, 0.0},
        {"convexity bounds, equality at gaussians and linear generators", jensen, 0.0},
        {"relative-entropy bound with raw-density cross-check", kl_bound, 0.0},
        {"surface-area monotonicity, three clauses plus ladder", monotonicity, 0.0},
        {"entropy invariant: bracketing ladder and product bound", omega, 0.0},
        {"body divergences: bounds, duality, bridge, curvature", bodies, 0.0},
        {"profile lifts match their subgraph bodies", lift, 0.0},
        {"concavity deformation converges to the log-concave value", s_limit, 0.0},
        {"second-order gaussian inequalities, 11-member family", linearization, 0.0},
        {"volume-preserving invariance and the lattice identity", invariance_valuation, 0.0},
    };

    int failed = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Gate g = entries[i].run();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        total += dt;
        if (entries[i].budget_s > 0.0 && dt > entries[i].budget_s) {
            g.pass = false;
            if (g.note.empty()) g.note = "over time budget";
        }
        failed += g.pass ? 0 : 1;
        std::printf("criterion %2zu: %s  %s (%zu checks, %.1fs)%s%s\n", i + 1,
                    g.pass ? "PASS" : "FAIL", entries[i].what, g.checks, dt,
                    g.note.empty() ? "" : " -- ", g.note.c_str());
        std::fflush(stdout);
    }
    const bool in_budget = total < 300.0;
    std::printf("acceptance: %zu/%zu criteria passed in %.1fs%s\n",
                entries.size() - failed, entries.size(), total,
                in_budget ? "" : " -- OVER the 300s budget");
    return failed == 0 && in_budget ? 0 : 1;
}

// Walks one log-concave function through the main quantities the library
// computes: masses, divergences under a few generators, the surface-area
// scale, and the entropy invariant omega.

#include <funcdiv/verifier.hpp>

#include <cstdio>

using namespace funcdiv;

int main() {
    const LogConcaveFn fn = make_cosh_potential();
    const auto pair = polar_dual(fn);

    std::printf("subject: %s\n", fn.name.c_str());
    const double mass = integral_of(fn).value;
    const double polar_mass = integral_of(pair.dual).value;
    std::printf("  mass            %.10g\n", mass);
    std::printf("  polar mass      %.10g\n", polar_mass);
    std::printf("  santalo product %.10g  (gaussian bound %.10g)\n",
                mass * polar_mass, 2.0 * M_PI);

    for (const Generator& g :
         {make_tlogt(), make_neglog(), make_power(0.3), make_power(0.7)}) {
        // duality: evaluating on the polar equals swapping f for its adjoint
        std::printf("  D_f  f=%-16s %.10g   on polar %.10g = adjoint %.10g\n",
                    g.name.c_str(), df_log_concave(g, fn).value,
                    df_log_concave(g, pair.dual).value,
                    df_log_concave(adjoint(g), fn).value);
    }

    for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9})
        std::printf("  as_%.1f           %.10g\n", lambda,
                    affine_surface_area(fn, lambda).value);

    const double omega = std::exp(log_divergence(fn).value / mass);
    const double omega_polar =
        std::exp(log_divergence(pair.dual).value / polar_mass);
    std::printf("  omega           %.10g\n", omega);
    std::printf("  omega x dual    %.10g  (<= 1, equality only for gaussians)\n",
                omega * omega_polar);

    // the same pipeline at concavity s, collapsing back as s -> 0
    std::printf("s-deformation of the divergence, f = t^0.3:\n");
    const double base = df_log_concave(make_power(0.3), fn).value;
    for (double s : {0.2, 0.1, 0.05})
        std::printf("  s=%-5.2f          %.10g  (target %.10g)\n", s,
                    df_s_concave(make_power(0.3), s_approximation(fn, s)).value,
                    base);
    return 0;
}

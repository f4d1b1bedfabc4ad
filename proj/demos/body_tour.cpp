// Boundary-integral side of the library: volumes, curvature, the boundary
// divergence of a planar body, and the gaussian lift that connects it to the
// functional side.

#include <funcdiv/verifier.hpp>

#include <cstdio>

using namespace funcdiv;

int main() {
    const ConvexBody K = make_ellipsoid_body(2.0, 1.0);
    const ConvexBody Kp = polar_body(K);

    const double vol = volume(K).value;
    const double vol_polar = volume(Kp).value;
    std::printf("body: %s\n", K.name.c_str());
    std::printf("  |K|        %.10g  (exact %.10g)\n", vol, 2.0 * M_PI);
    std::printf("  |K polar|  %.10g  (exact %.10g)\n", vol_polar, 0.5 * M_PI);

    const Vec x = boundary_point(K, vec2(std::cos(0.9), std::sin(0.9)));
    const auto geom = boundary_geometry(K, x);
    std::printf("  curvature at angle 0.9: %.10g\n", geom.curvature);

    for (const Generator& g : {make_power(0.3), make_tlogt()}) {
        std::printf("  D_f(boundary) f=%-12s %.10g   on polar %.10g = adjoint %.10g\n",
                    g.name.c_str(), df_body(g, K).value, df_body(g, Kp).value,
                    df_body(adjoint(g), K).value);
    }

    // lifting K to exp(-gauge^2/2) matches the boundary divergence up to a
    // dimensional constant
    const Generator g = make_power(0.5);
    const double fn_route = df_log_concave(g, body_to_function(K)).value;
    const double body_route = df_body(g, K).value;
    const double factor = 2.0 * M_PI / (2.0 * M_PI);  // (2 pi)^(n/2) / (n |B^n|), n = 2
    std::printf("  lift ratio  %.10g  (expected %.10g)\n", fn_route / body_route,
                factor);
    return 0;
}

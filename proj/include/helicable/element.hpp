#pragma once

// Reference data for one linear triangle: barycentric gradients, lowest-order
// Whitney edge functions, and the degree-4 six-point quadrature rule.

#include <array>

#include "helicable/error.hpp"
#include "helicable/mesh.hpp"

namespace helicable {

struct QuadraturePoint {
    std::array<double, 3> lambda;
    double weight;  // fraction of the triangle area; weights sum to one
};

/// Six-point symmetric rule, exact for polynomials of degree 4.
inline constexpr std::array<QuadraturePoint, 6> triangle_rule_deg4 = [] {
    constexpr double a1 = 0.445948490915965;
    constexpr double b1 = 1.0 - 2.0 * a1;
    constexpr double w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771;
    constexpr double b2 = 1.0 - 2.0 * a2;
    constexpr double w2 = 0.109951743655322;
    return std::array<QuadraturePoint, 6>{{
        {{a1, a1, b1}, w1},
        {{a1, b1, a1}, w1},
        {{b1, a1, a1}, w1},
        {{a2, a2, b2}, w2},
        {{a2, b2, a2}, w2},
        {{b2, a2, a2}, w2},
    }};
}();

inline constexpr double degenerate_area = 1e-16;  // [m^2]

/// Geometry of one triangle as seen by the element routines. Local edge k
/// joins local nodes k and k+1 (mod 3); edge_sign[k] is +1 when that
/// direction agrees with the global edge orientation.
struct ElementGeometry {
    std::array<Vec2, 3> p;
    std::array<int, 3> edge_sign{1, 1, 1};
    int region = insulation_region;

    [[nodiscard]] double area() const { return 0.5 * signed_area2(p[0], p[1], p[2]); }

    [[nodiscard]] Vec2 point(const std::array<double, 3>& lambda) const
    {
        return lambda[0] * p[0] + lambda[1] * p[1] + lambda[2] * p[2];
    }

    /// Gradients of the barycentric coordinates (constant on the triangle).
    [[nodiscard]] std::array<Vec2, 3> grad_lambda() const
    {
        const double a2 = signed_area2(p[0], p[1], p[2]);
        std::array<Vec2, 3> g;
        for (int i = 0; i < 3; ++i) {
            const Vec2& pj = p[(i + 1) % 3];
            const Vec2& pk = p[(i + 2) % 3];
            g[i] = Vec2(pj.y() - pk.y(), pk.x() - pj.x()) / a2;
        }
        return g;
    }

    /// Signed Whitney function of local edge k at barycentric point lambda.
    [[nodiscard]] Vec2 whitney(int k, const std::array<double, 3>& lambda,
                               const std::array<Vec2, 3>& grad) const
    {
        const int i = k;
        const int j = (k + 1) % 3;
        return edge_sign[k] * (lambda[i] * grad[j] - lambda[j] * grad[i]);
    }

    /// Scalar in-plane curl of the signed Whitney function of edge k.
    [[nodiscard]] double whitney_curl(int k) const { return edge_sign[k] / area(); }
};

inline ElementGeometry element_geometry(const Mesh& mesh, int t)
{
    const auto& tri = mesh.triangles[t];
    ElementGeometry g;
    for (int k = 0; k < 3; ++k)
        g.p[k] = mesh.nodes[tri.nodes[k]];
    g.edge_sign = mesh.triangle_edge_signs[t];
    g.region = tri.region;
    return g;
}

}  // namespace helicable

#pragma once

// Field evaluation, reconstruction in Cartesian coordinates, losses, probes.
//
// A Solution keeps references to the mesh, linear system, twist, materials
// and excitation it was computed from; those must outlive it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helicable/assembly.hpp"
#include "helicable/element.hpp"
#include "helicable/error.hpp"
#include "helicable/helicoid.hpp"
#include "helicable/mesh.hpp"
#include "helicable/spaces.hpp"

namespace helicable {

using Vec3c = Eigen::Vector3cd;

/// Uniform bucket grid over triangle bounding boxes.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh) : mesh_(&mesh)
    {
        if (mesh.triangles.empty())
            return;
        lo_ = hi_ = mesh.nodes[0];
        for (const Vec2& p : mesh.nodes) {
            lo_ = lo_.cwiseMin(p);
            hi_ = hi_.cwiseMax(p);
        }
        const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
        const double cells = std::max(1.0, static_cast<double>(mesh.triangle_count()) / 2.0);
        const double cell = std::sqrt(span.x() * span.y() / cells);
        nx_ = std::clamp(static_cast<int>(span.x() / cell) + 1, 1, 4096);
        ny_ = std::clamp(static_cast<int>(span.y() / cell) + 1, 1, 4096);
        buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            Vec2 a = mesh.nodes[mesh.triangles[t].nodes[0]];
            Vec2 b = a;
            for (int k = 1; k < 3; ++k) {
                a = a.cwiseMin(mesh.nodes[mesh.triangles[t].nodes[k]]);
                b = b.cwiseMax(mesh.nodes[mesh.triangles[t].nodes[k]]);
            }
            const auto [i0, j0] = cell_of(a);
            const auto [i1, j1] = cell_of(b);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
        }
    }

    /// Barycentric coordinates of p in triangle t.
    [[nodiscard]] std::array<double, 3> barycentric(int t, const Vec2& p) const
    {
        const auto& n = mesh_->triangles[t].nodes;
        const Vec2& a = mesh_->nodes[n[0]];
        const Vec2& b = mesh_->nodes[n[1]];
        const Vec2& c = mesh_->nodes[n[2]];
        const double a2 = signed_area2(a, b, c);
        const double l0 = signed_area2(p, b, c) / a2;
        const double l1 = signed_area2(a, p, c) / a2;
        return {l0, l1, 1.0 - l0 - l1};
    }

    /// All triangles containing p (closed), ascending.
    [[nodiscard]] std::vector<int> containing(const Vec2& p, double eps = 1e-10) const
    {
        std::vector<int> out;
        if (buckets_.empty() || !p.allFinite())
            return out;
        const double slack = eps * (hi_ - lo_).norm();
        if (p.x() < lo_.x() - slack || p.y() < lo_.y() - slack || p.x() > hi_.x() + slack ||
            p.y() > hi_.y() + slack)
            return out;
        const auto [i, j] = cell_of(p);
        for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
            const auto l = barycentric(t, p);
            if (l[0] >= -eps && l[1] >= -eps && l[2] >= -eps)
                out.push_back(t);
        }
        return out;
    }

    /// Lowest-index containing triangle, optionally preferring conductors.
    [[nodiscard]] std::optional<int> locate(const Vec2& p, bool prefer_conductor = false) const
    {
        const auto hits = containing(p);
        if (hits.empty())
            return std::nullopt;
        if (prefer_conductor)
            for (int t : hits)
                if (mesh_->triangles[t].region != insulation_region)
                    return t;
        return hits.front();
    }

private:
    [[nodiscard]] std::pair<int, int> cell_of(const Vec2& p) const
    {
        const Vec2 r = (p - lo_).cwiseQuotient((hi_ - lo_).cwiseMax(Vec2::Constant(1e-300)));
        const int i = std::clamp(static_cast<int>(r.x() * nx_), 0, nx_ - 1);
        const int j = std::clamp(static_cast<int>(r.y() * ny_), 0, ny_ - 1);
        return {i, j};
    }

    const Mesh* mesh_;
    Vec2 lo_ = Vec2::Zero();
    Vec2 hi_ = Vec2::Zero();
    int nx_ = 0;
    int ny_ = 0;
    std::vector<std::vector<int>> buckets_;
};

/// Fields in helicoidal components at one point of the cross-section.
struct FieldSample {
    Vec3c a;       // magnetic vector potential [Wb/m]
    Vec3c curl_a;  // curl A in (u, v, w) components [T]
    Vec3c grad_v;  // (0, 0, g_i) in conductor i, zero in insulation [V/m]
    int element = -1;
    int region = insulation_region;
};

class Solution {
public:
    Solution(const Mesh& mesh, const LinearSystem& sys, const TwistMap& twist, const MaterialSpec& materials,
             const Excitation& excitation, Eigen::VectorXcd x)
        : mesh_(&mesh), sys_(&sys), dofs_(&sys.dofs), twist_(&twist), mat_(&materials), exc_(&excitation),
          x_(std::move(x)), locator_(mesh)
    {
        if (x_.size() != sys.dofs.size)
            throw Error("solution vector has " + std::to_string(x_.size()) + " entries, expected " +
                        std::to_string(sys.dofs.size));
        if (sys.dofs.edge_index.size() != mesh.edges.size() || sys.dofs.node_index.size() != mesh.nodes.size())
            throw Error("linear system does not belong to this mesh");
    }

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const DofMap& dofs() const { return *dofs_; }
    [[nodiscard]] const LinearSystem& system() const { return *sys_; }
    [[nodiscard]] const TwistMap& twist() const { return *twist_; }
    [[nodiscard]] const MaterialSpec& materials() const { return *mat_; }
    [[nodiscard]] const Excitation& excitation() const { return *exc_; }
    [[nodiscard]] const Eigen::VectorXcd& coefficients() const { return x_; }
    [[nodiscard]] const PointLocator& locator() const { return locator_; }
    [[nodiscard]] double omega() const { return exc_->omega(); }

    /// dv/dw in conductor i (1-based) [V/m].
    [[nodiscard]] cplx potential_gradient(int conductor) const
    {
        return sys_->potential_gradient(x_, conductor);
    }

    /// Local coefficients in the element dof order e0 e1 e2 n0 n1 n2.
    [[nodiscard]] std::array<cplx, 6> local_coefficients(int t) const
    {
        std::array<cplx, 6> c{};
        for (int k = 0; k < 3; ++k) {
            const int ie = dofs_->edge_index[mesh_->triangle_edges[t][k]];
            const int in = dofs_->node_index[mesh_->triangles[t].nodes[k]];
            c[k] = ie >= 0 ? x_(ie) : cplx(0.0);
            c[3 + k] = in >= 0 ? x_(in) : cplx(0.0);
        }
        return c;
    }

    [[nodiscard]] FieldSample sample(int t, const std::array<double, 3>& lambda) const
    {
        const ElementGeometry geo = element_geometry(*mesh_, t);
        const ElementBasis b = element_basis(geo, lambda);
        const auto c = local_coefficients(t);
        FieldSample s;
        s.a.setZero();
        s.curl_a.setZero();
        s.grad_v.setZero();
        for (int i = 0; i < 6; ++i) {
            s.a += c[i] * b.value[i].cast<cplx>();
            s.curl_a += c[i] * b.curl[i].cast<cplx>();
        }
        s.element = t;
        s.region = geo.region;
        if (s.region != insulation_region)
            s.grad_v.z() = potential_gradient(s.region);
        return s;
    }

private:
    const Mesh* mesh_;
    const LinearSystem* sys_;
    const DofMap* dofs_;
    const TwistMap* twist_;
    const MaterialSpec* mat_;
    const Excitation* exc_;
    Eigen::VectorXcd x_;
    PointLocator locator_;
};

/// Fields at (u, v); throws when the point is outside the mesh.
inline FieldSample eval_field_uvw(const Solution& sol, const Vec2& uv, bool prefer_conductor = false)
{
    const auto t = sol.locator().locate(uv, prefer_conductor);
    if (!t)
        throw Error("point (" + std::to_string(uv.x()) + ", " + std::to_string(uv.y()) +
                    ") is outside the mesh");
    return sol.sample(*t, sol.locator().barycentric(*t, uv));
}

/// Current density sigma_uvw E in helicoidal components.
inline Vec3c current_density_uvw(const Solution& sol, const FieldSample& s, const Vec2& uv)
{
    const RegionMaterial& m = sol.materials().region(s.region);
    if (m.sigma == 0.0)
        return Vec3c::Zero();
    const Mat3 sigma = m.sigma * conductivity_shape(uv.x(), uv.y(), sol.twist().tau());
    const Vec3c e = -(cplx(0.0, sol.omega()) * s.a + s.grad_v);
    return sigma.cast<cplx>() * e;
}

namespace detail {

inline Mat3 inverse_transpose_jacobian(const HelicoidalPoint& p, const TwistMap& twist)
{
    return jacobian_inv_map(p, twist).inverse().transpose();
}

}  // namespace detail

/// Current density [A/m^2] at a Cartesian point. Throws unless the point lies
/// in a conductor.
inline Vec3c reconstruct_J(const Solution& sol, const CartesianPoint& p)
{
    const HelicoidalPoint q = map_to_helicoidal(p, sol.twist());
    const Vec2 uv(q.c0, q.c1);
    const FieldSample s = eval_field_uvw(sol, uv, true);
    if (s.region == insulation_region)
        throw Error("J requested at a point outside every conductor");
    const Mat3 jit = detail::inverse_transpose_jacobian(q, sol.twist());
    const Vec3c e_uvw = -(cplx(0.0, sol.omega()) * s.a + s.grad_v);
    const double sigma = sol.materials().region(s.region).sigma;
    return sigma * (jit.cast<cplx>() * e_uvw);
}

/// Magnetic field [A/m] at a Cartesian point inside the mesh.
inline Vec3c reconstruct_H(const Solution& sol, const CartesianPoint& p)
{
    const HelicoidalPoint q = map_to_helicoidal(p, sol.twist());
    const Vec2 uv(q.c0, q.c1);
    const FieldSample s = eval_field_uvw(sol, uv);
    const Mat3 jac = jacobian_inv_map(q, sol.twist());
    const double nu = sol.materials().region(s.region).nu;
    return nu / jac.determinant() * (jac.cast<cplx>() * s.curl_a);
}

struct LossReport {
    std::vector<double> per_conductor;  // [W/m]
    double total = 0.0;                 // [W/m]
    std::vector<cplx> currents;         // reconstructed conductor currents [A]
};

/// Time-averaged Joule loss per unit length, and the current through each
/// conductor, by quadrature over the conductor elements.
inline LossReport compute_losses(const Solution& sol)
{
    const Mesh& mesh = sol.mesh();
    const int n = mesh.conductor_count;
    LossReport r;
    r.per_conductor.assign(static_cast<std::size_t>(n), 0.0);
    r.currents.assign(static_cast<std::size_t>(n), cplx(0.0));
    const cplx jw(0.0, sol.omega());
    const double tau = sol.twist().tau();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const int region = mesh.triangles[t].region;
        if (region == insulation_region)
            continue;
        const ElementGeometry geo = element_geometry(mesh, t);
        const double area = geo.area();
        const double sigma = sol.materials().region(region).sigma;
        for (const auto& q : triangle_rule_deg4) {
            const FieldSample s = sol.sample(t, q.lambda);
            const Vec2 p = geo.point(q.lambda);
            const Mat3 st = sigma * conductivity_shape(p.x(), p.y(), tau);
            const Vec3c e = -(jw * s.a + s.grad_v);
            const Vec3c j = st.cast<cplx>() * e;
            const double wq = q.weight * area;
            r.per_conductor[region - 1] += 0.5 * wq * e.dot(j).real();
            r.currents[region - 1] += wq * j.z();
        }
    }
    for (double p : r.per_conductor)
        r.total += p;
    return r;
}

/// Loss over a cable of the given axial length [m], from a per-length value.
inline double scale_to_length(double loss_per_length, double length)
{
    if (!(length > 0.0) || !std::isfinite(length))
        throw ConfigError("cable length must be positive and finite");
    return loss_per_length * length;
}

/// Time-averaged magnetic energy per unit length, 1/4 Re(A^H K A) [J/m].
inline double magnetic_energy(const Solution& sol)
{
    const Eigen::VectorXcd& x = sol.coefficients();
    return 0.25 * x.dot(sol.system().stiffness.cast<cplx>() * x).real();
}

struct ProbeSample {
    double s = 0.0;  // distance from the probe start [m]
    CartesianPoint x;
    bool inside = false;
    double abs_j = std::numeric_limits<double>::quiet_NaN();
    double abs_h = std::numeric_limits<double>::quiet_NaN();
};

/// Evenly spaced samples of |J| and |H| along a Cartesian segment. Points
/// outside the mesh are kept with NaN values; |J| is zero in the insulation.
inline std::vector<ProbeSample> line_probe(const Solution& sol, const CartesianPoint& a,
                                           const CartesianPoint& b, int samples)
{
    if (samples < 2)
        throw ConfigError("a line probe needs at least 2 samples");
    if (!a.finite() || !b.finite())
        throw ConfigError("probe end points must be finite");
    const Eigen::Vector3d pa = a.vec();
    const Eigen::Vector3d pb = b.vec();
    const double len = (pb - pa).norm();
    std::vector<ProbeSample> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const double f = static_cast<double>(k) / (samples - 1);
        const Eigen::Vector3d x = pa + f * (pb - pa);
        ProbeSample ps;
        ps.s = f * len;
        ps.x = CartesianPoint(x.x(), x.y(), x.z());
        const HelicoidalPoint q = map_to_helicoidal(ps.x, sol.twist());
        const Vec2 uv(q.c0, q.c1);
        const auto hits = sol.locator().containing(uv);
        if (!hits.empty()) {
            ps.inside = true;
            ps.abs_h = reconstruct_H(sol, ps.x).norm();
            const bool in_conductor = std::any_of(hits.begin(), hits.end(), [&](int t) {
                return sol.mesh().triangles[t].region != insulation_region;
            });
            ps.abs_j = in_conductor ? reconstruct_J(sol, ps.x).norm() : 0.0;
        }
        out.push_back(ps);
    }
    return out;
}

}  // namespace helicable

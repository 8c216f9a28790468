#pragma once

// Element integrals and global assembly of the complex A-v system.
//
// Unknowns per triangle: three signed edge coefficients (A_uv), three nodal
// values (A_w), and in conductor i the constant g_i = dv/dw. With
// J = -sigma (j omega A + g e_w), the weak form is
//
//   [ K + j omega M    C         ] [A]   [ 0           ]
//   [ C^T          -j D / omega  ] [g] = [ j I / omega ]
//
// where the constraint row  -(integral of J . e_w) = -I  has been divided by
// -j omega so the matrix is complex symmetric. A positive current flows
// towards +w. The unknown stored for conductor i is g_i / s_i, i.e. the basis
// field is s_i e_w, with s_i chosen so the constraint diagonal is of the size
// of the curl-curl diagonal.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "helicable/element.hpp"
#include "helicable/error.hpp"
#include "helicable/helicoid.hpp"
#include "helicable/mesh.hpp"
#include "helicable/spaces.hpp"

namespace helicable {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx>;
using SparseMatrixR = Eigen::SparseMatrix<double>;
using TripletC = Eigen::Triplet<cplx>;

inline constexpr double pi = 3.14159265358979323846;

struct Excitation {
    double frequency = 0.0;           // [Hz]
    std::vector<cplx> currents;       // per conductor [A], peak phasors

    [[nodiscard]] double omega() const { return 2.0 * pi * frequency; }
};

/// Real-valued local blocks. The local dof order is e0 e1 e2 n0 n1 n2.
struct ElementMatrices {
    using Mat6 = Eigen::Matrix<double, 6, 6>;
    using Vec6 = Eigen::Matrix<double, 6, 1>;

    Mat6 stiffness = Mat6::Zero();  // curl-curl with nu_uvw
    Mat6 mass = Mat6::Zero();       // sigma_uvw, zero outside conductors
    Vec6 coupling = Vec6::Zero();   // (sigma_uvw e_w, phi_k)
    double constant = 0.0;          // (sigma_uvw e_w, e_w)
    int region = insulation_region;

    [[nodiscard]] Eigen::Matrix<cplx, 6, 6> field_block(double omega) const
    {
        return stiffness.cast<cplx>() + cplx(0.0, omega) * mass.cast<cplx>();
    }
};

/// Basis functions and their curls at one point, as 3-vectors in (u, v, w).
struct ElementBasis {
    std::array<Eigen::Vector3d, 6> value;
    std::array<Eigen::Vector3d, 6> curl;
};

inline ElementBasis element_basis(const ElementGeometry& geo, const std::array<double, 3>& lambda)
{
    const auto grad = geo.grad_lambda();
    ElementBasis b;
    for (int k = 0; k < 3; ++k) {
        const Vec2 w = geo.whitney(k, lambda, grad);
        b.value[k] = Eigen::Vector3d(w.x(), w.y(), 0.0);
        b.curl[k] = Eigen::Vector3d(0.0, 0.0, geo.whitney_curl(k));
    }
    for (int i = 0; i < 3; ++i) {
        b.value[3 + i] = Eigen::Vector3d(0.0, 0.0, lambda[i]);
        b.curl[3 + i] = Eigen::Vector3d(grad[i].y(), -grad[i].x(), 0.0);
    }
    return b;
}

inline ElementMatrices element_matrices(const ElementGeometry& geo, const TwistMap& twist,
                                        const MaterialSpec& mat)
{
    const double area = geo.area();
    if (!(area > degenerate_area))
        throw MeshError("degenerate triangle (area " + std::to_string(area) + ")");

    const RegionMaterial& m = mat.region(geo.region);
    const bool conducting = m.sigma > 0.0;
    const double tau = twist.tau();

    ElementMatrices em;
    em.region = geo.region;
    for (const auto& q : triangle_rule_deg4) {
        const Vec2 p = geo.point(q.lambda);
        const double wq = q.weight * area;
        const ElementBasis b = element_basis(geo, q.lambda);
        const Mat3 nu = m.nu * reluctivity_shape(p.x(), p.y(), tau);
        for (int i = 0; i < 6; ++i) {
            const Eigen::Vector3d nc = nu * b.curl[i];
            for (int j = i; j < 6; ++j)
                em.stiffness(i, j) += wq * b.curl[j].dot(nc);
        }
        if (!conducting)
            continue;
        const Mat3 sigma = m.sigma * conductivity_shape(p.x(), p.y(), tau);
        const Eigen::Vector3d sw = sigma.col(2);
        for (int i = 0; i < 6; ++i) {
            const Eigen::Vector3d sv = sigma * b.value[i];
            for (int j = i; j < 6; ++j)
                em.mass(i, j) += wq * b.value[j].dot(sv);
            em.coupling(i) += wq * b.value[i].dot(sw);
        }
        em.constant += wq * sw.z();
    }
    em.stiffness = em.stiffness.selfadjointView<Eigen::Upper>();
    em.mass = em.mass.selfadjointView<Eigen::Upper>();
    return em;
}

struct LinearSystem {
    SparseMatrixC matrix;       // compressed, complex symmetric
    Eigen::VectorXcd rhs;
    SparseMatrixR stiffness;    // real curl-curl part alone, for energy
    double omega = 0.0;
    DofMap dofs;
    std::vector<double> constant_scale;  // s_i per conductor

    [[nodiscard]] cplx potential_gradient(const Eigen::VectorXcd& x, int conductor) const
    {
        const auto i = static_cast<std::size_t>(conductor - 1);
        return constant_scale.at(i) * x(dofs.constant_index.at(i));
    }

    [[nodiscard]] int size() const { return static_cast<int>(rhs.size()); }
};

namespace detail {

/// Global dof index of each local dof, -1 when constrained.
inline std::array<int, 6> local_to_global(const Mesh& mesh, const DofMap& dofs, int t)
{
    std::array<int, 6> g{};
    for (int k = 0; k < 3; ++k) {
        g[k] = dofs.edge_index[mesh.triangle_edges[t][k]];
        g[3 + k] = dofs.node_index[mesh.triangles[t].nodes[k]];
    }
    return g;
}

template <class T>
inline void canonical_order(std::vector<Eigen::Triplet<T>>& triplets)
{
    std::stable_sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return a.col() != b.col() ? a.col() < b.col() : a.row() < b.row();
    });
}

}  // namespace detail

inline LinearSystem assemble(const Mesh& mesh, const DofMap& dofs, const TwistMap& twist,
                             const MaterialSpec& mat, const Excitation& exc)
{
    const double omega = exc.omega();
    if (!std::isfinite(omega) || omega <= 0.0)
        throw ConfigError("frequency must be positive and finite");
    const int n_cond = mesh.conductor_count;
    if (mat.conductor_count() != n_cond)
        throw ConfigError("material table has " + std::to_string(mat.conductor_count()) +
                          " conductors, mesh has " + std::to_string(n_cond));
    if (static_cast<int>(exc.currents.size()) != n_cond)
        throw ConfigError("expected " + std::to_string(n_cond) + " conductor currents, got " +
                          std::to_string(exc.currents.size()));
    for (const cplx& I : exc.currents)
        if (!std::isfinite(I.real()) || !std::isfinite(I.imag()))
            throw ConfigError("non-finite conductor current");
    if (dofs.conductor_count() != n_cond || dofs.edge_index.size() != mesh.edges.size() ||
        dofs.node_index.size() != mesh.nodes.size())
        throw MeshError("dof map does not belong to this mesh");

    const cplx jw(0.0, omega);
    std::vector<ElementMatrices> elems;
    elems.reserve(static_cast<std::size_t>(mesh.triangle_count()));
    for (int t = 0; t < mesh.triangle_count(); ++t)
        elems.push_back(element_matrices(element_geometry(mesh, t), twist, mat));

    std::vector<double> diag(static_cast<std::size_t>(dofs.size), 0.0);
    std::vector<double> constant(static_cast<std::size_t>(n_cond), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = detail::local_to_global(mesh, dofs, t);
        for (int i = 0; i < 6; ++i)
            if (g[i] >= 0)
                diag[g[i]] += std::abs(elems[t].stiffness(i, i) + jw * elems[t].mass(i, i));
        if (elems[t].region != insulation_region)
            constant[elems[t].region - 1] += elems[t].constant;
    }
    double mean_diag = 0.0;
    int counted = 0;
    for (double v : diag)
        if (v > 0.0) {
            mean_diag += v;
            ++counted;
        }
    mean_diag = counted ? mean_diag / counted : 1.0;
    std::vector<double> scale(static_cast<std::size_t>(n_cond), 1.0);
    for (int i = 0; i < n_cond; ++i)
        if (constant[i] > 0.0)
            scale[i] = std::sqrt(mean_diag * omega / constant[i]);

    std::vector<TripletC> trip;
    std::vector<Eigen::Triplet<double>> trip_k;
    trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 36);
    trip_k.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 36);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const ElementMatrices& em = elems[t];
        const auto g = detail::local_to_global(mesh, dofs, t);
        for (int i = 0; i < 6; ++i) {
            if (g[i] < 0)
                continue;
            for (int j = 0; j < 6; ++j) {
                if (g[j] < 0)
                    continue;
                const cplx v = em.stiffness(i, j) + jw * em.mass(i, j);
                if (v != cplx(0.0))
                    trip.emplace_back(g[i], g[j], v);
                if (em.stiffness(i, j) != 0.0)
                    trip_k.emplace_back(g[i], g[j], em.stiffness(i, j));
            }
        }
        if (em.region == insulation_region)
            continue;
        const int c = dofs.constant_index[em.region - 1];
        const double s = scale[em.region - 1];
        for (int i = 0; i < 6; ++i) {
            if (g[i] < 0 || em.coupling(i) == 0.0)
                continue;
            trip.emplace_back(g[i], c, s * em.coupling(i));
            trip.emplace_back(c, g[i], s * em.coupling(i));
        }
        trip.emplace_back(c, c, s * s * em.constant / jw);
    }

    for (const auto& tr : trip)
        if (!std::isfinite(tr.value().real()) || !std::isfinite(tr.value().imag()))
            throw Error("non-finite coefficient in assembled matrix at (" + std::to_string(tr.row()) +
                        ", " + std::to_string(tr.col()) + ")");

    detail::canonical_order(trip);
    detail::canonical_order(trip_k);

    LinearSystem sys;
    sys.omega = omega;
    sys.dofs = dofs;
    sys.constant_scale = scale;
    sys.matrix.resize(dofs.size, dofs.size);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    sys.stiffness.resize(dofs.size, dofs.size);
    sys.stiffness.setFromTriplets(trip_k.begin(), trip_k.end());
    sys.stiffness.makeCompressed();
    sys.rhs = Eigen::VectorXcd::Zero(dofs.size);
    for (int i = 0; i < n_cond; ++i)
        sys.rhs(dofs.constant_index[i]) = -scale[i] * exc.currents[i] / jw;
    return sys;
}

/// Coordinate-format dump, 1-based, full (not symmetric-packed) storage.
inline void write_matrix_market(std::ostream& out, const SparseMatrixC& a)
{
    out << "%%MatrixMarket matrix coordinate complex general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    char buf[96];
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(a, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", static_cast<int>(it.row()) + 1,
                          static_cast<int>(it.col()) + 1, it.value().real(), it.value().imag());
            out << buf;
        }
}

}  // namespace helicable

#pragma once

// Two-dimensional triangular mesh of the w = 0 cross-section.
//
// Region tag 0 is the insulation, tags 1..N are the conductors. Edges are
// globally oriented from the lower to the higher node index; every triangle
// records, per local edge (k, k+1 mod 3), the global edge id and whether its
// counter-clockwise traversal agrees with that orientation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "helicable/error.hpp"

namespace helicable {

using Vec2 = Eigen::Vector2d;

inline constexpr int insulation_region = 0;

struct Triangle {
    std::array<int, 3> nodes{};
    int region = insulation_region;
};

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Triangle> triangles;
    int conductor_count = 0;

    // Populated by build_edges().
    std::vector<std::array<int, 2>> edges;            // (low, high) node ids
    std::vector<std::array<int, 2>> edge_triangles;   // -1 where absent
    std::vector<std::array<int, 3>> triangle_edges;
    std::vector<std::array<int, 3>> triangle_edge_signs;
    std::vector<char> boundary_edge;
    std::vector<char> boundary_node;

    [[nodiscard]] int node_count() const { return static_cast<int>(nodes.size()); }
    [[nodiscard]] int triangle_count() const { return static_cast<int>(triangles.size()); }
    [[nodiscard]] int edge_count() const { return static_cast<int>(edges.size()); }
    [[nodiscard]] bool has_edges() const { return !edges.empty(); }
};

/// Twice the signed area of the triangle (a, b, c).
inline double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

inline double triangle_area(const Mesh& mesh, int t)
{
    const auto& n = mesh.triangles[static_cast<std::size_t>(t)].nodes;
    return 0.5 * signed_area2(mesh.nodes[n[0]], mesh.nodes[n[1]], mesh.nodes[n[2]]);
}

inline double region_area(const Mesh& mesh, int region)
{
    double a = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (mesh.triangles[t].region == region)
            a += triangle_area(mesh, t);
    return a;
}

inline double total_area(const Mesh& mesh)
{
    double a = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        a += triangle_area(mesh, t);
    return a;
}

/// Derive the oriented edge set, per-triangle incidence and boundary flags.
/// Throws MeshError on an edge shared by more than two triangles.
inline Mesh build_edges(Mesh mesh)
{
    const auto key = [](int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    };

    mesh.edges.clear();
    mesh.edge_triangles.clear();
    mesh.triangle_edges.assign(mesh.triangles.size(), {});
    mesh.triangle_edge_signs.assign(mesh.triangles.size(), {});

    std::unordered_map<std::uint64_t, int> index;
    index.reserve(mesh.triangles.size() * 2);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& n = mesh.triangles[t].nodes;
        for (int k = 0; k < 3; ++k) {
            const int a = n[k];
            const int b = n[(k + 1) % 3];
            const int lo = std::min(a, b);
            const int hi = std::max(a, b);
            auto [it, inserted] = index.try_emplace(key(lo, hi), mesh.edge_count());
            if (inserted) {
                mesh.edges.push_back({lo, hi});
                mesh.edge_triangles.push_back({t, -1});
            } else {
                auto& et = mesh.edge_triangles[static_cast<std::size_t>(it->second)];
                if (et[1] != -1)
                    throw MeshError("non-manifold edge (" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + ") has more than two triangles");
                et[1] = t;
            }
            mesh.triangle_edges[t][k] = it->second;
            mesh.triangle_edge_signs[t][k] = a < b ? 1 : -1;
        }
    }

    mesh.boundary_edge.assign(mesh.edges.size(), 0);
    mesh.boundary_node.assign(mesh.nodes.size(), 0);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        if (mesh.edge_triangles[e][1] == -1) {
            mesh.boundary_edge[e] = 1;
            mesh.boundary_node[mesh.edges[e][0]] = 1;
            mesh.boundary_node[mesh.edges[e][1]] = 1;
        }
    }
    return mesh;
}

/// Per node: conductor index whose closure contains it, 0 if none.
/// Throws if a node belongs to two conductors.
inline std::vector<int> node_conductor(const Mesh& mesh)
{
    std::vector<int> owner(mesh.nodes.size(), 0);
    for (const auto& tri : mesh.triangles) {
        if (tri.region == insulation_region)
            continue;
        for (int n : tri.nodes) {
            if (owner[n] != 0 && owner[n] != tri.region)
                throw MeshError("conductors " + std::to_string(owner[n]) + " and " +
                                std::to_string(tri.region) + " touch at node " +
                                std::to_string(n));
            owner[n] = tri.region;
        }
    }
    return owner;
}

/// Edges on the boundary of conductor closures (an edge between a conductor
/// triangle and an insulation triangle).
inline bool is_conductor_interface_edge(const Mesh& mesh, int e)
{
    const auto& et = mesh.edge_triangles[e];
    if (et[1] == -1)
        return false;
    const int ra = mesh.triangles[et[0]].region;
    const int rb = mesh.triangles[et[1]].region;
    return ra != rb;
}

/// True if the edge borders at least one conductor triangle.
inline bool touches_conductor(const Mesh& mesh, int e)
{
    for (int t : mesh.edge_triangles[e])
        if (t >= 0 && mesh.triangles[t].region != insulation_region)
            return true;
    return false;
}

namespace detail {

inline void check_edge_connected(const Mesh& mesh, int region)
{
    std::vector<char> seen(mesh.triangles.size(), 0);
    int start = -1;
    int total = 0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.triangles[t].region == region) {
            ++total;
            if (start < 0)
                start = t;
        }
    }
    if (start < 0)
        return;
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    int reached = 0;
    while (!q.empty()) {
        const int t = q.front();
        q.pop();
        ++reached;
        for (int e : mesh.triangle_edges[t]) {
            for (int o : mesh.edge_triangles[e]) {
                if (o >= 0 && !seen[o] && mesh.triangles[o].region == region) {
                    seen[o] = 1;
                    q.push(o);
                }
            }
        }
    }
    if (reached != total)
        throw MeshError("conductor " + std::to_string(region) + " is not edge-connected");
}

inline void check_single_boundary_loop(const Mesh& mesh)
{
    std::vector<std::vector<int>> incident(mesh.nodes.size());
    int boundary_edges = 0;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        if (!mesh.boundary_edge[e])
            continue;
        ++boundary_edges;
        incident[mesh.edges[e][0]].push_back(e);
        incident[mesh.edges[e][1]].push_back(e);
    }
    if (boundary_edges == 0)
        throw MeshError("mesh has no outer boundary");
    int first = -1;
    for (int n = 0; n < mesh.node_count(); ++n) {
        if (incident[n].empty())
            continue;
        if (incident[n].size() != 2)
            throw MeshError("outer boundary is not a simple loop at node " + std::to_string(n));
        if (first < 0)
            first = n;
    }
    // Walk the loop once.
    int walked = 0;
    int node = first;
    int prev_edge = -1;
    do {
        const int e = incident[node][0] == prev_edge ? incident[node][1] : incident[node][0];
        node = mesh.edges[e][0] == node ? mesh.edges[e][1] : mesh.edges[e][0];
        prev_edge = e;
        ++walked;
    } while (node != first && walked <= boundary_edges);
    if (walked != boundary_edges)
        throw MeshError("outer boundary consists of more than one closed loop");
}

}  // namespace detail

/// Checks the structural invariants a solver mesh must satisfy. Expects
/// build_edges() to have run.
inline void validate_mesh(const Mesh& mesh)
{
    if (mesh.triangles.empty())
        throw MeshError("mesh has no triangles");
    if (!mesh.has_edges())
        throw MeshError("mesh edges not built");

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int n : tri.nodes)
            if (n < 0 || n >= mesh.node_count())
                throw MeshError("triangle " + std::to_string(t) + " references missing node");
        if (!(triangle_area(mesh, t) > 0.0))
            throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
        if (tri.region < 0 || tri.region > mesh.conductor_count)
            throw MeshError("triangle " + std::to_string(t) + " has invalid region tag " +
                            std::to_string(tri.region));
    }

    std::vector<int> count(static_cast<std::size_t>(mesh.conductor_count) + 1, 0);
    for (const auto& tri : mesh.triangles)
        ++count[tri.region];
    for (int i = 1; i <= mesh.conductor_count; ++i) {
        if (count[i] == 0)
            throw MeshError("empty region: conductor " + std::to_string(i));
        detail::check_edge_connected(mesh, i);
    }

    const auto owner = node_conductor(mesh);
    for (int n = 0; n < mesh.node_count(); ++n)
        if (owner[n] != 0 && mesh.boundary_node[n])
            throw MeshError("conductor " + std::to_string(owner[n]) +
                            " touches the outer boundary at node " + std::to_string(n));

    detail::check_single_boundary_loop(mesh);

    if (mesh.node_count() - mesh.edge_count() + mesh.triangle_count() != 1)
        throw MeshError("mesh is not a triangulated disk (Euler characteristic != 1)");
}

/// build_edges() followed by validate_mesh().
inline Mesh finalize_mesh(Mesh mesh)
{
    mesh = build_edges(std::move(mesh));
    validate_mesh(mesh);
    return mesh;
}

}  // namespace helicable

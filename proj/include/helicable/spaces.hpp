#pragma once

// Discrete spaces and global numbering.
//
//   in-plane A_uv : lowest-order Whitney edge functions, tree-cotree gauged in
//                   the insulation;
//   A_w           : linear nodal functions, zero on the outer boundary;
//   grad v        : one w-directed constant per conductor.
//
// Gauge graph: the insulation edge graph with every conductor closure
// collapsed to one supernode, and (when in-plane boundary edges are
// constrained) the outer boundary collapsed to the root supernode. The tree
// must reach the conductor supernodes: each conductor contributes one
// constant-potential gradient field to the kernel of the curl-curl operator
// restricted to the insulation.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "helicable/error.hpp"
#include "helicable/mesh.hpp"

namespace helicable {

struct GaugeOptions {
    /// Zero tangential in-plane A on the outer boundary (PEC shield).
    bool constrain_boundary_edges = true;
    /// Visit BFS neighbours in a seeded pseudo-random order instead of by
    /// ascending edge id. Yields a different, equally valid tree.
    std::optional<std::uint64_t> shuffle_seed;
};

/// Insulation edge graph with collapsed supernodes.
struct GaugeGraph {
    std::vector<int> supernode_of_node;  // -1 for nodes not in the graph
    int supernode_count = 0;
    int root = -1;
    std::vector<int> edges;                    // candidate mesh edge ids, ascending
    std::vector<std::array<int, 2>> ends;      // supernode endpoints per candidate
};

struct SpanningTree {
    std::vector<int> tree_edges;  // ascending mesh edge ids
    std::vector<char> in_tree;    // per mesh edge
    int root = -1;                // supernode id of the seed
    int reached = 0;              // non-root supernodes reached
    bool constrain_boundary_edges = true;
};

inline GaugeGraph build_gauge_graph(const Mesh& mesh, bool constrain_boundary_edges)
{
    GaugeGraph g;
    const auto owner = node_conductor(mesh);
    g.supernode_of_node.assign(mesh.nodes.size(), -1);

    int next = mesh.conductor_count;  // 0..N-1 are the conductor supernodes
    int boundary_super = -1;
    if (constrain_boundary_edges)
        boundary_super = next++;

    for (int n = 0; n < mesh.node_count(); ++n) {
        if (owner[n] != 0)
            g.supernode_of_node[n] = owner[n] - 1;
        else if (constrain_boundary_edges && mesh.boundary_node[n])
            g.supernode_of_node[n] = boundary_super;
    }

    for (int e = 0; e < mesh.edge_count(); ++e) {
        if (touches_conductor(mesh, e))
            continue;
        if (constrain_boundary_edges && mesh.boundary_edge[e])
            continue;
        for (int n : mesh.edges[e])
            if (g.supernode_of_node[n] < 0)
                g.supernode_of_node[n] = next++;
        g.edges.push_back(e);
        g.ends.push_back({g.supernode_of_node[mesh.edges[e][0]],
                          g.supernode_of_node[mesh.edges[e][1]]});
    }
    g.supernode_count = next;

    if (constrain_boundary_edges) {
        g.root = boundary_super;
    } else {
        for (int n = 0; n < mesh.node_count(); ++n)
            if (mesh.boundary_node[n]) {
                g.root = g.supernode_of_node[n];
                break;
            }
    }
    if (g.root < 0)
        throw MeshError("gauge graph has no root on the outer boundary");
    return g;
}

/// Breadth-first spanning tree of the gauge graph from the boundary root.
inline SpanningTree build_spanning_tree(const Mesh& mesh, const GaugeOptions& options = {})
{
    const GaugeGraph g = build_gauge_graph(mesh, options.constrain_boundary_edges);

    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(g.supernode_count));
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const auto [a, b] = g.ends[k];
        if (a == b)
            continue;
        adj[a].emplace_back(g.edges[k], b);
        adj[b].emplace_back(g.edges[k], a);
    }
    if (options.shuffle_seed) {
        std::mt19937_64 rng(*options.shuffle_seed);
        for (auto& list : adj)
            std::shuffle(list.begin(), list.end(), rng);
    }

    SpanningTree tree;
    tree.root = g.root;
    tree.constrain_boundary_edges = options.constrain_boundary_edges;
    tree.in_tree.assign(mesh.edges.size(), 0);

    std::vector<char> seen(static_cast<std::size_t>(g.supernode_count), 0);
    std::queue<int> q;
    q.push(g.root);
    seen[g.root] = 1;
    while (!q.empty()) {
        const int s = q.front();
        q.pop();
        for (const auto& [e, o] : adj[s]) {
            if (seen[o])
                continue;
            seen[o] = 1;
            tree.in_tree[e] = 1;
            tree.tree_edges.push_back(e);
            ++tree.reached;
            q.push(o);
        }
    }
    for (int s = 0; s < g.supernode_count; ++s)
        if (!seen[s])
            throw MeshError(s < mesh.conductor_count
                                ? "conductor " + std::to_string(s + 1) +
                                      " is not reachable through the insulation from the outer boundary"
                                : "insulation region disconnected from the outer boundary");
    std::sort(tree.tree_edges.begin(), tree.tree_edges.end());
    return tree;
}

enum class DofKind : std::uint8_t { free, gauged_zero, boundary_zero };

struct DofMap {
    std::vector<DofKind> edge_kind;
    std::vector<int> edge_index;  // -1 unless free
    std::vector<DofKind> node_kind;
    std::vector<int> node_index;  // -1 unless free
    std::vector<int> constant_index;  // per conductor (0-based)
    int size = 0;

    int free_edges = 0;
    int gauged_edges = 0;
    int boundary_edges = 0;
    int free_nodes = 0;
    int boundary_nodes = 0;

    [[nodiscard]] int conductor_count() const { return static_cast<int>(constant_index.size()); }
};

namespace detail {

inline DofMap number_dofs(const Mesh& mesh, const std::vector<char>* in_tree, bool constrain_boundary_edges)
{
    DofMap d;
    d.edge_kind.assign(mesh.edges.size(), DofKind::free);
    d.edge_index.assign(mesh.edges.size(), -1);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        if (constrain_boundary_edges && mesh.boundary_edge[e]) {
            d.edge_kind[e] = DofKind::boundary_zero;
            ++d.boundary_edges;
        } else if (in_tree && (*in_tree)[e]) {
            d.edge_kind[e] = DofKind::gauged_zero;
            ++d.gauged_edges;
        } else {
            d.edge_index[e] = d.size++;
            ++d.free_edges;
        }
    }
    d.node_kind.assign(mesh.nodes.size(), DofKind::free);
    d.node_index.assign(mesh.nodes.size(), -1);
    for (int n = 0; n < mesh.node_count(); ++n) {
        if (mesh.boundary_node[n]) {
            d.node_kind[n] = DofKind::boundary_zero;
            ++d.boundary_nodes;
        } else {
            d.node_index[n] = d.size++;
            ++d.free_nodes;
        }
    }
    for (int i = 0; i < mesh.conductor_count; ++i)
        d.constant_index.push_back(d.size++);
    return d;
}

}  // namespace detail

inline DofMap build_dof_map(const Mesh& mesh, const SpanningTree& tree)
{
    if (tree.in_tree.size() != mesh.edges.size())
        throw MeshError("spanning tree does not belong to this mesh");
    return detail::number_dofs(mesh, &tree.in_tree, tree.constrain_boundary_edges);
}

/// Numbering without the tree-cotree gauge. The resulting system is singular
/// whenever the insulation has interior nodes; used to exercise diagnostics.
inline DofMap build_ungauged_dof_map(const Mesh& mesh, bool constrain_boundary_edges = true)
{
    return detail::number_dofs(mesh, nullptr, constrain_boundary_edges);
}

/// Debug dump: edge id, node pair, class.
inline void write_gauge_csv(std::ostream& out, const Mesh& mesh, const DofMap& dofs)
{
    out << "edge,node_a,node_b,class\n";
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const char* cls = "cotree";
        switch (dofs.edge_kind[e]) {
        case DofKind::boundary_zero: cls = "boundary"; break;
        case DofKind::gauged_zero: cls = "tree"; break;
        case DofKind::free: cls = touches_conductor(mesh, e) ? "conductor" : "cotree"; break;
        }
        out << e << ',' << mesh.edges[e][0] << ',' << mesh.edges[e][1] << ',' << cls << '\n';
    }
}

}  // namespace helicable

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "helicable/helicable.hpp"

namespace fixture {

using namespace helicable;

inline constexpr double copper_sigma = 58.12e6;

/// One fully solved problem. Heap-allocated and pinned because the Solution
/// refers back into it.
struct Problem {
    Mesh mesh;
    SpanningTree tree;
    DofMap dofs;
    MaterialSpec mat = MaterialSpec::uniform(0, copper_sigma);
    TwistMap twist = TwistMap::untwisted();
    Excitation exc;
    LinearSystem sys;
    SolveResult result;
    std::unique_ptr<Solution> sol;

    Problem() = default;
    Problem(const Problem&) = delete;
    Problem& operator=(const Problem&) = delete;
};

struct ProblemSpec {
    DiskMeshSpec geometry;
    double tau = 0.0;
    double frequency = 50.0;
    std::vector<cplx> currents;  // empty: 1 A in every strand
    GaugeOptions gauge;
};

inline DiskMeshSpec centred_strand(double h, double shield = 0.01, double a = 0.005)
{
    return DiskMeshSpec{shield, {{0.0, 0.0, a}}, h};
}

inline std::unique_ptr<Problem> solve_problem(const ProblemSpec& spec, Mesh mesh)
{
    auto p = std::make_unique<Problem>();
    p->mesh = std::move(mesh);
    const int n = p->mesh.conductor_count;
    p->tree = build_spanning_tree(p->mesh, spec.gauge);
    p->dofs = build_dof_map(p->mesh, p->tree);
    p->mat = MaterialSpec::uniform(n, copper_sigma);
    p->twist = TwistMap(spec.tau, 1.0);
    p->exc.frequency = spec.frequency;
    p->exc.currents = spec.currents.empty() ? std::vector<cplx>(static_cast<std::size_t>(n), cplx(1.0))
                                            : spec.currents;
    p->sys = assemble(p->mesh, p->dofs, p->twist, p->mat, p->exc);
    p->result = solve(p->sys);
    p->sol = std::make_unique<Solution>(p->mesh, p->sys, p->twist, p->mat, p->exc, p->result.x);
    return p;
}

inline std::unique_ptr<Problem> solve_problem(const ProblemSpec& spec)
{
    return solve_problem(spec, generate_disk_mesh(spec.geometry));
}

/// 1 + 6 + 6 layout of the 13-strand cable.
inline DiskMeshSpec thirteen_strands(double h, double shield = 0.03)
{
    const double a = 0.005;
    const double g = 0.0005;
    DiskMeshSpec s{shield, {{0.0, 0.0, a}}, h};
    for (double r : {2 * a + g, 2 * (2 * a + g)})
        for (int k = 0; k < 6; ++k)
            s.strands.push_back({r * std::cos(k * pi / 3), r * std::sin(k * pi / 3), a});
    return s;
}

/// Hand-built mesh: a unit square split into 4 triangles around its centre,
/// everything insulation.
inline Mesh square_four()
{
    Mesh m;
    m.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    m.triangles = {{{0, 1, 4}, 0}, {{1, 2, 4}, 0}, {{2, 3, 4}, 0}, {{3, 0, 4}, 0}};
    return finalize_mesh(m);
}

inline std::string square_four_msh()
{
    return "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
           "$Nodes\n5\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n5 0.5 0.5 0\n$EndNodes\n"
           "$Elements\n8\n"
           "1 1 2 1 1 1 2\n2 1 2 1 1 2 3\n3 1 2 1 1 3 4\n4 1 2 1 1 4 1\n"
           "5 2 2 2 2 1 2 5\n6 2 2 2 2 2 3 5\n7 2 2 2 2 3 4 5\n8 2 2 2 2 4 1 5\n"
           "$EndElements\n";
}

}  // namespace fixture

#pragma once

// The full pipeline behind the command-line tool: mesh, gauge and numbering,
// assembly, solve, post-processing, artifact files.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "helicable/assembly.hpp"
#include "helicable/config.hpp"
#include "helicable/disk_mesher.hpp"
#include "helicable/error.hpp"
#include "helicable/export.hpp"
#include "helicable/mesh.hpp"
#include "helicable/msh_io.hpp"
#include "helicable/post.hpp"
#include "helicable/solve.hpp"
#include "helicable/spaces.hpp"

namespace helicable {

inline constexpr const char* version = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int config = 10;
inline constexpr int mesh = 20;
inline constexpr int singular = 30;
inline constexpr int tolerance = 40;
inline constexpr int io = 50;
}  // namespace exit_code

inline int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e))
        return exit_code::config;
    if (dynamic_cast<const MeshError*>(&e))
        return exit_code::mesh;
    if (dynamic_cast<const SingularSystemError*>(&e))
        return exit_code::singular;
    if (dynamic_cast<const SolverToleranceError*>(&e))
        return exit_code::tolerance;
    if (dynamic_cast<const IoError*>(&e))
        return exit_code::io;
    return exit_code::internal;
}

struct RunOptions {
    bool dry_run = false;
    std::optional<std::filesystem::path> output_directory;  // overrides the config
    bool verbose = false;
};

struct RunOutcome {
    Mesh mesh;
    DofMap dofs;
    std::optional<SolveReport> solve;
    std::optional<LossReport> losses;
    std::map<std::string, std::string> artifacts;  // file name -> contents
    std::filesystem::path output_directory;
};

inline Mesh load_mesh(const RunConfig& cfg)
{
    if (cfg.builtin_mesh)
        return generate_disk_mesh(*cfg.builtin_mesh);
    std::ifstream in(cfg.msh_path);
    if (!in)
        throw MeshError("cannot read mesh file '" + cfg.msh_path.string() + "'");
    try {
        return parse_msh(in, cfg.tags);
    } catch (const MshError& e) {
        throw MshError(e.line(), cfg.msh_path.filename().string() + ": " + e.reason());
    }
}

inline nlohmann::ordered_json mesh_summary(const Mesh& mesh)
{
    nlohmann::ordered_json j;
    j["nodes"] = mesh.node_count();
    j["triangles"] = mesh.triangle_count();
    j["edges"] = mesh.edge_count();
    j["conductors"] = mesh.conductor_count;
    j["min_angle_deg"] = min_angle(mesh) * 180.0 / pi;
    j["insulation_area_m2"] = region_area(mesh, insulation_region);
    std::vector<double> areas;
    for (int i = 1; i <= mesh.conductor_count; ++i)
        areas.push_back(region_area(mesh, i));
    j["conductor_area_m2"] = areas;
    return j;
}

inline nlohmann::ordered_json dof_summary(const DofMap& d)
{
    nlohmann::ordered_json j;
    j["total"] = d.size;
    j["edge_free"] = d.free_edges;
    j["edge_tree"] = d.gauged_edges;
    j["edge_boundary"] = d.boundary_edges;
    j["node_free"] = d.free_nodes;
    j["node_boundary"] = d.boundary_nodes;
    j["conductor_constants"] = d.conductor_count();
    return j;
}

inline nlohmann::ordered_json solve_summary(const SolveReport& r)
{
    nlohmann::ordered_json j;
    j["relative_residual"] = r.relative_residual;
    j["pivot_ratio"] = r.rcond;
    j["factor_nonzeros"] = r.factor_nonzeros;
    j["refinement_steps"] = r.refinement_steps;
    j["wall_time_s"] = r.seconds;
    return j;
}

inline nlohmann::ordered_json manifest(const RunConfig& cfg, const std::vector<std::string>& files)
{
    nlohmann::ordered_json j;
    j["tool"] = "helicable";
    j["version"] = version;
    j["config_hash_fnv1a64"] = hex64(cfg.hash);
    j["tau_rad_per_m"] = cfg.twist.tau();
    j["twist"] = {{"alpha_rad", cfg.twist.alpha()}, {"beta_m", cfg.twist.beta()}};
    j["frequency_Hz"] = cfg.frequency;
    std::vector<std::array<double, 2>> cur;
    for (const cplx& c : cfg.currents)
        cur.push_back({c.real(), c.imag()});
    j["currents_A"] = cur;
    nlohmann::ordered_json geo;
    if (cfg.builtin_mesh) {
        geo["source"] = "builtin";
        geo["shield_radius_m"] = cfg.builtin_mesh->shield_radius;
        geo["h_m"] = cfg.builtin_mesh->h;
        nlohmann::ordered_json strands = nlohmann::ordered_json::array();
        for (const Strand& s : cfg.builtin_mesh->strands)
            strands.push_back({{"center_m", {s.center_u, s.center_v}}, {"radius_m", s.radius}});
        geo["strands"] = strands;
    } else {
        geo["source"] = cfg.msh_path.filename().string();
        nlohmann::ordered_json tags;
        for (const auto& [tag, role] : cfg.tags)
            tags[std::to_string(tag)] = role.str();
        geo["tags"] = tags;
    }
    j["geometry"] = geo;
    j["gauge"] = {{"constrain_boundary_edges", cfg.gauge.constrain_boundary_edges}};
    if (cfg.gauge.shuffle_seed)
        j["gauge"]["tree_shuffle_seed"] = *cfg.gauge.shuffle_seed;
    j["solver_tol"] = cfg.solver_tol;
    j["assumptions"] = cfg.assumptions;
    if (!cfg.notes.empty())
        j["notes"] = cfg.notes;
    j["artifacts"] = files;
    return j;
}

/// Runs the pipeline and collects artifact contents in memory. Nothing is
/// written to disk here; see write_artifacts.
inline RunOutcome execute(const RunConfig& cfg, const RunOptions& opt, std::ostream& out, std::ostream& log)
{
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    auto stage = [&](const char* name) {
        if (!opt.verbose)
            return;
        const auto t1 = clock::now();
        log << "[helicable] " << name << " done in " << std::chrono::duration<double>(t1 - t0).count() << " s\n";
        t0 = t1;
    };

    RunOutcome r;
    r.output_directory = opt.output_directory.value_or(cfg.output_directory);

    r.mesh = load_mesh(cfg);
    if (r.mesh.conductor_count != cfg.conductor_count())
        throw MeshError("mesh has " + std::to_string(r.mesh.conductor_count) + " conductors, config describes " +
                        std::to_string(cfg.conductor_count()));
    const MaterialSpec materials = cfg.materials.build(r.mesh.conductor_count);
    stage("mesh");

    const SpanningTree tree = build_spanning_tree(r.mesh, cfg.gauge);
    r.dofs = build_dof_map(r.mesh, tree);
    stage("gauge");

    const auto msum = mesh_summary(r.mesh);
    const auto dsum = dof_summary(r.dofs);
    if (opt.dry_run) {
        out << "mesh " << msum.dump() << '\n' << "dofs " << dsum.dump() << '\n';
        return r;
    }

    const Excitation exc = cfg.excitation();
    const LinearSystem sys = assemble(r.mesh, r.dofs, cfg.twist, materials, exc);
    stage("assembly");
    SolveOptions so;
    so.tol = cfg.solver_tol;
    SolveResult res = solve(sys, so);
    r.solve = res.report;
    stage("solve");

    const Solution sol(r.mesh, sys, cfg.twist, materials, exc, std::move(res.x));
    r.losses = compute_losses(sol);
    const double length = cfg.scaled_length.value_or(cfg.twist.beta());

    auto& a = r.artifacts;
    a["mesh_summary.json"] = msum.dump(2) + "\n";
    a["dof_summary.json"] = dsum.dump(2) + "\n";
    auto ssum = solve_summary(*r.solve);
    ssum["magnetic_energy_J_per_m"] = magnetic_energy(sol);
    a["solve_report.json"] = ssum.dump(2) + "\n";
    a["losses.json"] = loss_json(*r.losses, length).dump(2) + "\n";
    {
        std::ostringstream s;
        write_loss_csv(s, *r.losses);
        a["losses.csv"] = s.str();
    }
    for (const ProbeSpec& p : cfg.probes) {
        std::ostringstream s;
        write_probe_csv(s, line_probe(sol, p.start, p.end, p.samples));
        a["probe_" + p.name + ".csv"] = s.str();
    }
    if (cfg.write_vtk) {
        std::ostringstream s;
        write_vtk(s, sol);
        a["fields.vtk"] = s.str();
    }
    std::vector<std::string> files;
    for (const auto& [name, body] : a)
        files.push_back(name);
    files.push_back("manifest.json");
    a["manifest.json"] = manifest(cfg, files).dump(2) + "\n";
    stage("post");

    out << "total loss " << r.losses->total << " W/m over " << r.mesh.triangle_count() << " triangles, "
        << r.dofs.size << " dofs\n";
    return r;
}

inline void write_artifacts(const RunOutcome& r)
{
    std::error_code ec;
    std::filesystem::create_directories(r.output_directory, ec);
    if (ec)
        throw IoError("cannot create output directory '" + r.output_directory.string() + "': " + ec.message());
    for (const auto& [name, body] : r.artifacts) {
        const std::string path = (r.output_directory / name).string();
        std::ofstream f = open_output(path);
        f << body;
        close_output(f, path);
    }
}

/// Load, run and write. Returns the process exit code; diagnostics go to err.
inline int run_main(const std::filesystem::path& config_path, const RunOptions& opt, std::ostream& out,
                    std::ostream& err)
{
    try {
        const RunConfig cfg = load_run_config(config_path);
        const RunOutcome r = execute(cfg, opt, out, err);
        if (!opt.dry_run)
            write_artifacts(r);
        return exit_code::ok;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        const char* kind = code == exit_code::config      ? "config error"
                           : code == exit_code::mesh      ? "mesh error"
                           : code == exit_code::singular  ? "singular system"
                           : code == exit_code::tolerance ? "solver tolerance"
                           : code == exit_code::io        ? "i/o error"
                                                          : "internal error";
        err << "helicable: " << kind << ": " << e.what() << '\n';
        return code;
    }
}

}  // namespace helicable

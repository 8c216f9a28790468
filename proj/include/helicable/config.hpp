#pragma once

// JSON run configuration. See README.md for the schema. All values SI.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helicable/assembly.hpp"
#include "helicable/disk_mesher.hpp"
#include "helicable/error.hpp"
#include "helicable/helicoid.hpp"
#include "helicable/msh_io.hpp"
#include "helicable/spaces.hpp"

namespace helicable {

using json = nlohmann::json;

struct ProbeSpec {
    std::string name;
    CartesianPoint start;
    CartesianPoint end;
    int samples = 0;
};

struct MaterialTable {
    RegionMaterial insulation{0.0, nu0};
    RegionMaterial conductor{0.0, nu0};
    std::map<int, RegionMaterial> overrides;  // by conductor index

    [[nodiscard]] MaterialSpec build(int conductor_count) const
    {
        for (const auto& [i, m] : overrides)
            if (i < 1 || i > conductor_count)
                throw ConfigError("materials: override for conductor " + std::to_string(i) +
                                  " but the mesh has " + std::to_string(conductor_count) + " conductors");
        std::vector<RegionMaterial> c(static_cast<std::size_t>(conductor_count), conductor);
        for (const auto& [i, m] : overrides)
            c[static_cast<std::size_t>(i - 1)] = m;
        return MaterialSpec(insulation, std::move(c));
    }
};

struct RunConfig {
    std::optional<DiskMeshSpec> builtin_mesh;
    std::filesystem::path msh_path;
    TagDictionary tags;
    TwistMap twist = TwistMap::untwisted();
    MaterialTable materials;
    double frequency = 0.0;
    std::vector<cplx> currents;
    GaugeOptions gauge;
    double solver_tol = 1e-10;
    std::vector<ProbeSpec> probes;
    std::filesystem::path output_directory = "out";
    bool write_vtk = false;
    std::optional<double> scaled_length;  // defaults to beta
    json assumptions = json::object();
    std::string notes;
    std::uint64_t hash = 0;

    [[nodiscard]] int conductor_count() const
    {
        if (builtin_mesh)
            return static_cast<int>(builtin_mesh->strands.size());
        int n = 0;
        for (const auto& [tag, role] : tags)
            if (role.kind == TagRole::Kind::conductor)
                n = std::max(n, role.conductor);
        return n;
    }

    [[nodiscard]] Excitation excitation() const { return {frequency, currents}; }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << v;
    return s.str();
}

namespace detail {

class ConfigReader {
public:
    ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail("expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items())
            if (!ok.count(k))
                throw ConfigError(where(k) + ": unknown key");
    }

    [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }

    [[nodiscard]] const json& at(const char* key) const
    {
        if (!j_.contains(key))
            throw ConfigError(where(key) + ": missing required key");
        return j_.at(key);
    }

    [[nodiscard]] ConfigReader object(const char* key) const { return ConfigReader(at(key), where(key)); }

    [[nodiscard]] double number(const char* key) const
    {
        const json& v = at(key);
        if (!v.is_number())
            throw ConfigError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ConfigError(where(key) + ": must be finite");
        return d;
    }

    [[nodiscard]] double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    [[nodiscard]] bool boolean_or(const char* key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        if (!at(key).is_boolean())
            throw ConfigError(where(key) + ": expected true or false");
        return at(key).get<bool>();
    }

    [[nodiscard]] std::string string(const char* key) const
    {
        if (!at(key).is_string())
            throw ConfigError(where(key) + ": expected a string");
        return at(key).get<std::string>();
    }

    [[nodiscard]] std::vector<double> numbers(const char* key, std::size_t n) const
    {
        const json& v = at(key);
        if (!v.is_array() || v.size() != n)
            throw ConfigError(where(key) + ": expected an array of " + std::to_string(n) + " numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number() || !std::isfinite(x.get<double>()))
                throw ConfigError(where(key) + ": expected finite numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    [[nodiscard]] std::string where(const std::string& key) const { return path_ + "." + key; }
    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }
    [[nodiscard]] const json& raw() const { return j_; }

private:
    const json& j_;
    std::string path_;
};

inline RegionMaterial read_material(const ConfigReader& r, bool conducting)
{
    r.allow({"sigma", "mu_r", "nu"});
    RegionMaterial m;
    m.sigma = r.number_or("sigma", 0.0);
    if (conducting && !(m.sigma > 0.0))
        r.fail("sigma must be positive");
    if (!conducting && m.sigma != 0.0)
        r.fail("insulation sigma must be 0");
    if (r.has("mu_r") && r.has("nu"))
        r.fail("give either mu_r or nu, not both");
    if (r.has("nu")) {
        m.nu = r.number("nu");
    } else {
        const double mu_r = r.number_or("mu_r", 1.0);
        if (!(mu_r > 0.0))
            throw ConfigError(r.where("mu_r") + ": must be positive");
        m.nu = nu0 / mu_r;
    }
    if (!(m.nu > 0.0))
        r.fail("nu must be positive");
    return m;
}

}  // namespace detail

/// Parses and validates a configuration document. Relative mesh paths are
/// resolved against base_dir.
inline RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir = {})
{
    using detail::ConfigReader;
    ConfigReader root(doc, "config");
    root.allow({"mesh", "tags", "twist", "materials", "excitation", "gauge", "solver", "probes", "output",
                "assumptions", "notes"});

    RunConfig c;
    c.hash = fnv1a64(doc.dump());

    const ConfigReader mesh = root.object("mesh");
    mesh.allow({"builtin", "msh"});
    if (mesh.has("builtin") == mesh.has("msh"))
        mesh.fail("exactly one of 'builtin' and 'msh' is required");
    if (mesh.has("builtin")) {
        const ConfigReader b = mesh.object("builtin");
        b.allow({"shield_radius", "h", "strands"});
        DiskMeshSpec spec;
        spec.shield_radius = b.number("shield_radius");
        spec.h = b.number("h");
        const json& strands = b.at("strands");
        if (!strands.is_array() || strands.empty())
            b.fail("'strands' must be a non-empty array");
        for (std::size_t i = 0; i < strands.size(); ++i) {
            const ConfigReader s(strands[i], b.where("strands[" + std::to_string(i) + "]"));
            s.allow({"center", "radius"});
            const auto ctr = s.numbers("center", 2);
            spec.strands.push_back({ctr[0], ctr[1], s.number("radius")});
        }
        try {
            validate_disk_spec(spec);
        } catch (const MeshError& e) {
            throw ConfigError(std::string("config.mesh.builtin: ") + e.what());
        }
        c.builtin_mesh = spec;
        if (root.has("tags"))
            root.fail("'tags' only applies to MSH meshes");
    } else {
        c.msh_path = mesh.string("msh");
        if (c.msh_path.is_relative() && !base_dir.empty())
            c.msh_path = base_dir / c.msh_path;
        if (root.has("tags")) {
            const ConfigReader t = root.object("tags");
            for (const auto& [k, v] : t.raw().items()) {
                std::size_t used = 0;
                int tag = 0;
                try {
                    tag = std::stoi(k, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != k.size())
                    throw ConfigError(t.where(k) + ": tag keys must be integers");
                if (!v.is_string())
                    throw ConfigError(t.where(k) + ": expected a role string");
                try {
                    c.tags[tag] = TagRole::parse(v.get<std::string>());
                } catch (const ConfigError& e) {
                    throw ConfigError(t.where(k) + ": " + e.what());
                }
            }
        } else {
            root.fail("'tags' is required with an MSH mesh");
        }
    }
    const int n = c.conductor_count();

    const ConfigReader tw = root.object("twist");
    tw.allow({"alpha", "beta"});
    c.twist = TwistMap(tw.number("alpha"), tw.number("beta"));

    const ConfigReader mat = root.object("materials");
    for (const auto& [k, v] : mat.raw().items()) {
        if (k == "insulation") {
            c.materials.insulation = detail::read_material(mat.object("insulation"), false);
        } else if (k == "conductor") {
            c.materials.conductor = detail::read_material(mat.object("conductor"), true);
        } else if (k.rfind("conductor:", 0) == 0) {
            const std::string idx = k.substr(10);
            std::size_t used = 0;
            int i = 0;
            try {
                i = std::stoi(idx, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != idx.size())
                throw ConfigError(mat.where(k) + ": unknown key");
            c.materials.overrides[i] = detail::read_material(ConfigReader(v, mat.where(k)), true);
        } else {
            throw ConfigError(mat.where(k) + ": unknown key");
        }
    }
    if (!mat.has("conductor") && static_cast<int>(c.materials.overrides.size()) < n)
        mat.fail("'conductor' is required unless every conductor has an override");
    (void)c.materials.build(n);

    const ConfigReader ex = root.object("excitation");
    ex.allow({"frequency", "currents"});
    c.frequency = ex.number("frequency");
    if (!(c.frequency > 0.0))
        throw ConfigError(ex.where("frequency") + ": must be positive");
    const json& cur = ex.at("currents");
    if (!cur.is_array())
        ex.fail("'currents' must be an array");
    if (static_cast<int>(cur.size()) != n)
        throw ConfigError(ex.where("currents") + ": expected " + std::to_string(n) + " entries, got " +
                          std::to_string(cur.size()));
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const json& v = cur[i];
        const std::string w = ex.where("currents[" + std::to_string(i) + "]");
        if (v.is_number()) {
            c.currents.emplace_back(v.get<double>(), 0.0);
        } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            c.currents.emplace_back(v[0].get<double>(), v[1].get<double>());
        } else {
            throw ConfigError(w + ": expected a number or [re, im]");
        }
        if (!std::isfinite(c.currents.back().real()) || !std::isfinite(c.currents.back().imag()))
            throw ConfigError(w + ": must be finite");
    }

    if (root.has("gauge")) {
        const ConfigReader g = root.object("gauge");
        g.allow({"constrain_boundary_edges", "tree_shuffle_seed"});
        c.gauge.constrain_boundary_edges = g.boolean_or("constrain_boundary_edges", true);
        if (g.has("tree_shuffle_seed")) {
            const json& s = g.at("tree_shuffle_seed");
            if (!s.is_number_unsigned())
                throw ConfigError(g.where("tree_shuffle_seed") + ": expected a non-negative integer");
            c.gauge.shuffle_seed = s.get<std::uint64_t>();
        }
    }

    if (root.has("solver")) {
        const ConfigReader s = root.object("solver");
        s.allow({"tol"});
        c.solver_tol = s.number_or("tol", c.solver_tol);
        if (!(c.solver_tol > 0.0 && c.solver_tol < 1.0))
            throw ConfigError(s.where("tol") + ": must lie in (0, 1)");
    }

    if (root.has("probes")) {
        const json& p = root.at("probes");
        if (!p.is_array())
            root.fail("'probes' must be an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const ConfigReader r(p[i], root.where("probes[" + std::to_string(i) + "]"));
            r.allow({"name", "start", "end", "samples"});
            ProbeSpec ps;
            ps.name = r.string("name");
            if (ps.name.empty() || ps.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") != std::string::npos)
                throw ConfigError(r.where("name") + ": use letters, digits, '_' or '-'");
            if (!names.insert(ps.name).second)
                throw ConfigError(r.where("name") + ": duplicate probe name '" + ps.name + "'");
            const auto a = r.numbers("start", 3);
            const auto b = r.numbers("end", 3);
            ps.start = CartesianPoint(a[0], a[1], a[2]);
            ps.end = CartesianPoint(b[0], b[1], b[2]);
            const json& n_s = r.at("samples");
            if (!n_s.is_number_integer() || n_s.get<long long>() < 2 || n_s.get<long long>() > 1000000)
                throw ConfigError(r.where("samples") + ": expected an integer in [2, 1000000]");
            ps.samples = n_s.get<int>();
            c.probes.push_back(ps);
        }
    }

    if (root.has("output")) {
        const ConfigReader o = root.object("output");
        o.allow({"directory", "vtk", "scaled_length"});
        if (o.has("directory"))
            c.output_directory = o.string("directory");
        c.write_vtk = o.boolean_or("vtk", false);
        if (o.has("scaled_length")) {
            c.scaled_length = o.number("scaled_length");
            if (!(*c.scaled_length > 0.0))
                throw ConfigError(o.where("scaled_length") + ": must be positive");
        }
    }

    if (root.has("assumptions")) {
        if (!root.at("assumptions").is_object())
            root.fail("'assumptions' must be an object");
        c.assumptions = root.at("assumptions");
    }
    if (root.has("notes"))
        c.notes = root.string("notes");
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

}  // namespace helicable

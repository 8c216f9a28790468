#pragma once

// Gmsh MSH 2.2 ASCII reader and writer.
//
// Only 2-node lines (type 1) and 3-node triangles (type 2) are accepted.
// Physical tags are resolved through a caller-supplied dictionary:
//   physical tag -> "conductor:<i>" | "insulation" | "boundary"
// Lines must carry boundary tags and lie on the outer boundary; triangles
// carry region tags. All third coordinates must be zero (plane w = 0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "helicable/error.hpp"
#include "helicable/mesh.hpp"

namespace helicable {

struct TagRole {
    enum class Kind { conductor, insulation, boundary };
    Kind kind = Kind::insulation;
    int conductor = 0;  ///< 1-based, only for Kind::conductor

    static TagRole parse(const std::string& s)
    {
        if (s == "insulation")
            return {Kind::insulation, 0};
        if (s == "boundary")
            return {Kind::boundary, 0};
        constexpr std::string_view prefix = "conductor:";
        if (s.rfind(prefix, 0) == 0) {
            const std::string idx = s.substr(prefix.size());
            std::size_t used = 0;
            int i = 0;
            try {
                i = std::stoi(idx, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == idx.size() && !idx.empty() && i >= 1)
                return {Kind::conductor, i};
        }
        throw ConfigError("invalid tag role '" + s +
                          "' (expected conductor:<i>, insulation or boundary)");
    }

    [[nodiscard]] std::string str() const
    {
        switch (kind) {
        case Kind::conductor: return "conductor:" + std::to_string(conductor);
        case Kind::insulation: return "insulation";
        case Kind::boundary: return "boundary";
        }
        return {};
    }

    [[nodiscard]] int region() const { return kind == Kind::conductor ? conductor : 0; }

    friend bool operator==(const TagRole&, const TagRole&) = default;
};

using TagDictionary = std::map<int, TagRole>;

/// Physical tags used when writing meshes: 1 boundary, 2 insulation,
/// 100 + i conductor i.
inline TagDictionary default_tag_dictionary(int conductor_count)
{
    TagDictionary d;
    d[1] = {TagRole::Kind::boundary, 0};
    d[2] = {TagRole::Kind::insulation, 0};
    for (int i = 1; i <= conductor_count; ++i)
        d[100 + i] = {TagRole::Kind::conductor, i};
    return d;
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line)
    {
        if (!std::getline(in_, line))
            return false;
        ++number_;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return true;
    }

    std::string require(const char* context)
    {
        std::string line;
        if (!next(line))
            throw MshError(number_, std::string("unexpected end of file in ") + context);
        return line;
    }

    [[nodiscard]] int line() const { return number_; }

private:
    std::istream& in_;
    int number_ = 0;
};

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline long parse_count(LineReader& r, const char* context, const char* what)
{
    const std::string line = r.require(context);
    const int lineno = r.line();
    std::istringstream ss(line);
    long n = -1;
    std::string rest;
    if (!(ss >> n) || n < 0 || (ss >> rest))
        throw MshError(lineno, std::string("malformed ") + what + " count");
    return n;
}

inline void expect_end(LineReader& r, const std::string& name)
{
    const std::string line = trim(r.require(("$" + name).c_str()));
    if (line != "$End" + name)
        throw MshError(r.line(), "expected $End" + name);
}

}  // namespace detail

/// Parse an MSH 2.2 ASCII stream. Throws MshError with the offending line.
inline Mesh parse_msh(std::istream& in, const TagDictionary& tags)
{
    detail::LineReader r(in);

    int conductor_count = 0;
    for (const auto& [tag, role] : tags)
        if (role.kind == TagRole::Kind::conductor)
            conductor_count = std::max(conductor_count, role.conductor);

    bool have_format = false;
    bool have_nodes = false;
    bool have_elements = false;
    int end_elements_line = 0;

    std::vector<Vec2> nodes;
    std::unordered_map<long, int> node_index;

    struct RawLine {
        int a, b, lineno;
    };
    std::vector<RawLine> lines;
    std::vector<Triangle> triangles;

    std::string raw;
    while (r.next(raw)) {
        const std::string line = detail::trim(raw);
        if (line.empty())
            continue;
        if (line[0] != '$')
            throw MshError(r.line(), "expected section header, got '" + line + "'");
        const std::string name = line.substr(1);

        if (name == "MeshFormat") {
            const std::string fmt = r.require("$MeshFormat");
            std::istringstream ss(fmt);
            std::string version;
            int file_type = -1;
            int data_size = -1;
            if (!(ss >> version >> file_type >> data_size))
                throw MshError(r.line(), "malformed $MeshFormat line");
            if (version != "2.2")
                throw MshError(r.line(), "unsupported MSH version '" + version + "' (expected 2.2)");
            if (file_type != 0)
                throw MshError(r.line(), "binary MSH files are not supported");
            detail::expect_end(r, "MeshFormat");
            have_format = true;
        } else if (!have_format) {
            throw MshError(r.line(), "missing $MeshFormat section");
        } else if (name == "PhysicalNames") {
            const long n = detail::parse_count(r, "$PhysicalNames", "physical name");
            for (long i = 0; i < n; ++i) {
                std::istringstream ss(r.require("$PhysicalNames"));
                int dim = 0;
                int tag = 0;
                std::string pname;
                if (!(ss >> dim >> tag >> pname))
                    throw MshError(r.line(), "malformed physical name line");
            }
            detail::expect_end(r, "PhysicalNames");
        } else if (name == "Nodes") {
            if (have_nodes)
                throw MshError(r.line(), "duplicate $Nodes section");
            const long n = detail::parse_count(r, "$Nodes", "node");
            nodes.reserve(static_cast<std::size_t>(n));
            for (long i = 0; i < n; ++i) {
                std::istringstream ss(r.require("$Nodes"));
                long id = 0;
                double x = 0;
                double y = 0;
                double z = 0;
                std::string rest;
                if (!(ss >> id >> x >> y >> z) || (ss >> rest))
                    throw MshError(r.line(), "malformed node line");
                if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
                    throw MshError(r.line(), "non-finite node coordinate");
                if (z != 0.0)
                    throw MshError(r.line(), "non-zero third coordinate");
                if (!node_index.emplace(id, static_cast<int>(nodes.size())).second)
                    throw MshError(r.line(), "duplicate node id " + std::to_string(id));
                nodes.emplace_back(x, y);
            }
            detail::expect_end(r, "Nodes");
            have_nodes = true;
        } else if (name == "Elements") {
            if (!have_nodes)
                throw MshError(r.line(), "$Elements before $Nodes");
            if (have_elements)
                throw MshError(r.line(), "duplicate $Elements section");
            const long n = detail::parse_count(r, "$Elements", "element");
            for (long i = 0; i < n; ++i) {
                std::istringstream ss(r.require("$Elements"));
                long id = 0;
                int type = 0;
                int ntags = 0;
                if (!(ss >> id >> type >> ntags) || ntags < 0)
                    throw MshError(r.line(), "malformed element line");
                if (type != 1 && type != 2)
                    throw MshError(r.line(), "unsupported element type " + std::to_string(type));
                std::vector<int> etags(static_cast<std::size_t>(ntags));
                for (auto& t : etags)
                    if (!(ss >> t))
                        throw MshError(r.line(), "malformed element line");
                if (ntags == 0)
                    throw MshError(r.line(), "element without physical tag");
                const int nn = type == 1 ? 2 : 3;
                std::array<int, 3> ids{};
                for (int k = 0; k < nn; ++k) {
                    long nid = 0;
                    if (!(ss >> nid))
                        throw MshError(r.line(), "malformed element line");
                    const auto it = node_index.find(nid);
                    if (it == node_index.end())
                        throw MshError(r.line(), "element references undefined node " +
                                                     std::to_string(nid));
                    ids[k] = it->second;
                }
                std::string rest;
                if (ss >> rest)
                    throw MshError(r.line(), "malformed element line");

                const auto role_it = tags.find(etags[0]);
                if (role_it == tags.end())
                    throw MshError(r.line(), "unknown physical tag " + std::to_string(etags[0]));
                const TagRole& role = role_it->second;

                if (type == 1) {
                    if (role.kind != TagRole::Kind::boundary)
                        throw MshError(r.line(), "line element with non-boundary tag " +
                                                     std::to_string(etags[0]));
                    lines.push_back({ids[0], ids[1], r.line()});
                } else {
                    if (role.kind == TagRole::Kind::boundary)
                        throw MshError(r.line(), "triangle with boundary tag " +
                                                     std::to_string(etags[0]));
                    Triangle tri{ids, role.region()};
                    const double a2 = signed_area2(nodes[ids[0]], nodes[ids[1]], nodes[ids[2]]);
                    if (!(std::abs(a2) > 0.0))
                        throw MshError(r.line(), "degenerate triangle");
                    if (a2 < 0.0)
                        std::swap(tri.nodes[1], tri.nodes[2]);
                    triangles.push_back(tri);
                }
            }
            detail::expect_end(r, "Elements");
            have_elements = true;
            end_elements_line = r.line();
        } else {
            // Unknown sections are skipped as the format allows.
            std::string skipped;
            const std::string end = "$End" + name;
            for (;;) {
                skipped = detail::trim(r.require(line.c_str()));
                if (skipped == end)
                    break;
            }
        }
    }

    if (!have_format)
        throw MshError(r.line(), "missing $MeshFormat section");
    if (!have_nodes)
        throw MshError(r.line(), "missing $Nodes section");
    if (!have_elements)
        throw MshError(r.line(), "missing $Elements section");

    // Drop nodes not referenced by any triangle, keeping file order.
    std::vector<int> remap(nodes.size(), -1);
    for (const auto& t : triangles)
        for (int n : t.nodes)
            remap[n] = 0;
    Mesh mesh;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (remap[i] == 0) {
            remap[i] = mesh.node_count();
            mesh.nodes.push_back(nodes[i]);
        }
    }
    for (auto& t : triangles)
        for (int& n : t.nodes)
            n = remap[n];
    mesh.triangles = std::move(triangles);
    mesh.conductor_count = conductor_count;

    std::vector<int> count(static_cast<std::size_t>(conductor_count) + 1, 0);
    for (const auto& t : mesh.triangles)
        ++count[t.region];
    for (int i = 1; i <= conductor_count; ++i)
        if (count[i] == 0)
            throw MshError(end_elements_line, "empty region: conductor " + std::to_string(i));

    try {
        mesh = finalize_mesh(std::move(mesh));
    } catch (const MshError&) {
        throw;
    } catch (const MeshError& e) {
        throw MshError(end_elements_line, e.what());
    }

    if (!lines.empty()) {
        std::unordered_map<std::uint64_t, int> edge_of;
        for (int e = 0; e < mesh.edge_count(); ++e)
            edge_of[(static_cast<std::uint64_t>(mesh.edges[e][0]) << 32) |
                    static_cast<std::uint32_t>(mesh.edges[e][1])] = e;
        for (const auto& l : lines) {
            const int a = remap[l.a];
            const int b = remap[l.b];
            bool ok = a >= 0 && b >= 0;
            if (ok) {
                const auto it = edge_of.find((static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                             static_cast<std::uint32_t>(std::max(a, b)));
                ok = it != edge_of.end() && mesh.boundary_edge[it->second];
            }
            if (!ok)
                throw MshError(l.lineno, "boundary line element is not on the outer boundary");
        }
    }
    return mesh;
}

inline Mesh parse_msh(const std::string& text, const TagDictionary& tags)
{
    std::istringstream in(text);
    return parse_msh(in, tags);
}

/// Write a mesh as MSH 2.2 ASCII using default_tag_dictionary() tags.
/// Coordinates are printed with 17 significant digits so that re-parsing
/// reproduces them exactly.
inline void write_msh(std::ostream& out, const Mesh& mesh)
{
    const auto tag_of_region = [](int region) { return region == 0 ? 2 : 100 + region; };
    char buf[128];

    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$PhysicalNames\n" << (2 + mesh.conductor_count) << "\n";
    out << "1 1 \"boundary\"\n2 2 \"insulation\"\n";
    for (int i = 1; i <= mesh.conductor_count; ++i)
        out << "2 " << (100 + i) << " \"conductor:" << i << "\"\n";
    out << "$EndPhysicalNames\n";

    out << "$Nodes\n" << mesh.node_count() << "\n";
    for (int n = 0; n < mesh.node_count(); ++n) {
        std::snprintf(buf, sizeof buf, "%d %.17g %.17g 0\n", n + 1, mesh.nodes[n].x(),
                      mesh.nodes[n].y());
        out << buf;
    }
    out << "$EndNodes\n";

    int boundary = 0;
    for (char b : mesh.boundary_edge)
        boundary += b ? 1 : 0;
    out << "$Elements\n" << (boundary + mesh.triangle_count()) << "\n";
    int id = 1;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        if (!mesh.boundary_edge[e])
            continue;
        // Keep the line oriented along its triangle.
        const int t = mesh.edge_triangles[e][0];
        int k = 0;
        while (mesh.triangle_edges[t][k] != e)
            ++k;
        const auto& tn = mesh.triangles[t].nodes;
        out << id++ << " 1 2 1 1 " << tn[k] + 1 << ' ' << tn[(k + 1) % 3] + 1 << '\n';
    }
    for (const auto& tri : mesh.triangles) {
        const int tag = tag_of_region(tri.region);
        out << id++ << " 2 2 " << tag << ' ' << tag << ' ' << tri.nodes[0] + 1 << ' '
            << tri.nodes[1] + 1 << ' ' << tri.nodes[2] + 1 << '\n';
    }
    out << "$EndElements\n";
}

}  // namespace helicable

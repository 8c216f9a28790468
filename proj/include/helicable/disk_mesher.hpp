#pragma once

// Built-in mesher for a circular shield containing circular strands.
//
// Circle nodes are placed exactly on the shield and strand circles with
// spacing at most 0.75 h; the interior is seeded with a jittered triangular
// lattice of spacing h, smoothed, and then refined Delaunay-style
// (circumcentre insertion, chord splitting on encroachment) until every angle
// exceeds ~20.7 degrees. Circle chords are kept Gabriel, so they survive as
// mesh edges and strand triangles are exactly those with all vertices on or
// inside the strand circle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "helicable/delaunay.hpp"
#include "helicable/error.hpp"
#include "helicable/mesh.hpp"

namespace helicable {

struct Strand {
    double center_u = 0.0;
    double center_v = 0.0;
    double radius = 0.0;
};

struct DiskMeshSpec {
    double shield_radius = 0.0;
    std::vector<Strand> strands;
    double h = 0.0;  ///< target edge length [m]
};

/// Circle spacing relative to h.
inline constexpr double circle_spacing_factor = 0.75;

inline int circle_node_count(double radius, double h)
{
    return static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius / (circle_spacing_factor * h)));
}

inline void validate_disk_spec(const DiskMeshSpec& spec)
{
    if (!(spec.shield_radius > 0.0) || !std::isfinite(spec.shield_radius))
        throw MeshError("shield radius must be positive");
    if (!(spec.h > 0.0) || !std::isfinite(spec.h))
        throw MeshError("target edge length h must be positive");
    const auto n = spec.strands.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = spec.strands[i];
        const std::string name = "strand " + std::to_string(i + 1);
        if (!(s.radius > 0.0) || !std::isfinite(s.radius) || !std::isfinite(s.center_u) ||
            !std::isfinite(s.center_v))
            throw MeshError(name + " has invalid geometry");
        if (std::hypot(s.center_u, s.center_v) + s.radius >= spec.shield_radius)
            throw MeshError(name + " is not strictly inside the shield");
        if (circle_node_count(s.radius, spec.h) < 8)
            throw MeshError("h too coarse to resolve " + name + " (fewer than 8 nodes on its circle)");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& o = spec.strands[j];
            if (std::hypot(s.center_u - o.center_u, s.center_v - o.center_v) <= s.radius + o.radius)
                throw MeshError("strands " + std::to_string(j + 1) + " and " +
                                std::to_string(i + 1) + " overlap");
        }
    }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic value in [-1, 1).
inline double hash_unit(std::int64_t i, std::int64_t j, std::uint64_t salt)
{
    const auto h = splitmix64(static_cast<std::uint64_t>(i) * 0x100000001b3ULL ^
                              splitmix64(static_cast<std::uint64_t>(j) ^ salt));
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

struct Circle {
    Vec2 center;
    double radius;
};

/// A chord between two nodes of the same circle, a -> b counter-clockwise.
struct Segment {
    int a, b;
    int circle;
    double angle_a, angle_b;  // angle_b > angle_a
    bool alive = true;
};

class DiskMesher {
public:
    explicit DiskMesher(const DiskMeshSpec& spec) : spec_(spec), h_(spec.h)
    {
        circles_.push_back({Vec2::Zero(), spec.shield_radius});
        for (const auto& s : spec.strands)
            circles_.push_back({Vec2(s.center_u, s.center_v), s.radius});
        const double r = spec.shield_radius;
        cell_ = h_;
        lo_ = Vec2(-r - 2 * h_, -r - 2 * h_);
        cells_ = static_cast<int>(std::ceil((2 * r + 4 * h_) / cell_)) + 1;
    }

    Mesh run()
    {
        seed_circles();
        seed_lattice();
        split_encroached_all();
        for (int pass = 0; pass < 4; ++pass) {
            smooth();
            split_encroached_all();
        }
        refine();
        return extract();
    }

private:
    // --- point bookkeeping -------------------------------------------------

    int add_point(const Vec2& p, int circle)
    {
        const int id = static_cast<int>(pts_.size());
        pts_.push_back(p);
        on_circle_.push_back(circle);
        return id;
    }

    [[nodiscard]] std::int64_t cell_key(int i, int j) const
    {
        return static_cast<std::int64_t>(i) * 1000003LL + j;
    }
    [[nodiscard]] std::pair<int, int> cell_of(const Vec2& p) const
    {
        return {static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)),
                static_cast<int>(std::floor((p.y() - lo_.y()) / cell_))};
    }

    void rebuild_point_grid()
    {
        point_grid_.clear();
        for (int i = 0; i < static_cast<int>(pts_.size()); ++i)
            grid_add_point(i);
    }
    void grid_add_point(int i)
    {
        const auto [cx, cy] = cell_of(pts_[i]);
        point_grid_[cell_key(cx, cy)].push_back(i);
    }

    template <class F>
    void for_points_near(const Vec2& c, double radius, F&& f) const
    {
        const auto [x0, y0] = cell_of(c - Vec2(radius, radius));
        const auto [x1, y1] = cell_of(c + Vec2(radius, radius));
        for (int i = x0; i <= x1; ++i)
            for (int j = y0; j <= y1; ++j) {
                const auto it = point_grid_.find(cell_key(i, j));
                if (it == point_grid_.end())
                    continue;
                for (int p : it->second)
                    f(p);
            }
    }

    // --- seeding ------------------------------------------------------------

    void seed_circles()
    {
        for (int c = 0; c < static_cast<int>(circles_.size()); ++c) {
            const auto& circ = circles_[c];
            const int n = circle_node_count(circ.radius, h_);
            const int first = static_cast<int>(pts_.size());
            for (int k = 0; k < n; ++k) {
                const double a = 2.0 * std::numbers::pi * k / n;
                add_point(point_on(c, a), c);
                angle_.push_back(a);
            }
            for (int k = 0; k < n; ++k) {
                const int a = first + k;
                const int b = first + (k + 1) % n;
                const double aa = 2.0 * std::numbers::pi * k / n;
                segments_.push_back({a, b, c, aa, 2.0 * std::numbers::pi * (k + 1) / n, true});
            }
        }
    }

    [[nodiscard]] Vec2 point_on(int circle, double angle) const
    {
        const auto& c = circles_[circle];
        return c.center + c.radius * Vec2(std::cos(angle), std::sin(angle));
    }

    /// Distance from p to the nearest circle.
    [[nodiscard]] double clearance(const Vec2& p) const
    {
        double d = circles_[0].radius - p.norm();
        for (std::size_t c = 1; c < circles_.size(); ++c)
            d = std::min(d, std::abs((p - circles_[c].center).norm() - circles_[c].radius));
        return d;
    }

    void seed_lattice()
    {
        const double r = spec_.shield_radius;
        const double dy = h_ * std::sqrt(3.0) / 2.0;
        const int rows = static_cast<int>(std::ceil(r / dy));
        const int cols = static_cast<int>(std::ceil(r / h_)) + 1;
        for (int j = -rows; j <= rows; ++j) {
            for (int i = -cols; i <= cols; ++i) {
                const double x = (i + ((j & 1) ? 0.5 : 0.0)) * h_ + 0.05 * h_ * hash_unit(i, j, 1);
                const double y = j * dy + 0.05 * h_ * hash_unit(i, j, 2);
                const Vec2 p(x, y);
                if (p.norm() >= r || clearance(p) < 0.55 * h_)
                    continue;
                add_point(p, -1);
                angle_.push_back(0.0);
            }
        }
    }

    // --- encroachment -------------------------------------------------------

    [[nodiscard]] bool encroached(const Segment& s) const
    {
        const Vec2 m = 0.5 * (pts_[s.a] + pts_[s.b]);
        const double rho2 = 0.25 * (pts_[s.a] - pts_[s.b]).squaredNorm();
        bool hit = false;
        for_points_near(m, std::sqrt(rho2), [&](int p) {
            if (p != s.a && p != s.b && (pts_[p] - m).squaredNorm() < rho2 * (1.0 - 1e-12))
                hit = true;
        });
        return hit;
    }

    /// Insert the arc midpoint of segment `si`; returns the new point id.
    int split_segment(int si)
    {
        Segment s = segments_[si];
        segments_[si].alive = false;
        const double mid_angle = 0.5 * (s.angle_a + s.angle_b);
        const int m = add_point(point_on(s.circle, mid_angle), s.circle);
        angle_.push_back(mid_angle);
        segments_.push_back({s.a, m, s.circle, s.angle_a, mid_angle, true});
        segments_.push_back({m, s.b, s.circle, mid_angle, s.angle_b, true});
        return m;
    }

    void split_encroached_all()
    {
        for (int guard = 0; guard < 64; ++guard) {
            rebuild_point_grid();
            std::vector<int> hits;
            for (int i = 0; i < static_cast<int>(segments_.size()); ++i)
                if (segments_[i].alive && encroached(segments_[i]))
                    hits.push_back(i);
            if (hits.empty())
                return;
            for (int i : hits)
                split_segment(i);
        }
        throw MeshError("disk mesher: chord encroachment did not resolve");
    }

    // --- triangulation ------------------------------------------------------

    delaunay::Triangulation triangulate_all() const
    {
        const double r = spec_.shield_radius;
        delaunay::Triangulation tri(Vec2(-r, -r), Vec2(r, r));
        for (const auto& p : pts_)
            tri.insert(p);
        return tri;
    }

    void smooth()
    {
        const auto tri = triangulate_all();
        const int n = static_cast<int>(pts_.size());
        std::vector<Vec2> sum(static_cast<std::size_t>(n), Vec2::Zero());
        std::vector<int> deg(static_cast<std::size_t>(n), 0);
        for (const auto& t : tri.triangles()) {
            if (!t.alive)
                continue;
            for (int k = 0; k < 3; ++k) {
                const int a = t.v[k] - 3;
                const int b = t.v[(k + 1) % 3] - 3;
                if (a < 0 || b < 0)
                    continue;
                // Each interior edge is seen twice; weights cancel out.
                sum[a] += pts_[b];
                sum[b] += pts_[a];
                ++deg[a];
                ++deg[b];
            }
        }
        for (int i = 0; i < n; ++i) {
            if (on_circle_[i] >= 0 || deg[i] == 0)
                continue;
            const Vec2 target = sum[i] / deg[i];
            if (target.norm() < spec_.shield_radius && clearance(target) > 0.3 * h_ &&
                same_side(pts_[i], target))
                pts_[i] = target;
        }
    }

    /// True if a and b lie in the same region (inside the same strand or both outside).
    [[nodiscard]] bool same_side(const Vec2& a, const Vec2& b) const
    {
        for (std::size_t c = 1; c < circles_.size(); ++c) {
            const bool ia = (a - circles_[c].center).norm() < circles_[c].radius;
            const bool ib = (b - circles_[c].center).norm() < circles_[c].radius;
            if (ia != ib)
                return false;
        }
        return true;
    }

    static bool is_bad(const Vec2& a, const Vec2& b, const Vec2& c)
    {
        const double ab = (a - b).squaredNorm();
        const double bc = (b - c).squaredNorm();
        const double ca = (c - a).squaredNorm();
        const double lmin2 = std::min({ab, bc, ca});
        const double area2 = std::abs(signed_area2(a, b, c));
        // R^2 = ab*bc*ca / (4 area2^2) with squared lengths; bad if R/lmin > sqrt(2)
        return ab * bc * ca > 8.0 * lmin2 * area2 * area2;
    }

    void refine()
    {
        delaunay::Triangulation tri = triangulate_all();
        rebuild_point_grid();

        // Segment grid keyed by the cell of the midpoint; diametral radii are
        // below one cell, so a 3x3 neighbourhood query is exhaustive.
        std::unordered_map<std::int64_t, std::vector<int>> seg_grid;
        const auto seg_add = [&](int si) {
            const auto& s = segments_[si];
            const auto [cx, cy] = cell_of(0.5 * (pts_[s.a] + pts_[s.b]));
            seg_grid[cell_key(cx, cy)].push_back(si);
        };
        for (int i = 0; i < static_cast<int>(segments_.size()); ++i)
            if (segments_[i].alive)
                seg_add(i);

        std::vector<int> fresh;
        const auto insert_point = [&](int id) {
            const int v = tri.insert(pts_[id]);
            if (v != id + 3)
                throw MeshError("disk mesher: vertex numbering out of sync");
            grid_add_point(id);
            fresh.insert(fresh.end(), tri.created().begin(), tri.created().end());
        };

        std::deque<int> split_queue;
        const auto split = [&](int si) {
            const int m = split_segment(si);
            insert_point(m);
            const int n = static_cast<int>(segments_.size());
            for (int k = n - 2; k < n; ++k) {
                seg_add(k);
                if (encroached(segments_[k]))
                    split_queue.push_back(k);
            }
        };

        std::deque<std::array<int, 4>> bad;  // triangle id + its vertices
        const auto consider = [&](int t) {
            const auto& tr = tri.triangles()[t];
            if (!tr.alive)
                return;
            for (int v : tr.v)
                if (delaunay::Triangulation::is_super(v))
                    return;
            if (is_bad(tri.points()[tr.v[0]], tri.points()[tr.v[1]], tri.points()[tr.v[2]]))
                bad.push_back({t, tr.v[0], tr.v[1], tr.v[2]});
        };
        for (int t = 0; t < static_cast<int>(tri.triangles().size()); ++t)
            consider(t);

        const std::size_t cap = 20 * pts_.size() + 1000;
        std::size_t insertions = 0;
        while (!bad.empty()) {
            if (++insertions > cap)
                throw MeshError("disk mesher: quality refinement did not terminate");
            const auto item = bad.front();
            bad.pop_front();
            const auto& tr = tri.triangles()[item[0]];
            if (!tr.alive || tr.v[0] != item[1] || tr.v[1] != item[2] || tr.v[2] != item[3])
                continue;
            const Vec2 c = delaunay::circumcenter(tri.points()[tr.v[0]], tri.points()[tr.v[1]],
                                                  tri.points()[tr.v[2]]);

            std::vector<int> hits;
            const auto [cx, cy] = cell_of(c);
            for (int i = cx - 1; i <= cx + 1; ++i)
                for (int j = cy - 1; j <= cy + 1; ++j) {
                    const auto it = seg_grid.find(cell_key(i, j));
                    if (it == seg_grid.end())
                        continue;
                    for (int si : it->second) {
                        const auto& s = segments_[si];
                        if (!s.alive)
                            continue;
                        const Vec2 m = 0.5 * (pts_[s.a] + pts_[s.b]);
                        if ((c - m).squaredNorm() < 0.25 * (pts_[s.a] - pts_[s.b]).squaredNorm())
                            hits.push_back(si);
                    }
                }
            if (hits.empty() && c.norm() >= spec_.shield_radius * (1.0 - 1e-12))
                hits.push_back(nearest_shield_segment(c));

            if (hits.empty()) {
                insert_point(add_point(c, -1));
                angle_.push_back(0.0);
            } else {
                for (int si : hits)
                    if (segments_[si].alive)
                        split(si);
                while (!split_queue.empty()) {
                    const int si = split_queue.front();
                    split_queue.pop_front();
                    if (segments_[si].alive && encroached(segments_[si]))
                        split(si);
                }
                bad.push_back(item);  // retry if it survived
            }
            for (int t : fresh)
                consider(t);
            fresh.clear();
        }
        final_ = std::move(tri);
    }

    [[nodiscard]] int nearest_shield_segment(const Vec2& c) const
    {
        double best = 1e300;
        int idx = -1;
        for (int i = 0; i < static_cast<int>(segments_.size()); ++i) {
            const auto& s = segments_[i];
            if (!s.alive || s.circle != 0)
                continue;
            const double d = (0.5 * (pts_[s.a] + pts_[s.b]) - c).squaredNorm();
            if (d < best) {
                best = d;
                idx = i;
            }
        }
        return idx;
    }

    Mesh extract()
    {
        Mesh mesh;
        mesh.conductor_count = static_cast<int>(spec_.strands.size());
        mesh.nodes = pts_;
        for (const auto& t : final_->triangles()) {
            if (!t.alive)
                continue;
            if (delaunay::Triangulation::is_super(t.v[0]) || delaunay::Triangulation::is_super(t.v[1]) ||
                delaunay::Triangulation::is_super(t.v[2]))
                continue;
            Triangle tri{{t.v[0] - 3, t.v[1] - 3, t.v[2] - 3}, insulation_region};
            for (std::size_t c = 1; c < circles_.size(); ++c) {
                const auto& circ = circles_[c];
                bool inside = true;
                for (int n : tri.nodes)
                    inside = inside && (pts_[n] - circ.center).norm() <= circ.radius * (1.0 + 1e-9);
                if (inside) {
                    tri.region = static_cast<int>(c);
                    break;
                }
            }
            mesh.triangles.push_back(tri);
        }
        return finalize_mesh(std::move(mesh));
    }

    const DiskMeshSpec& spec_;
    double h_;
    std::vector<Circle> circles_;
    std::vector<Vec2> pts_;
    std::vector<int> on_circle_;
    std::vector<double> angle_;
    std::vector<Segment> segments_;
    std::unordered_map<std::int64_t, std::vector<int>> point_grid_;
    Vec2 lo_;
    double cell_;
    int cells_;
    std::optional<delaunay::Triangulation> final_;
};

}  // namespace detail

/// Triangulate the shield disk with strand interfaces resolved on circle
/// nodes. Throws MeshError on invalid layouts.
inline Mesh generate_disk_mesh(const DiskMeshSpec& spec)
{
    validate_disk_spec(spec);
    return detail::DiskMesher(spec).run();
}

/// Smallest interior angle of the mesh [rad].
inline double min_angle(const Mesh& mesh)
{
    double best = std::numbers::pi;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const Vec2& p = mesh.nodes[t.nodes[k]];
            const Vec2 a = mesh.nodes[t.nodes[(k + 1) % 3]] - p;
            const Vec2 b = mesh.nodes[t.nodes[(k + 2) % 3]] - p;
            best = std::min(best, std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)));
        }
    }
    return best;
}

}  // namespace helicable

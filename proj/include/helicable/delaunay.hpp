#pragma once

// Incremental Bowyer-Watson Delaunay triangulation in the plane.
//
// Vertices 0..2 form an enclosing super triangle; triangles touching them are
// excluded from the output. Predicates are evaluated in long double on
// coordinates relative to the query point.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "helicable/error.hpp"
#include "helicable/mesh.hpp"

namespace helicable::delaunay {

inline long double orient(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const long double acx = static_cast<long double>(a.x()) - c.x();
    const long double acy = static_cast<long double>(a.y()) - c.y();
    const long double bcx = static_cast<long double>(b.x()) - c.x();
    const long double bcy = static_cast<long double>(b.y()) - c.y();
    return acx * bcy - acy * bcx;
}

/// Positive if d lies strictly inside the circumcircle of ccw (a, b, c).
inline long double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const long double adx = static_cast<long double>(a.x()) - d.x();
    const long double ady = static_cast<long double>(a.y()) - d.y();
    const long double bdx = static_cast<long double>(b.x()) - d.x();
    const long double bdy = static_cast<long double>(b.y()) - d.y();
    const long double cdx = static_cast<long double>(c.x()) - d.x();
    const long double cdy = static_cast<long double>(c.y()) - d.y();
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return ad * (bdx * cdy - cdx * bdy) - bd * (adx * cdy - cdx * ady) +
           cd * (adx * bdy - bdx * ady);
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const double bx = b.x() - a.x();
    const double by = b.y() - a.y();
    const double cx = c.x() - a.x();
    const double cy = c.y() - a.y();
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return {a.x() + (cy * b2 - by * c2) / d, a.y() + (bx * c2 - cx * b2) / d};
}

class Triangulation {
public:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> nbr{-1, -1, -1};  // nbr[k] lies across the edge opposite v[k]
        bool alive = true;
    };

    /// Super triangle enclosing the box [lo, hi] with a wide margin.
    Triangulation(const Vec2& lo, const Vec2& hi)
    {
        const Vec2 mid = 0.5 * (lo + hi);
        const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
        const double r = 50.0 * span;
        points_.push_back(mid + Vec2(-r * std::sqrt(3.0), -r));
        points_.push_back(mid + Vec2(r * std::sqrt(3.0), -r));
        points_.push_back(mid + Vec2(0.0, 2.0 * r));
        tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true});
    }

    [[nodiscard]] const std::vector<Vec2>& points() const { return points_; }
    [[nodiscard]] const std::vector<Tri>& triangles() const { return tris_; }
    /// Triangles created by the most recent insertion.
    [[nodiscard]] const std::vector<int>& created() const { return created_; }

    static bool is_super(int v) { return v < 3; }

    /// Insert a point and return its vertex id.
    int insert(const Vec2& p)
    {
        const int t0 = locate(p);
        const int id = static_cast<int>(points_.size());
        points_.push_back(p);

        // Grow the cavity of triangles whose circumcircle contains p.
        std::vector<int> cavity{t0};
        std::vector<int> stack{t0};
        mark(t0);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int n : tris_[t].nbr) {
                if (n < 0 || marked(n))
                    continue;
                const auto& v = tris_[n].v;
                if (incircle(points_[v[0]], points_[v[1]], points_[v[2]], p) > 0) {
                    mark(n);
                    cavity.push_back(n);
                    stack.push_back(n);
                }
            }
        }

        // Boundary edges of the cavity; absorb neighbours that would yield
        // degenerate fan triangles.
        struct Edge {
            int a, b, outside;
        };
        std::vector<Edge> boundary;
        for (;;) {
            boundary.clear();
            int absorb = -1;
            for (int t : cavity) {
                const auto& tri = tris_[t];
                for (int k = 0; k < 3 && absorb < 0; ++k) {
                    const int n = tri.nbr[k];
                    if (n >= 0 && marked(n))
                        continue;
                    const int a = tri.v[(k + 1) % 3];
                    const int b = tri.v[(k + 2) % 3];
                    if (orient(points_[a], points_[b], p) <= 0) {
                        if (n < 0)
                            throw MeshError("delaunay: point outside the super triangle");
                        absorb = n;
                    }
                    boundary.push_back({a, b, n});
                }
                if (absorb >= 0)
                    break;
            }
            if (absorb < 0)
                break;
            mark(absorb);
            cavity.push_back(absorb);
        }

        for (int t : cavity) {
            tris_[t].alive = false;
            free_.push_back(t);
        }
        clear_marks(cavity);

        created_.clear();
        // start[a] = new triangle whose boundary edge starts at a.
        std::vector<std::pair<int, int>> by_start;
        by_start.reserve(boundary.size());
        for (const auto& e : boundary) {
            const int t = allocate();
            tris_[t] = Tri{{e.a, e.b, id}, {-1, -1, e.outside}, true};
            if (e.outside >= 0) {
                auto& o = tris_[e.outside];
                for (int k = 0; k < 3; ++k) {
                    const int oa = o.v[(k + 1) % 3];
                    const int ob = o.v[(k + 2) % 3];
                    if (oa == e.b && ob == e.a)
                        o.nbr[k] = t;
                }
            }
            created_.push_back(t);
            by_start.emplace_back(e.a, t);
        }
        std::sort(by_start.begin(), by_start.end());
        const auto find_start = [&](int a) {
            const auto it = std::lower_bound(by_start.begin(), by_start.end(),
                                             std::make_pair(a, -1));
            return it != by_start.end() && it->first == a ? it->second : -1;
        };
        for (int t : created_) {
            auto& tri = tris_[t];
            // Across edge (b, p): the triangle starting at b.
            tri.nbr[0] = find_start(tri.v[1]);
            const int next = tri.nbr[0];
            if (next >= 0)
                tris_[next].nbr[1] = t;  // its edge (p, a') with a' = b
        }
        hint_ = created_.empty() ? hint_ : created_.front();
        return id;
    }

    /// Index of a live triangle containing p (on its closure).
    [[nodiscard]] int locate(const Vec2& p)
    {
        int t = hint_;
        if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive)
            t = first_alive();
        unsigned rot = 0;
        const std::size_t limit = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < limit; ++step) {
            const auto& tri = tris_[t];
            int move = -1;
            for (int i = 0; i < 3; ++i) {
                const int k = static_cast<int>((i + rot) % 3);
                const Vec2& a = points_[tri.v[(k + 1) % 3]];
                const Vec2& b = points_[tri.v[(k + 2) % 3]];
                if (orient(a, b, p) < 0) {
                    move = tri.nbr[k];
                    if (move < 0)
                        throw MeshError("delaunay: point outside the super triangle");
                    break;
                }
            }
            if (move < 0)
                return t;
            t = move;
            ++rot;
        }
        // Walk failed to converge; scan.
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            if (!tris_[i].alive)
                continue;
            const auto& v = tris_[i].v;
            if (orient(points_[v[0]], points_[v[1]], p) >= 0 &&
                orient(points_[v[1]], points_[v[2]], p) >= 0 &&
                orient(points_[v[2]], points_[v[0]], p) >= 0)
                return i;
        }
        throw MeshError("delaunay: point location failed");
    }

private:
    int first_alive() const
    {
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (tris_[i].alive)
                return i;
        throw MeshError("delaunay: empty triangulation");
    }

    int allocate()
    {
        if (!free_.empty()) {
            const int t = free_.back();
            free_.pop_back();
            return t;
        }
        tris_.emplace_back();
        return static_cast<int>(tris_.size()) - 1;
    }

    void mark(int t)
    {
        if (marks_.size() < tris_.size())
            marks_.resize(tris_.size() * 2, 0);
        marks_[t] = 1;
    }
    bool marked(int t) const { return t < static_cast<int>(marks_.size()) && marks_[t]; }
    void clear_marks(const std::vector<int>& ts)
    {
        for (int t : ts)
            marks_[t] = 0;
    }

    std::vector<Vec2> points_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    std::vector<int> created_;
    std::vector<char> marks_;
    int hint_ = 0;
};

}  // namespace helicable::delaunay

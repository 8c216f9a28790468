#pragma once

// Text exports: legacy VTK, probe and loss CSV, loss JSON. All numbers are
// printed with fixed printf formats so identical inputs give identical bytes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "helicable/error.hpp"
#include "helicable/post.hpp"

namespace helicable {

namespace detail {

inline std::string fmt_num(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

/// J and H in Cartesian components on the z = 0 cross-section, evaluated
/// inside triangle t (so values at shared vertices stay element-local).
inline std::pair<Vec3c, Vec3c> element_fields_xyz(const Solution& sol, int t, const std::array<double, 3>& lambda)
{
    const FieldSample s = sol.sample(t, lambda);
    const Vec2 uv = element_geometry(sol.mesh(), t).point(lambda);
    const HelicoidalPoint q(uv.x(), uv.y(), 0.0);
    const Mat3 jac = jacobian_inv_map(q, sol.twist());
    const RegionMaterial& m = sol.materials().region(s.region);
    Vec3c j = Vec3c::Zero();
    if (m.sigma > 0.0) {
        const Vec3c e = -(cplx(0.0, sol.omega()) * s.a + s.grad_v);
        j = m.sigma * (jac.inverse().transpose().cast<cplx>() * e);
    }
    const Vec3c h = m.nu / jac.determinant() * (jac.cast<cplx>() * s.curl_a);
    return {j, h};
}

}  // namespace detail

/// Legacy VTK 2.0 ASCII unstructured grid. Each triangle gets its own three
/// points so discontinuous fields are shown as computed.
inline void write_vtk(std::ostream& out, const Solution& sol, const std::string& title = "helicable fields")
{
    const Mesh& mesh = sol.mesh();
    const int nt = mesh.triangle_count();
    out << "# vtk DataFile Version 2.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << 3 * nt << " double\n";
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) {
            const Vec2& p = mesh.nodes[mesh.triangles[t].nodes[k]];
            out << detail::fmt_num(p.x()) << ' ' << detail::fmt_num(p.y()) << " 0\n";
        }
    out << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (int t = 0; t < nt; ++t)
        out << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
    out << "CELL_TYPES " << nt << '\n';
    for (int t = 0; t < nt; ++t)
        out << "5\n";

    out << "CELL_DATA " << nt << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t)
        out << mesh.triangles[t].region << '\n';

    std::vector<Vec3c> j(static_cast<std::size_t>(3 * nt));
    std::vector<Vec3c> h(static_cast<std::size_t>(3 * nt));
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3> lambda{0.0, 0.0, 0.0};
            lambda[k] = 1.0;
            std::tie(j[3 * t + k], h[3 * t + k]) = detail::element_fields_xyz(sol, t, lambda);
        }
    out << "POINT_DATA " << 3 * nt << '\n';
    auto field = [&](const char* name, const std::vector<Vec3c>& v, bool imag) {
        out << "VECTORS " << name << " double\n";
        for (const Vec3c& f : v) {
            for (int c = 0; c < 3; ++c)
                out << (c ? " " : "") << detail::fmt_num(imag ? f(c).imag() : f(c).real());
            out << '\n';
        }
    };
    field("J_re", j, false);
    field("J_im", j, true);
    field("H_re", h, false);
    field("H_im", h, true);
}

inline void write_probe_csv(std::ostream& out, const std::vector<ProbeSample>& probe)
{
    out << "s,x,y,z,absJ,absH\n";
    for (const auto& p : probe)
        out << detail::fmt_num(p.s) << ',' << detail::fmt_num(p.x.c0) << ',' << detail::fmt_num(p.x.c1) << ','
            << detail::fmt_num(p.x.c2) << ',' << detail::fmt_num(p.abs_j) << ',' << detail::fmt_num(p.abs_h)
            << '\n';
}

inline void write_loss_csv(std::ostream& out, const LossReport& r)
{
    out << "conductor,loss_W_per_m,current_re_A,current_im_A\n";
    for (std::size_t i = 0; i < r.per_conductor.size(); ++i)
        out << i + 1 << ',' << detail::fmt_num(r.per_conductor[i]) << ',' << detail::fmt_num(r.currents[i].real())
            << ',' << detail::fmt_num(r.currents[i].imag()) << '\n';
    out << "total," << detail::fmt_num(r.total) << ",,\n";
}

/// scaled_length: axial length used for the scaled total [m].
inline nlohmann::ordered_json loss_json(const LossReport& r, double scaled_length)
{
    nlohmann::ordered_json j;
    j["per_conductor_W_per_m"] = r.per_conductor;
    j["total_W_per_m"] = r.total;
    j["scaled_length_m"] = scaled_length;
    j["scaled_total_W"] = scale_to_length(r.total, scaled_length);
    std::vector<double> re, im;
    for (const cplx& c : r.currents) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    j["currents_A_re"] = re;
    j["currents_A_im"] = im;
    return j;
}

/// Opens path for writing, throwing IoError with the path on failure.
inline std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    return f;
}

inline void close_output(std::ofstream& f, const std::string& path)
{
    f.close();
    if (!f)
        throw IoError("write to '" + path + "' failed");
}

}  // namespace helicable

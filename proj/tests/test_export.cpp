#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace helicable;

namespace {

const fixture::Problem& coarse()
{
    static const auto p =
        fixture::solve_problem({fixture::thirteen_strands(3e-3), 6.0, 50.0, {}});
    return *p;
}

std::vector<std::string> split_lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

}  // namespace

/// Re-reads the legacy VTK file section by section and checks every count.
TEST(Vtk, StructureParsesBack)
{
    const auto& p = coarse();
    std::ostringstream out;
    write_vtk(out, *p.sol, "test title");
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# vtk DataFile Version 2.0");
    std::getline(in, line);
    EXPECT_EQ(line, "test title");
    std::getline(in, line);
    EXPECT_EQ(line, "ASCII");
    std::getline(in, line);
    EXPECT_EQ(line, "DATASET UNSTRUCTURED_GRID");

    const int nt = p.mesh.triangle_count();
    std::string word, type;
    long n = 0;
    in >> word >> n >> type;
    ASSERT_EQ(word, "POINTS");
    ASSERT_EQ(n, 3L * nt);
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (auto& q : pts) {
        double z = 1.0;
        in >> q.x() >> q.y() >> z;
        EXPECT_EQ(z, 0.0);
    }
    long size = 0;
    in >> word >> n >> size;
    ASSERT_EQ(word, "CELLS");
    ASSERT_EQ(n, nt);
    ASSERT_EQ(size, 4L * nt);
    for (int t = 0; t < nt; ++t) {
        int k = 0, a = 0, b = 0, c = 0;
        in >> k >> a >> b >> c;
        ASSERT_EQ(k, 3);
        EXPECT_GT(signed_area2(pts[a], pts[b], pts[c]), 0.0);
        EXPECT_LE((pts[a] - p.mesh.nodes[p.mesh.triangles[t].nodes[0]]).norm(), 1e-11);
    }
    in >> word >> n;
    ASSERT_EQ(word, "CELL_TYPES");
    for (int t = 0; t < nt; ++t) {
        int ct = 0;
        in >> ct;
        ASSERT_EQ(ct, 5);
    }
    in >> word >> n;
    ASSERT_EQ(word, "CELL_DATA");
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "SCALARS region int 1");
    std::getline(in, line);
    EXPECT_EQ(line, "LOOKUP_TABLE default");
    for (int t = 0; t < nt; ++t) {
        int r = -1;
        in >> r;
        ASSERT_EQ(r, p.mesh.triangles[t].region);
    }
    in >> word >> n;
    ASSERT_EQ(word, "POINT_DATA");
    ASSERT_EQ(n, 3L * nt);
    for (const char* name : {"J_re", "J_im", "H_re", "H_im"}) {
        in >> word;
        ASSERT_EQ(word, "VECTORS");
        in >> word >> type;
        EXPECT_EQ(word, name);
        EXPECT_EQ(type, "double");
        for (long k = 0; k < 3 * n; ++k) {
            std::string v;
            in >> v;
            ASSERT_NO_THROW((void)std::stod(v)) << name;
        }
    }
    in >> word;
    EXPECT_TRUE(in.eof());
}

TEST(Vtk, CurrentVanishesInInsulationVertices)
{
    const auto& p = coarse();
    std::ostringstream out;
    write_vtk(out, *p.sol);
    const auto lines = split_lines(out.str());
    const auto it = std::find(lines.begin(), lines.end(), "VECTORS J_re double");
    ASSERT_NE(it, lines.end());
    for (int t = 0; t < p.mesh.triangle_count(); ++t)
        if (p.mesh.triangles[t].region == insulation_region) {
            for (int k = 0; k < 3; ++k)
                ASSERT_EQ(*(it + 1 + 3 * t + k), "0.000000000e+00 0.000000000e+00 0.000000000e+00");
        }
}

TEST(Csv, ProbeAndLossHeaders)
{
    const auto& p = coarse();
    std::ostringstream probe;
    write_probe_csv(probe, line_probe(*p.sol, CartesianPoint(-0.04, 0, 0), CartesianPoint(0.04, 0, 0), 9));
    const auto pl = split_lines(probe.str());
    ASSERT_EQ(pl.size(), 10u);
    EXPECT_EQ(pl[0], "s,x,y,z,absJ,absH");
    EXPECT_EQ(pl[1], "0.000000000e+00,-4.000000000e-02,0.000000000e+00,0.000000000e+00,nan,nan");
    EXPECT_NE(pl[5].find("0.000000000e+00,0.000000000e+00,0.000000000e+00,"), std::string::npos);

    std::ostringstream loss;
    const LossReport r = compute_losses(*p.sol);
    write_loss_csv(loss, r);
    const auto ll = split_lines(loss.str());
    ASSERT_EQ(ll.size(), 15u);
    EXPECT_EQ(ll[0], "conductor,loss_W_per_m,current_re_A,current_im_A");
    EXPECT_EQ(ll[1].substr(0, 2), "1,");
    EXPECT_EQ(ll[14].substr(0, 6), "total,");
    EXPECT_NEAR(std::stod(ll[14].substr(6)), r.total, 1e-9 * r.total);
}

TEST(Json, LossKeysInOrder)
{
    const LossReport r = compute_losses(*coarse().sol);
    const auto j = loss_json(r, 0.2);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items())
        keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"per_conductor_W_per_m", "total_W_per_m", "scaled_length_m",
                                              "scaled_total_W", "currents_A_re", "currents_A_im"}));
    EXPECT_EQ(j["per_conductor_W_per_m"].size(), 13u);
    EXPECT_DOUBLE_EQ(j["scaled_total_W"].get<double>(), 0.2 * r.total);
    EXPECT_THROW(loss_json(r, 0.0), ConfigError);
}

TEST(Export, IndependentRunsGiveIdenticalBytes)
{
    const auto a = fixture::solve_problem({fixture::thirteen_strands(3e-3), 6.0, 50.0, {}});
    const auto b = fixture::solve_problem({fixture::thirteen_strands(3e-3), 6.0, 50.0, {}});
    std::ostringstream va, vb, pa, pb, la, lb;
    write_vtk(va, *a->sol);
    write_vtk(vb, *b->sol);
    EXPECT_TRUE(va.str() == vb.str());
    const CartesianPoint s(-0.03, 0.001, 0.05), e(0.03, -0.002, 0.05);
    write_probe_csv(pa, line_probe(*a->sol, s, e, 101));
    write_probe_csv(pb, line_probe(*b->sol, s, e, 101));
    EXPECT_TRUE(pa.str() == pb.str());
    write_loss_csv(la, compute_losses(*a->sol));
    write_loss_csv(lb, compute_losses(*b->sol));
    EXPECT_EQ(la.str(), lb.str());
}

TEST(Export, OutputFileErrors)
{
    EXPECT_THROW(open_output("/nonexistent-dir/sub/file.txt"), IoError);
}

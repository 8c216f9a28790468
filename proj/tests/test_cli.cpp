#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "helicable/run.hpp"
#include "support/fixtures.hpp"

using namespace helicable;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Fresh scratch directory per test, removed afterwards.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("helicable_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    static json base_config()
    {
        return json::parse(R"({
            "mesh": {"builtin": {"shield_radius": 0.01, "h": 0.002,
                                 "strands": [{"center": [0, 0], "radius": 0.005}]}},
            "twist": {"alpha": 1.0, "beta": 0.2},
            "materials": {"insulation": {"mu_r": 1}, "conductor": {"sigma": 5.8e7, "mu_r": 1}},
            "excitation": {"frequency": 50, "currents": [[1.0, 0.0]]},
            "probes": [{"name": "x", "start": [-0.009, 0, 0], "end": [0.009, 0, 0], "samples": 11}],
            "output": {"directory": "unused", "vtk": true}
        })");
    }

    fs::path write_config(const json& j, const std::string& name = "config.json") const
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << j.dump(2);
        return p;
    }

    int run(const fs::path& cfg, const fs::path& out, bool dry = false)
    {
        RunOptions o;
        o.dry_run = dry;
        o.output_directory = out;
        stdout_.str("");
        stderr_.str("");
        return run_main(cfg, o, stdout_, stderr_);
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream stdout_;
    std::ostringstream stderr_;
};

}  // namespace

TEST_F(CliTest, ParsesTheShippedConfigs)
{
    for (const char* name : {"single_strand.json", "paper_13_strand.json"}) {
        const RunConfig c = load_run_config(fs::path(HELICABLE_SOURCE_DIR) / "configs" / name);
        EXPECT_TRUE(c.builtin_mesh.has_value()) << name;
        EXPECT_EQ(c.currents.size(), static_cast<std::size_t>(c.conductor_count())) << name;
        EXPECT_GT(c.frequency, 0.0);
    }
    const RunConfig p = load_run_config(fs::path(HELICABLE_SOURCE_DIR) / "configs" / "paper_13_strand.json");
    EXPECT_EQ(p.conductor_count(), 13);
    EXPECT_DOUBLE_EQ(p.twist.tau(), 10.0 * pi);
    EXPECT_FALSE(p.assumptions.empty());
}

TEST_F(CliTest, ConfigErrorsNameTheOffendingKey)
{
    struct Case {
        std::string pointer;
        json value;
        std::string message;
    };
    const std::vector<Case> cases = {
        {"/excitation/frequency", 0.0, "config.excitation.frequency: must be positive"},
        {"/excitation/currents", json::array({1.0, 2.0}), "config.excitation.currents: expected 1 entries, got 2"},
        {"/materials/conductor/sigma", -1.0, "config.materials.conductor: sigma must be positive"},
        {"/twist/beta", 0.0, "beta"},
        {"/solver", json{{"tol", 2.0}}, "config.solver.tol: must lie in (0, 1)"},
        {"/extra", 1, "config.extra: unknown key"},
        {"/mesh/builtin/spacing", 1, "config.mesh.builtin.spacing: unknown key"},
        {"/probes/0/samples", 1, "config.probes[0].samples: expected an integer in [2, 1000000]"},
        {"/tags", json{{"1", "boundary"}}, "'tags' only applies to MSH meshes"},
    };
    for (const auto& c : cases) {
        SCOPED_TRACE(c.pointer);
        json j = base_config();
        j[json::json_pointer(c.pointer)] = c.value;
        const fs::path out = dir_ / "out";
        EXPECT_EQ(run(write_config(j), out), exit_code::config);
        EXPECT_NE(stderr_.str().find(c.message), std::string::npos) << stderr_.str();
        EXPECT_EQ(stderr_.str().rfind("helicable: config error: ", 0), 0u);
        EXPECT_FALSE(fs::exists(out));
    }
}

TEST_F(CliTest, UnreadableOrInvalidConfig)
{
    EXPECT_EQ(run(dir_ / "missing.json", dir_ / "out"), exit_code::config);
    std::ofstream(dir_ / "bad.json") << "{ not json";
    EXPECT_EQ(run(dir_ / "bad.json", dir_ / "out"), exit_code::config);
    EXPECT_NE(stderr_.str().find("is not valid JSON"), std::string::npos);
}

TEST_F(CliTest, MeshErrorsExitWith20)
{
    json j = base_config();
    j["mesh"]["builtin"]["strands"][0]["center"] = {0.008, 0.0};
    EXPECT_EQ(run(write_config(j), dir_ / "out"), exit_code::config);
    EXPECT_NE(stderr_.str().find("not strictly inside the shield"), std::string::npos) << stderr_.str();

    std::ofstream(dir_ / "broken.msh") << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0 0.5\n$EndNodes\n";
    json m = base_config();
    m["mesh"] = {{"msh", "broken.msh"}};
    m["tags"] = {{"1", "boundary"}, {"2", "insulation"}, {"101", "conductor:1"}};
    EXPECT_EQ(run(write_config(m), dir_ / "out"), exit_code::mesh);
    EXPECT_NE(stderr_.str().find("line 6: broken.msh: non-zero third coordinate"), std::string::npos)
        << stderr_.str();

    m["mesh"] = {{"msh", "absent.msh"}};
    EXPECT_EQ(run(write_config(m), dir_ / "out"), exit_code::mesh);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, MshMeshRunsEndToEnd)
{
    std::ofstream(dir_ / "square.msh") << fixture::square_four_msh();
    json m = base_config();
    m["mesh"] = {{"msh", "square.msh"}};
    m["tags"] = {{"1", "boundary"}, {"2", "insulation"}};
    m["excitation"]["currents"] = json::array();
    m["materials"].erase("conductor");
    m["probes"] = json::array();
    // no conductor, no source: a zero field that still solves
    EXPECT_EQ(run(write_config(m), dir_ / "out"), exit_code::ok) << stderr_.str();
    EXPECT_TRUE(fs::exists(dir_ / "out" / "losses.json"));
}

TEST_F(CliTest, ToleranceFailureExitsWith40AndWritesNothing)
{
    json j = base_config();
    j["solver"] = {{"tol", 1e-30}};
    EXPECT_EQ(run(write_config(j), dir_ / "out"), exit_code::tolerance);
    EXPECT_EQ(stderr_.str().rfind("helicable: solver tolerance: relative residual ", 0), 0u) << stderr_.str();
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, SingularSystemExitsWith30)
{
    EXPECT_EQ(exit_code_for(SingularSystemError("x")), exit_code::singular);
    EXPECT_EQ(exit_code_for(SolverToleranceError("x")), exit_code::tolerance);
    EXPECT_EQ(exit_code_for(IoError("x")), exit_code::io);
    EXPECT_EQ(exit_code_for(MshError(3, "x")), exit_code::mesh);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), exit_code::internal);

    json j = base_config();
    j["materials"]["insulation"] = {{"mu_r", 1e15}};
    EXPECT_EQ(run(write_config(j), dir_ / "out"), exit_code::singular) << stderr_.str();
    EXPECT_EQ(stderr_.str().rfind("helicable: singular system: ", 0), 0u) << stderr_.str();
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, UnwritableOutputExitsWith50)
{
    const fs::path blocker = dir_ / "file";
    std::ofstream(blocker) << "x";
    EXPECT_EQ(run(write_config(base_config()), blocker / "out"), exit_code::io);
    EXPECT_EQ(stderr_.str().rfind("helicable: i/o error: ", 0), 0u);
}

TEST_F(CliTest, DryRunPrintsSummariesOnly)
{
    const fs::path out = dir_ / "out";
    EXPECT_EQ(run(write_config(base_config()), out, true), exit_code::ok);
    EXPECT_FALSE(fs::exists(out));
    const std::string s = stdout_.str();
    ASSERT_EQ(s.rfind("mesh {", 0), 0u) << s;
    const auto second = s.find("\ndofs {");
    ASSERT_NE(second, std::string::npos);
    const json d = json::parse(s.substr(second + 6));
    EXPECT_EQ(d["conductor_constants"], 1);
    EXPECT_EQ(d["total"].get<int>(), d["edge_free"].get<int>() + d["node_free"].get<int>() + 1);
}

TEST_F(CliTest, FullRunWritesEveryArtifactAndManifest)
{
    json j = base_config();
    j["assumptions"] = {{"shield", "perfect conductor"}};
    j["notes"] = "unit test";
    const fs::path cfg = write_config(j);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run(cfg, out), exit_code::ok) << stderr_.str();
    EXPECT_NE(stdout_.str().find("total loss "), std::string::npos);
    const std::vector<std::string> expected = {"dof_summary.json", "fields.vtk",     "losses.csv",
                                               "losses.json",      "manifest.json",  "mesh_summary.json",
                                               "probe_x.csv",      "solve_report.json"};
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(out))
        found.push_back(e.path().filename().string());
    std::sort(found.begin(), found.end());
    EXPECT_EQ(found, expected);

    const json man = json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(man["tool"], "helicable");
    EXPECT_EQ(man["version"], version);
    EXPECT_EQ(man["config_hash_fnv1a64"], hex64(fnv1a64(j.dump())));
    EXPECT_EQ(man["assumptions"]["shield"], "perfect conductor");
    EXPECT_EQ(man["notes"], "unit test");
    EXPECT_DOUBLE_EQ(man["tau_rad_per_m"].get<double>(), 5.0);
    EXPECT_EQ(man["artifacts"].size(), expected.size());

    const json loss = json::parse(slurp(out / "losses.json"));
    EXPECT_DOUBLE_EQ(loss["scaled_length_m"].get<double>(), 0.2);
    EXPECT_GT(loss["total_W_per_m"].get<double>(), 0.0);
    const json rep = json::parse(slurp(out / "solve_report.json"));
    EXPECT_LT(rep["relative_residual"].get<double>(), 1e-10);
}

TEST_F(CliTest, HashIgnoresFormattingButNotValues)
{
    const json j = base_config();
    const fs::path a = dir_ / "a.json";
    const fs::path b = dir_ / "b.json";
    std::ofstream(a) << j.dump();
    std::ofstream(b) << j.dump(8);
    EXPECT_EQ(load_run_config(a).hash, load_run_config(b).hash);
    json k = j;
    k["excitation"]["frequency"] = 60;
    std::ofstream(b) << k.dump();
    EXPECT_NE(load_run_config(a).hash, load_run_config(b).hash);
}

TEST_F(CliTest, RerunIsByteIdenticalExceptWallTime)
{
    const fs::path cfg = write_config(base_config());
    ASSERT_EQ(run(cfg, dir_ / "one"), exit_code::ok);
    ASSERT_EQ(run(cfg, dir_ / "two"), exit_code::ok);
    for (const auto& e : fs::directory_iterator(dir_ / "one")) {
        const std::string name = e.path().filename().string();
        const std::string x = slurp(e.path());
        const std::string y = slurp(dir_ / "two" / name);
        if (name == "solve_report.json") {
            json jx = json::parse(x);
            json jy = json::parse(y);
            jx.erase("wall_time_s");
            jy.erase("wall_time_s");
            EXPECT_EQ(jx, jy);
        } else {
            EXPECT_TRUE(x == y) << name;
        }
    }
}

TEST_F(CliTest, GaugeSeedFromConfigKeepsLosses)
{
    json j = base_config();
    ASSERT_EQ(run(write_config(j), dir_ / "a"), exit_code::ok);
    j["gauge"] = {{"tree_shuffle_seed", 5}};
    ASSERT_EQ(run(write_config(j), dir_ / "b"), exit_code::ok);
    const double la = json::parse(slurp(dir_ / "a" / "losses.json"))["total_W_per_m"];
    const double lb = json::parse(slurp(dir_ / "b" / "losses.json"))["total_W_per_m"];
    EXPECT_NEAR(la, lb, 1e-8 * la);
    EXPECT_EQ(json::parse(slurp(dir_ / "b" / "manifest.json"))["gauge"]["tree_shuffle_seed"], 5);
}

/// The installed binary: exit codes through a real process.
TEST_F(CliTest, BinaryExitCodes)
{
    const std::string exe = HELICABLE_CLI_PATH;
    auto status = [](const std::string& cmd) {
        const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status(exe + " --version"), 0);
    EXPECT_EQ(status(exe), exit_code::config);
    EXPECT_EQ(status(exe + " run"), exit_code::config);
    EXPECT_EQ(status(exe + " run " + (dir_ / "none.json").string()), exit_code::config);
    const fs::path cfg = write_config(base_config());
    EXPECT_EQ(status(exe + " run " + cfg.string() + " --dry-run"), 0);
    EXPECT_EQ(status(exe + " run " + cfg.string() + " --output " + (dir_ / "bin").string()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "bin" / "manifest.json"));
}

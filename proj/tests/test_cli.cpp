#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "essmc/io.hpp"

namespace fs = std::filesystem;
using essmc::json;

namespace {

fs::path kRoot;

int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + ESSMC_CLI_PATH + " " + args + " > " + (kRoot / "stdout.txt").string() +
                            " 2> " + (kRoot / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        kRoot = fs::temp_directory_path() /
                ("essmc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(kRoot);
        fs::create_directories(kRoot);
    }

    static std::string dir(const std::string& name) { return (kRoot / name).string(); }

    static void expect_error_line(int code)
    {
        const std::string err = slurp(kRoot / "stderr.txt");
        std::string last = err.substr(0, err.find_last_not_of('\n') + 1);
        last = last.substr(last.rfind('\n') + 1);
        const json j = json::parse(last);
        EXPECT_EQ(j.at("exit_code").get<int>(), code);
        EXPECT_TRUE(j.contains("message"));
    }

    static void write(const std::string& name, const std::string& text) { std::ofstream(kRoot / name) << text; }
};

}  // namespace

TEST_F(Cli, TuneWritesGridCsv)
{
    ASSERT_EQ(run("tune --delta-ratio 0.3 --grid 200 --out " + dir("map.csv")), 0);
    const std::string csv = slurp(kRoot / "map.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "beta1,beta2,J,Jhat,objective,feasible");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 200 * 199 + 1);
    EXPECT_TRUE(fs::exists(kRoot / "map.optimum.json"));
    EXPECT_TRUE(fs::exists(kRoot / "map.manifest.json"));
}

TEST_F(Cli, ChatterReportsFrequency)
{
    ASSERT_EQ(run("chatter --mu 0.01 --beta1 0.85 --beta2 0.27 --out " + dir("ch")), 0);
    const json j = json::parse(slurp(kRoot / "ch" / "chatter.json"));
    EXPECT_NEAR(j.at("omega_c").get<double>(), 75.19, 0.01);
    EXPECT_NEAR(j.at("closed_form").at("omega_c").get<double>(), 75.19, 0.01);
}

TEST_F(Cli, SimulateIsDeterministic)
{
    write("scan.json", R"({"scenario": {"kind": "scan", "timing": {"t_end": 0.05, "record_stride": 100}}})");
    ASSERT_EQ(run("simulate --config " + dir("scan.json") + " --seed 42 --out " + dir("a")), 0);
    ASSERT_EQ(run("simulate --config " + dir("scan.json") + " --seed 42 --out " + dir("b")), 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "a")) {
        const auto name = e.path().filename();
        if (name == "manifest.json") continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(kRoot / "b" / name)) << name;
    }
    EXPECT_EQ(files, 2);
    const json m = json::parse(slurp(kRoot / "a" / "manifest.json"));
    EXPECT_EQ(m.at("seed").get<int>(), 42);
    EXPECT_EQ(m.at("command"), "simulate");
    EXPECT_EQ(m.at("outputs").size(), 2u);
}

TEST_F(Cli, ManifestReplayReproducesOutputs)
{
    ASSERT_EQ(run("simulate --controller es-sosmc --delta 0.2 --disturbance seeded-noise --amplitude 0.2 "
                  "--seed 7 --t-end 2 --out " + dir("first")),
              0);
    ASSERT_EQ(run("simulate --config " + dir("first/manifest.json") + " --out " + dir("replay")), 0);
    EXPECT_EQ(slurp(kRoot / "first" / "trace.csv"), slurp(kRoot / "replay" / "trace.csv"));
    EXPECT_EQ(slurp(kRoot / "first" / "trace.json"), slurp(kRoot / "replay" / "trace.json"));
    EXPECT_EQ(run("tune --config " + dir("first/manifest.json") + " --out " + dir("x.csv")), 2);
}

TEST_F(Cli, UnknownFlagExitCode)
{
    EXPECT_EQ(run("simulate --no-such-flag"), 1);
    expect_error_line(1);
    EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Cli, MalformedConfigExitCode)
{
    write("bad.json", "{\"simulation\": {\"dt\": ");
    EXPECT_EQ(run("simulate --config " + dir("bad.json") + " --out " + dir("o")), 2);
    expect_error_line(2);
    write("unknown.json", R"({"simulation": {"dtt": 0.1}})");
    EXPECT_EQ(run("simulate --config " + dir("unknown.json") + " --out " + dir("o")), 2);
    EXPECT_EQ(run("simulate --dt -1 --out " + dir("o")), 2);
}

TEST_F(Cli, InfeasibleExitCode)
{
    EXPECT_EQ(run("validate --controller es-sosmc --beta1 0.3 --beta2 0.2 --delta 0.3 --out " + dir("v")), 3);
    expect_error_line(3);
    const json report = json::parse(slurp(kRoot / "stdout.txt"));
    EXPECT_FALSE(report.at("feasible").get<bool>());
    EXPECT_EQ(run("simulate --controller sosmc --beta1 0.1 --delta 0.3 --out " + dir("s")), 3);
    EXPECT_EQ(run("validate --controller es-sosmc --beta1 0.85 --beta2 0.27 --delta 0.3 --out " + dir("v")), 0);
}

TEST_F(Cli, DryRunWritesOnlyManifest)
{
    ASSERT_EQ(run("compare --t-end 0.01 --dry-run --out " + dir("dry")), 0);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(kRoot / "dry")) names.push_back(e.path().filename().string());
    ASSERT_EQ(names.size(), 1u);
    EXPECT_EQ(names[0], "manifest.json");
    EXPECT_TRUE(json::parse(slurp(kRoot / "dry" / "manifest.json")).at("dry_run").get<bool>());
}

TEST_F(Cli, OutputDirectoryFromEnvironment)
{
    ASSERT_EQ(run("fueloptimal --start 1 0", "ESSMC_OUT_DIR=" + dir("env")), 0);
    EXPECT_TRUE(fs::exists(kRoot / "env" / "s1_fuel_optimal.csv"));
    const json j = json::parse(slurp(kRoot / "env" / "fueloptimal.json"));
    EXPECT_TRUE(j.at("runs")[0].at("fuel_optimal").at("coasted").get<bool>());
}

TEST_F(Cli, SurfaceEmitsProfileAndPsd)
{
    ASSERT_EQ(run("surface --duration 20 --seed 3 --out " + dir("surf")), 0);
    const std::string prof = slurp(kRoot / "surf" / "profile.csv");
    EXPECT_EQ(prof.substr(0, prof.find('\n')), "t,y,x0,dx0");
    EXPECT_TRUE(fs::exists(kRoot / "surf" / "psd.csv"));
}

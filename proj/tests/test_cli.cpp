#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "squeeze/config.hpp"
#include "squeeze/report.hpp"

namespace fs = std::filesystem;
using namespace squeeze;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path() / ("squeeze_cli_" + std::to_string(::getpid()) + "_" +
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }

    void TearDown() override { fs::remove_all(dir); }

    // runs the tool inside the scratch directory, so default manifests land there
    int run(const std::string& args)
    {
        const std::string cmd = "cd '" + dir.string() + "' && '" SQUEEZE_CLI_PATH "' " + args + " >stdout.txt 2>stderr.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const
    {
        std::ifstream in(dir / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }

    static std::string sample(const std::string& name) { return std::string("'") + SQUEEZE_SAMPLES_DIR "/" + name + "'"; }

    fs::path dir;
};

} // namespace

TEST_F(Cli, SublemmaSucceeds)
{
    EXPECT_EQ(run("sublemma --delta 0.5 --out gap.json"), 0) << read("stderr.txt");
    const json j = json::parse(read("gap.json"));
    const double a = 1 / 1.5, b = 0.5;
    EXPECT_NEAR(j["gap"].get<double>(), std::log((1 + a) / (1 - a)) - std::log((1 + b) / (1 - b)), 1e-15);
    // the effective config is written next to the outputs
    const RunConfig m = parse_config(json::parse(read("sublemma.manifest.json")));
    EXPECT_EQ(m.params["delta"], 0.5);
}

TEST_F(Cli, UnknownConfigKeyIsAConfigError)
{
    write("bad.json", R"({"command": "sublemma", "params": {"dleta": 0.1}})");
    EXPECT_EQ(run("sublemma --config bad.json"), 2);
    EXPECT_NE(read("stderr.txt").find("params.dleta"), std::string::npos);
}

TEST_F(Cli, BadFlagsAreConfigErrors)
{
    EXPECT_EQ(run("sublemma --delta abc"), 2);
    EXPECT_EQ(run("slit --domain missing.json --x 0,0"), 2);
    EXPECT_EQ(run("nosuchcommand"), 2);
    EXPECT_EQ(run("slit --x 0,0"), 2);
}

TEST_F(Cli, FlagsOverrideTheConfigFile)
{
    write("cfg.json", R"({"command": "sublemma", "params": {"delta": 0.25}})");
    EXPECT_EQ(run("sublemma --config cfg.json --delta 0.125 --manifest m.json"), 0);
    EXPECT_EQ(parse_config(json::parse(read("m.json"))).params["delta"], 0.125);
}

TEST_F(Cli, UnreachableToleranceIsASolverFailure)
{
    EXPECT_EQ(run("slit --domain " + sample("two_disks.json") + " --x 0,0 --tol 1e-15 --max-refinements 0"), 3);
    EXPECT_NE(read("stderr.txt").find("residual-above-tol"), std::string::npos);
}

TEST_F(Cli, SlitWritesASolution)
{
    EXPECT_EQ(run("slit --domain " + sample("two_disks.json") + " --x 0,0 --out sol.json"), 0) << read("stderr.txt");
    const json j = json::parse(read("sol.json"));
    EXPECT_TRUE(j.is_object());
}

TEST_F(Cli, RmapCsv)
{
    EXPECT_EQ(run("rmap --domain " + sample("two_disks.json") + " --grid -0.2,0.2,-0.2,0.2,2,2 --csv f.csv --svg f.svg"), 0)
        << read("stderr.txt");
    const auto rows = parse_csv(read("f.csv"));
    EXPECT_EQ(rows.size(), 5u);
    EXPECT_NE(read("f.svg").find("class=\"heat\""), std::string::npos);
}

TEST_F(Cli, ThresholdMissIsACertificateFailure)
{
    EXPECT_EQ(run("thm1 --eps 0.5 --depth 1 --schedule 4 --samples 4 --threshold 0.99 --report r.csv"), 4)
        << read("stderr.txt");
    const auto rows = parse_csv(read("r.csv"));
    EXPECT_GT(rows.size(), 1u);
}

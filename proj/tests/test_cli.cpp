#include "peepopt/serialize.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

using namespace peepopt;

namespace {

struct Sandbox : ::testing::Test {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / ("peepopt_cli_" + std::to_string(::getpid()));

    void SetUp() override
    {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        write_text(dir / "noise.json", R"({"p1": 0.001, "p2": 0.01})");
        write_text(dir / "quick.json", R"({"shots_per_circuit": 128,
            "expander": {"restarts": 2, "max_iterations": 60},
            "recombiner": {"c": 2, "max_iterations": 60}})");
        write_text(dir / "small.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\n"
                                       "ry(0.4) q[0];\ncx q[0],q[1];\nrz(0.2) q[1];\ncx q[1],q[2];\ncx q[0],q[1];\n");
    }
    void TearDown() override { std::filesystem::remove_all(dir); }

    auto run(std::string const& args) const -> int
    {
        auto const cmd = std::string{PEEPOPT_CLI_PATH} + " " + args + " > " + (dir / "stdout.txt").string() + " 2> "
                         + (dir / "stderr.txt").string();
        int const status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    auto common() const -> std::string
    {
        return "--noise " + (dir / "noise.json").string() + " --config " + (dir / "quick.json").string();
    }
};

} // namespace

TEST_F(Sandbox, RunSucceedsAndWritesReport)
{
    EXPECT_EQ(run("run --circuit " + (dir / "small.qasm").string() + " --out " + (dir / "out").string() + " "
                  + common() + " --configs basic,pop"),
              0);
    auto const j = json::parse(read_text(dir / "out" / "report.json"));
    EXPECT_EQ(j.at("status"), "ok");
    ASSERT_EQ(j.at("circuits").at(0).at("configs").size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "summary.csv"));
}

TEST_F(Sandbox, ExpandThenRecombineFromCache)
{
    EXPECT_EQ(run("expand --circuit " + (dir / "small.qasm").string() + " --out " + (dir / "cache.json").string()
                  + " " + common()),
              0);
    EXPECT_EQ(run("recombine --cache " + (dir / "cache.json").string() + " --out " + (dir / "rec").string() + " "
                  + common() + " --configs cascade"),
              0);
    EXPECT_TRUE(std::filesystem::exists(dir / "rec" / "report.json"));
}

TEST_F(Sandbox, PartitionPrintsBlocks)
{
    EXPECT_EQ(run("partition --circuit " + (dir / "small.qasm").string() + " --k 2"), 0);
    auto const j = json::parse(read_text(dir / "stdout.txt"));
    EXPECT_EQ(j.at("num_blocks").get<std::size_t>(), j.at("blocks").size());
    EXPECT_EQ(run("partition --circuit " + (dir / "small.qasm").string() + " --k 7"), 1);
}

TEST_F(Sandbox, MetricsOfCountFiles)
{
    write_text(dir / "a.json", R"({"00": 50, "11": 50})");
    write_text(dir / "b.json", R"({"00": 100})");
    EXPECT_EQ(run("metrics --a " + (dir / "a.json").string() + " --b " + (dir / "b.json").string()), 0);
    auto const j = json::parse(read_text(dir / "stdout.txt"));
    EXPECT_NEAR(j.at("tvd").get<double>(), 0.5, 1e-12);
    write_text(dir / "c.json", R"({"0": 1})");
    EXPECT_EQ(run("metrics --a " + (dir / "a.json").string() + " --b " + (dir / "c.json").string()), 1);
}

TEST_F(Sandbox, InputErrorsExitWithOne)
{
    auto const circuit = " --circuit " + (dir / "small.qasm").string();
    auto const out = " --out " + (dir / "o").string();
    EXPECT_EQ(run("run" + circuit + out + " --noise " + (dir / "absent.json").string()), 1);
    write_text(dir / "bad_noise.json", R"({"p1": 0.1, "gamma": 3})");
    EXPECT_EQ(run("run" + circuit + out + " --noise " + (dir / "bad_noise.json").string()), 1);
    write_text(dir / "bad.qasm", "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n");
    EXPECT_EQ(run("run --circuit " + (dir / "bad.qasm").string() + out + " " + common()), 1);
    EXPECT_EQ(run("run" + circuit + out + " " + common() + " --configs bogus"), 1);
    EXPECT_EQ(run("run" + out + " " + common()), 1);
    EXPECT_EQ(run("frobnicate"), 1);
}

TEST_F(Sandbox, PipelineFailureExitsWithTwo)
{
    // Thirteen qubits exceed the density-matrix simulator.
    std::string text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[13];\n";
    for (int q = 0; q < 13; ++q) { text += "rx(0.1) q[" + std::to_string(q) + "];\n"; }
    write_text(dir / "wide.qasm", text);
    EXPECT_EQ(run("run --circuit " + (dir / "wide.qasm").string() + " --out " + (dir / "w").string() + " " + common()
                  + " --configs basic"),
              2);
    auto const j = json::parse(read_text(dir / "w" / "report.json"));
    EXPECT_EQ(j.at("status"), "failed");
    EXPECT_EQ(j.at("error").at("stage"), "ideal");
}

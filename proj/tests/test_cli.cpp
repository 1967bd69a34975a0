#include "dicke/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;
using dicke::io::Json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(DICKE_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dicke_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
                std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path config(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        dicke::io::atomic_write(p, text);
        return p;
    }

    std::string args(const fs::path& cfg, const std::string& sub, const fs::path& out) const {
        return "--config " + cfg.string() + " --out " + out.string() + " " + sub;
    }

    fs::path dir_;
};

const char* kSmall = R"({"model": {"atoms": 2, "drive": 1.0},
                        "disorder": {"kind": "equidistant", "spread": 0.3},
                        "sweep": {"drive": {"values": [0.5, 1.0]}, "spread": {"values": [0.0, 0.3]}},
                        "dynamics": {"times": {"spacing": "linear", "start": 0, "stop": 40, "count": 81},
                                     "fit_window": [5, 40]},
                        "symmetry": {"atoms": [2, 3]}})";

} // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("spectrum --help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("--bogus spectrum").code, 2);
    EXPECT_EQ(run("--config /nonexistent.json spectrum").code, 2);
}

TEST_F(CliTest, InvalidConfigWritesNothing) {
    const auto cfg = config("bad.json", R"({"model": {"atoms": 0}})");
    const auto out = dir_ / "out";
    const auto r = run(args(cfg, "spectrum", out));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("model.atoms"), std::string::npos);
    EXPECT_FALSE(fs::exists(out));
    const auto unknown = config("unknown.json", R"({"model": {"atom": 4}})");
    EXPECT_EQ(run(args(unknown, "spectrum", out)).code, 2);
    const auto expl = config("expl.json", R"({"model": {"atoms": 2}, "disorder": {"kind": "explicit", "values": [0, 1]}})");
    EXPECT_EQ(run(args(expl, "sweep", out)).code, 2);
}

TEST_F(CliTest, SpectrumOutputsAreDeterministic) {
    const auto cfg = config("small.json", kSmall);
    ASSERT_EQ(run(args(cfg, "spectrum", dir_ / "a")).code, 0);
    ASSERT_EQ(run(args(cfg, "spectrum", dir_ / "b")).code, 0);
    const auto ja = dicke::io::read_file(dir_ / "a" / "spectrum.json");
    EXPECT_EQ(ja, dicke::io::read_file(dir_ / "b" / "spectrum.json"));
    EXPECT_EQ(dicke::io::read_file(dir_ / "a" / "spectrum.csv"), dicke::io::read_file(dir_ / "b" / "spectrum.csv"));
    const Json j = Json::parse(ja);
    EXPECT_EQ(j["schema"], "dicke.spectrum/1");
    EXPECT_EQ(j["eigenvalues"].size(), 16u);
    EXPECT_EQ(j["config"]["disorder"]["detunings"].size(), 2u);
    const auto csv = dicke::io::read_file(dir_ / "a" / "spectrum.csv");
    EXPECT_EQ(csv.rfind("re,im\r\n", 0), 0u);
}

TEST_F(CliTest, SweepPointMatchesSpectrum) {
    const auto cfg = config("small.json", kSmall);
    ASSERT_EQ(run(args(cfg, "sweep", dir_ / "s")).code, 0);
    ASSERT_EQ(run(args(cfg, "spectrum", dir_ / "p")).code, 0);
    const Json spec = Json::parse(dicke::io::read_file(dir_ / "p" / "spectrum.json"));
    const std::string sweep = dicke::io::read_file(dir_ / "s" / "sweep.csv");
    EXPECT_EQ(sweep.rfind("omega_drive,delta_omega,re_lambda1,im_lambda1,subradiant_count,errors\r\n", 0), 0u);
    // (drive 1, spread 0.3) is the configured model point
    const std::string re = dicke::io::format_number(spec["classification"]["lambda1"][0].get<double>());
    EXPECT_NE(sweep.find("\r\n1,0.3," + re + ","), std::string::npos) << sweep;
    EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep_eigenvalues.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep_timing.csv"));
    EXPECT_EQ(Json::parse(dicke::io::read_file(dir_ / "s" / "sweep.json"))["failed_points"], 0);
}

TEST_F(CliTest, SweepIndependentOfThreadCount) {
    const auto cfg = config("small.json", kSmall);
    ASSERT_EQ(run("--threads 1 " + args(cfg, "sweep", dir_ / "t1")).code, 0);
    ASSERT_EQ(run("--threads 2 " + args(cfg, "sweep", dir_ / "t2")).code, 0);
    EXPECT_EQ(dicke::io::read_file(dir_ / "t1" / "sweep.csv"), dicke::io::read_file(dir_ / "t2" / "sweep.csv"));
    EXPECT_EQ(dicke::io::read_file(dir_ / "t1" / "sweep_eigenvalues.csv"),
              dicke::io::read_file(dir_ / "t2" / "sweep_eigenvalues.csv"));
}

TEST_F(CliTest, SeededGaussianDisorder) {
    const auto cfg = config("g.json", R"({"model": {"atoms": 2, "drive": 1.0},
                                          "disorder": {"kind": "gaussian", "scale": 1.0, "seed": 3}})");
    ASSERT_EQ(run(args(cfg, "spectrum", dir_ / "a")).code, 0);
    ASSERT_EQ(run(args(cfg, "spectrum", dir_ / "b")).code, 0);
    ASSERT_EQ(run("--seed 4 " + args(cfg, "spectrum", dir_ / "c")).code, 0);
    auto detunings = [&](const char* d) {
        return Json::parse(dicke::io::read_file(dir_ / d / "spectrum.json"))["config"]["disorder"]["detunings"];
    };
    EXPECT_EQ(detunings("a"), detunings("b"));
    EXPECT_NE(detunings("a"), detunings("c"));
    EXPECT_EQ(Json::parse(dicke::io::read_file(dir_ / "a" / "spectrum.json"))["config"]["disorder"]["generator"],
              "mt19937_64+box-muller/v1");
}

TEST_F(CliTest, DynamicsOutputs) {
    const auto cfg = config("small.json", kSmall);
    const auto r = run(args(cfg, "dynamics", dir_ / "d"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto trace = dicke::io::read_file(dir_ / "d" / "trace.csv");
    EXPECT_EQ(trace.rfind("t,re_1_2,im_1_2\r\n", 0), 0u);
    const Json fits = Json::parse(dicke::io::read_file(dir_ / "d" / "fits.json"));
    ASSERT_EQ(fits["fits"].size(), 1u);
    EXPECT_TRUE(fs::exists(dir_ / "d" / "contributions.csv"));
}

TEST_F(CliTest, SymmetryAndRates) {
    const auto cfg = config("small.json", kSmall);
    const auto s = run(args(cfg, "symmetry", dir_ / "y"));
    ASSERT_EQ(s.code, 0) << s.out;
    EXPECT_TRUE(fs::exists(dir_ / "y" / "symmetry.json"));
    EXPECT_TRUE(fs::exists(dir_ / "y" / "symmetry.txt"));
    const auto r = run(args(cfg, "rates", dir_ / "r"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("conservation: PASS"), std::string::npos) << r.out;
    const Json j = Json::parse(dicke::io::read_file(dir_ / "r" / "rates.json"));
    EXPECT_TRUE(j["conservation"]["pass"].get<bool>());
}

TEST_F(CliTest, ShippedConfigsValidate) {
    for (const auto& e : fs::directory_iterator(DICKE_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        const auto r = run("--config " + e.path().string() + " --out " + (dir_ / e.path().stem()).string() +
                           " symmetry");
        EXPECT_EQ(r.code, 0) << e.path() << "\n" << r.out;
    }
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "experiments.hpp"

using namespace fracemb;
using namespace fracemb::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("fracemb-cli-test-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string without_duration(const std::string& report) {
    std::istringstream in(report);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("duration_seconds=", 0) != 0 && line.rfind("config.workers=", 0) != 0 &&
            line.rfind("config.out=", 0) != 0 && line.rfind("file=", 0) != 0)
            out += line + "\n";
    return out;
}

std::string config_error_message(Experiment kind, const std::map<std::string, std::string>& settings) {
    try {
        parse_config(kind, settings);
    } catch (const config_error& e) {
        return e.what();
    }
    return "";
}

struct Completed {
    int status = -1;
    std::string output;
};

Completed run_tool(const std::string& args) {
    const std::string cmd = std::string(FRACEMB_TOOL_PATH) + " " + args + " 2>&1";
    Completed c;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return c;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) c.output += buf;
    const int raw = pclose(pipe);
    c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return c;
}

}  // namespace

TEST(CliConfig, ExperimentNames) {
    EXPECT_EQ(experiment_names().size(), 8u);
    for (const auto& name : experiment_names()) EXPECT_EQ(to_string(parse_experiment(name)), name);
    EXPECT_THROW(parse_experiment("verify-everything"), config_error);
}

TEST(CliConfig, Defaults) {
    const auto st = parse_config(Experiment::verify_stanislavsky, {});
    EXPECT_EQ(st.alpha, 0.5);
    EXPECT_EQ(st.a, 0.0);
    EXPECT_EQ(st.b, 2.0);
    EXPECT_EQ(st.seed, 42u);
    EXPECT_EQ(st.system.str(), "harmonic(1,1)");
    EXPECT_EQ(st.x0, 1.0);
    EXPECT_EQ(st.p0, 0.0);
    EXPECT_GE(st.workers, 1u);
    EXPECT_EQ(parse_config(Experiment::solve_fde, {}).b, 1.0);

    const auto fp = parse_config(Experiment::solve_fde, {{"system", "free-particle"}});
    EXPECT_EQ(fp.x0, 0.0);
    EXPECT_EQ(fp.p0, 1.0);
    const auto over = parse_config(Experiment::solve_fde, {{"system", "free-particle(2)"}, {"x0", "3"}});
    EXPECT_EQ(over.x0, 3.0);
    EXPECT_EQ(over.system.mass(), 2.0);
}

TEST(CliConfig, NumericForms) {
    const auto c = parse_config(Experiment::subordinator, {{"m-paths", "1e4"}, {"n", " 128 "}, {"workers", "3"}});
    EXPECT_EQ(c.paths, 10000u);
    EXPECT_EQ(c.n, 128u);
    EXPECT_EQ(c.workers, 3u);
    EXPECT_EQ(parse_config(Experiment::ml_eval, {{"alpha", "2.5"}, {"z", "-3"}}).alpha, 2.5);
}

TEST(CliConfig, RejectsInvalidValues) {
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"alpha", "1.2"}}).find("alpha must lie in (0,1)"),
              std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"alpha", "0"}}).find("alpha"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::ml_eval, {{"alpha", "-1"}}).find("positive"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"a", "1"}, {"b", "1"}}).find("need b > a"),
              std::string::npos);
    EXPECT_NE(config_error_message(Experiment::subordinator, {{"a", "0.5"}}).find("a = 0"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"n", "abc"}}).find("'n'"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"n", "1"}}).find("'n'"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"n", "2.5"}}).find("integer"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"x0", "nan"}}).find("finite"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::scaling_limit, {{"c", "10"}}).find("c >= 100"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::scaling_limit, {{"m-paths", "500"}}).find("1000"), std::string::npos);
    EXPECT_NE(config_error_message(Experiment::solve_fde, {{"colour", "red"}}).find("unknown key 'colour'"),
              std::string::npos);
}

TEST(CliConfig, SystemParsing) {
    EXPECT_EQ(parse_system("harmonic(2)").str(), "harmonic(2,1)");
    EXPECT_EQ(parse_system(" quartic( 0.5 ) ").str(), "quartic(0.5)");
    EXPECT_FALSE(parse_system("quartic").quadratic());
    EXPECT_TRUE(parse_system("free-particle").quadratic());
    EXPECT_THROW(parse_system("cubic"), config_error);
    EXPECT_THROW(parse_system("harmonic(1,2,3)"), config_error);
    EXPECT_THROW(parse_system("harmonic(-1)"), config_error);
    EXPECT_THROW(parse_system("harmonic(1"), config_error);
}

TEST(CliConfig, EchoIsOrderedPerExperiment) {
    const auto ml = parse_config(Experiment::ml_eval, {{"beta", "2"}}).echo();
    ASSERT_EQ(ml.size(), 4u);
    EXPECT_EQ(ml[0].first, "experiment");
    EXPECT_EQ(ml[0].second, "ml");
    EXPECT_EQ(ml[2].first, "beta");
    EXPECT_EQ(ml[2].second, "2");

    const auto fd = parse_config(Experiment::frac_deriv, {}).echo();
    bool has_function = false, has_system = false;
    for (const auto& [k, v] : fd) {
        has_function = has_function || k == "function";
        has_system = has_system || k == "system";
    }
    EXPECT_TRUE(has_function);
    EXPECT_FALSE(has_system);
}

TEST(CliConfig, ConfigFile) {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "good.cfg") << "# comment\nalpha = 0.3   # inline\n\nsystem=quartic(2)\n";
        std::ofstream(dir / "unknown.cfg") << "alpha=0.3\nspeed=4\n";
        std::ofstream(dir / "noeq.cfg") << "alpha 0.3\n";
    }
    const auto s = read_config_file(dir / "good.cfg");
    EXPECT_EQ(s.at("alpha"), "0.3");
    EXPECT_EQ(s.at("system"), "quartic(2)");
    EXPECT_EQ(s.size(), 2u);
    try {
        read_config_file(dir / "unknown.cfg");
        ADD_FAILURE();
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2: unknown key 'speed'"), std::string::npos);
    }
    EXPECT_THROW(read_config_file(dir / "noeq.cfg"), config_error);
    EXPECT_THROW(read_config_file(dir / "missing.cfg"), config_error);
    fs::remove_all(dir);
}

TEST(CliRun, SolveFdeWritesSolutionAndReport) {
    const fs::path dir = scratch("solve");
    auto cfg = parse_config(Experiment::solve_fde, {{"out", dir.string()}, {"workers", "1"}});
    const auto r = run_experiment(cfg);
    EXPECT_TRUE(r.passed()) << r.str();
    EXPECT_TRUE(fs::exists(dir / "solution.csv"));
    EXPECT_TRUE(fs::exists(dir / "solution.csv.meta"));
    const std::string report = slurp(dir / "report.txt");
    EXPECT_NE(report.find("config.experiment=solve-fde\n"), std::string::npos);
    EXPECT_NE(report.find("check.canonical_residual=PASS"), std::string::npos);
    EXPECT_NE(report.find("verdict=PASS\n"), std::string::npos);
    const std::string csv = slurp(dir / "solution.csv");
    EXPECT_EQ(csv.rfind("t,x0,x1\n", 0), 0u);
    fs::remove_all(dir);
}

TEST(CliRun, FracDerivChecksClosedForm) {
    const fs::path dir = scratch("deriv");
    const auto r = run_experiment(parse_config(Experiment::frac_deriv, {{"n", "512"}, {"out", dir.string()}}));
    EXPECT_TRUE(r.passed()) << r.str();
    EXPECT_TRUE(fs::exists(dir / "frac_deriv.csv"));
    EXPECT_THROW(run_experiment(parse_config(Experiment::frac_deriv, {{"function", "power(0.5)"}, {"out", dir.string()}})),
                 config_error);
    EXPECT_THROW(run_experiment(parse_config(Experiment::frac_deriv, {{"function", "tan"}, {"out", dir.string()}})),
                 config_error);
    fs::remove_all(dir);
}

TEST(CliRun, RerunsAreByteIdenticalAcrossWorkerCounts) {
    const fs::path one = scratch("rerun-1"), three = scratch("rerun-3");
    auto settings = std::map<std::string, std::string>{{"n", "64"}, {"m-paths", "2000"}, {"seed", "7"}};
    settings["workers"] = "1";
    settings["out"] = one.string();
    run_experiment(parse_config(Experiment::subordinator, settings));
    settings["workers"] = "3";
    settings["out"] = three.string();
    run_experiment(parse_config(Experiment::subordinator, settings));
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(one)) {
        const auto name = entry.path().filename();
        ASSERT_TRUE(fs::exists(three / name)) << name;
        if (name == "report.txt") {
            EXPECT_EQ(without_duration(slurp(one / name)), without_duration(slurp(three / name)));
        } else {
            EXPECT_EQ(slurp(one / name), slurp(three / name)) << name;
        }
        ++compared;
    }
    EXPECT_EQ(compared, 3u);
    fs::remove_all(one);
    fs::remove_all(three);
}

TEST(CliTool, MittagLefflerPrintsValue) {
    const auto c = run_tool("ml --alpha 0.5 --z -1");
    EXPECT_EQ(c.status, 0);
    EXPECT_EQ(c.output, "0.4275835762\n");
}

TEST(CliTool, ErrorsExitWithCodeTwo) {
    const auto bad_alpha = run_tool("solve-fde --alpha 2");
    EXPECT_EQ(bad_alpha.status, 2);
    EXPECT_NE(bad_alpha.output.find("error: invalid value for 'alpha'"), std::string::npos);
    const auto pole = run_tool("ml --alpha 0.5 --z 40");
    EXPECT_EQ(pole.status, 2);
    EXPECT_NE(run_tool("").status, 0);
    EXPECT_NE(run_tool("no-such-experiment").status, 0);
}

TEST(CliTool, ConfigFileAndFlagOverride) {
    const fs::path dir = scratch("tool");
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "n=2048\nalpha=0.9\nout=" << (dir / "out").string() << "\n";
    const auto c = run_tool("solve-fde --config " + (dir / "run.cfg").string() + " --alpha 0.4");
    EXPECT_EQ(c.status, 0) << c.output;
    EXPECT_NE(c.output.find("config.alpha=0.40000000000000002\n"), std::string::npos) << c.output;
    EXPECT_NE(c.output.find("config.n=2048\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "solution.csv"));
    fs::remove_all(dir);
}

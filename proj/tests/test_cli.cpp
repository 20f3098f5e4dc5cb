#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "loadertwin/config.hpp"
#include "loadertwin/report.hpp"
#include "loadertwin/sensor_log.hpp"
#include "loadertwin/trace.hpp"

namespace {

std::string g_cli;

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "loadertwin_cli";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string work_path(const std::string& name) {
    return (work_dir() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string out_file = work_path("stdout.txt");
    const std::string err_file = work_path("stderr.txt");
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + g_cli +
                            "\" " + args + " >" + out_file + " 2>" + err_file;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

std::string make_trajectory() {
    const std::string path = work_path("traj.csv");
    const std::vector<loadertwin::TimedPose> traj = {
        {0.0, {0.05, 0.3}, 0.0},
        {0.3, {0.15, 0.13}, 0.0},
        {0.8, {0.45, 0.12}, 0.1},
    };
    loadertwin::write_trajectory_csv(traj, path);
    return path;
}

std::string make_config() {
    const std::string path = work_path("small.ini");
    std::ofstream out(path);
    out << "[bed]\nwidth = 0.6\nheight = 0.24\n"
        << "[calibration]\nbudget = 6\n";
    return path;
}

} // namespace

TEST_CASE("help prints usage and succeeds") {
    const RunResult r = run("--help");
    CHECK(r.code == 0);
    CHECK(r.out.find("ik") != std::string::npos);
    CHECK(r.out.find("calibrate") != std::string::npos);
}

TEST_CASE("missing arguments and unknown commands exit with 1") {
    CHECK(run("ik").code == 1);
    CHECK(run("warp --factor 9").code == 1);
    CHECK(run("").code == 1);
}

TEST_CASE("ik solves a reachable pose") {
    const RunResult r = run("ik --theta4 0.75 --height -223.53481186756221");
    CHECK(r.code == 0);
    CHECK(r.out.find("1009.78") != std::string::npos);
    CHECK(r.out.find("s_lift") != std::string::npos);

    const RunResult j = run(
        "ik --theta4 0.75 --height -223.53481186756221 --format json");
    CHECK(j.code == 0);
    CHECK(j.out.find("\"s_tilt\"") != std::string::npos);
    CHECK(j.out.find("1595.00510") != std::string::npos);
}

TEST_CASE("ik names the failing solve stage on exit 2") {
    const RunResult r = run("ik --theta4 0.0 --height 3300");
    CHECK(r.code == 2);
    CHECK(r.err.find("arm-height solve") != std::string::npos);
}

TEST_CASE("fk recovers the pose of known extensions") {
    const RunResult r = run("fk --s1 1000 --s2 1530");
    CHECK(r.code == 0);
    CHECK(r.out.find("0.640768") != std::string::npos);
}

TEST_CASE("broken config paths exit with 1") {
    CHECK(run("ik --theta4 0.75 --height -223 --config /no/such.ini").code ==
          1);
    // the environment variable supplies the default config path
    const RunResult r = run("ik --theta4 0.75 --height -223",
                            "LOADERTWIN_CONFIG=/no/such.ini");
    CHECK(r.code == 1);
}

TEST_CASE("invalid terrain overrides exit with 1") {
    const std::string traj = make_trajectory();
    const RunResult r = run("simulate --trajectory " + traj +
                            " --restitution 1.2 --out-dir " +
                            work_path("ovr"));
    CHECK(r.code == 1);
    CHECK(r.err.find("e must be in") != std::string::npos);
}

TEST_CASE("simulate writes a deterministic trace and a plot script") {
    const std::string traj = make_trajectory();
    const std::string cfg = make_config();
    const std::string dir_a = work_path("sim_a");
    const std::string dir_b = work_path("sim_b");

    const RunResult a = run("simulate --trajectory " + traj + " --config " +
                            cfg + " --seed 11 --out-dir " + dir_a);
    CHECK(a.code == 0);
    CHECK(a.out.find("peak force") != std::string::npos);
    CHECK(std::filesystem::exists(dir_a + "/sim_trace.csv"));
    CHECK(std::filesystem::exists(dir_a + "/sim_trace.gp"));

    const RunResult b = run("simulate --trajectory " + traj + " --config " +
                            cfg + " --seed 11 --out-dir " + dir_b);
    CHECK(b.code == 0);
    CHECK(slurp(dir_a + "/sim_trace.csv") == slurp(dir_b + "/sim_trace.csv"));

    const loadertwin::ForceTrace trace =
        loadertwin::read_trace_csv(dir_a + "/sim_trace.csv");
    CHECK(trace.samples.size() == 3);
    CHECK(trace.max_force() > 0.0);
}

TEST_CASE("gen-synthetic emits a log the ingestion pipeline accepts") {
    const std::string traj = make_trajectory();
    const std::string cfg = make_config();
    const std::string dir = work_path("gen");
    const RunResult r = run("gen-synthetic --trajectory " + traj +
                            " --config " + cfg + " --seed 11 --out-dir " +
                            dir);
    CHECK(r.code == 0);
    const std::string log_path = dir + "/synthetic_log.csv";
    REQUIRE(std::filesystem::exists(log_path));

    const loadertwin::SensorLog log =
        loadertwin::read_sensor_log(log_path, loadertwin::ColumnMapping{});
    REQUIRE(log.rows.size() == 3);

    // force magnitudes recovered from the pins equal the simulated trace
    const loadertwin::TwinConfig config = loadertwin::load_config(cfg);
    const auto [pose, force] = loadertwin::extract_traces(log, config);
    const loadertwin::ForceTrace sim =
        loadertwin::read_trace_csv(work_path("sim_a") + "/sim_trace.csv");
    REQUIRE(force.samples.size() == sim.samples.size());
    for (std::size_t i = 0; i < force.samples.size(); ++i)
        CHECK(std::abs(force.samples[i].f - sim.samples[i].f) <=
              1e-9 * (1.0 + sim.samples[i].f));
    CHECK(pose.samples[2].theta4 == 0.1);
}

TEST_CASE("calibrate emits a report, iteration log and plot") {
    const std::string traj = make_trajectory();
    const std::string cfg = make_config();
    const std::string dir = work_path("cal");
    const std::string measured = work_path("sim_a") + "/sim_trace.csv";
    REQUIRE(std::filesystem::exists(measured));

    const RunResult r = run("calibrate --measured " + measured +
                            " --trajectory " + traj + " --config " + cfg +
                            " --seed 11 --out-dir " + dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("fitted") != std::string::npos);
    CHECK(r.out.find("errors:") != std::string::npos);
    REQUIRE(std::filesystem::exists(dir + "/calibration_report.json"));
    CHECK(std::filesystem::exists(dir + "/calibration_iterations.csv"));
    CHECK(std::filesystem::exists(dir + "/calibration_fit.csv"));
    CHECK(std::filesystem::exists(dir + "/calibration_plot.gp"));

    const loadertwin::CalibrationResult result =
        loadertwin::read_report(dir + "/calibration_report.json");
    CHECK(result.evaluations <= 6);
    CHECK(result.history.size() == std::size_t(result.evaluations));
}

TEST_CASE("report renders a stored result") {
    const std::string report =
        work_path("cal") + "/calibration_report.json";
    REQUIRE(std::filesystem::exists(report));
    const RunResult r = run("report --result " + report);
    CHECK(r.code == 0);
    CHECK(r.out.find("parameter") != std::string::npos);
    CHECK(r.out.find("errors:") != std::string::npos);

    CHECK(run("report --result /no/such.json").code == 1);
}

int main(int argc, char** argv) {
    doctest::Context context;
    std::vector<char*> pass;
    pass.push_back(argv[0]);
    for (int i = 1; i < argc; ++i) {
        if (g_cli.empty() && argv[i][0] != '-') {
            g_cli = argv[i];
        } else {
            pass.push_back(argv[i]);
        }
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli> [doctest args]\n");
        return 1;
    }
    context.applyCommandLine(static_cast<int>(pass.size()), pass.data());
    return context.run();
}

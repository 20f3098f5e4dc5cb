// Command-line front end: kinematics queries, dig simulation, terrain
// calibration and report inspection over one shared config.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loadertwin/calibration.hpp"
#include "loadertwin/config.hpp"
#include "loadertwin/errors.hpp"
#include "loadertwin/mechanism.hpp"
#include "loadertwin/report.hpp"
#include "loadertwin/sensor_log.hpp"
#include "loadertwin/statics.hpp"
#include "loadertwin/terrain.hpp"

namespace {

using loadertwin::TwinConfig;
using json = nlohmann::ordered_json;

/// Flags common to every subcommand.
struct Shared {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "text";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool jobs_set = false;
    bool verbose = false;
};

void add_shared(CLI::App* sub, Shared& sh) {
    sub->add_option("-c,--config", sh.config_path,
                    "Config file (default: $LOADERTWIN_CONFIG, else built-in "
                    "defaults)")
        ->envname("LOADERTWIN_CONFIG");
    sub->add_option("--out-dir", sh.out_dir, "Directory for emitted files")
        ->capture_default_str();
    sub->add_option("--format", sh.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    sub->add_option("--seed", sh.seed, "Simulation seed (overrides config)")
        ->each([&sh](const std::string&) { sh.seed_set = true; });
    sub->add_option("--jobs", sh.jobs, "Parallel evaluations (overrides config)")
        ->each([&sh](const std::string&) { sh.jobs_set = true; });
    sub->add_flag("-v,--verbose", sh.verbose, "Progress notes on stderr");
}

TwinConfig load_shared_config(const Shared& sh) {
    TwinConfig cfg;
    if (!sh.config_path.empty()) {
        cfg = loadertwin::load_config(sh.config_path);
        if (sh.verbose) std::cerr << "config: " << sh.config_path << "\n";
    } else if (sh.verbose) {
        std::cerr << "config: built-in defaults\n";
    }
    if (sh.seed_set) cfg.seed = sh.seed;
    if (sh.jobs_set) cfg.jobs = sh.jobs;
    if (sh.verbose)
        std::cerr << "fingerprint: " << loadertwin::config_fingerprint(cfg)
                  << "\n";
    return cfg;
}

std::string out_path(const Shared& sh, const std::string& name) {
    std::filesystem::create_directories(sh.out_dir);
    return (std::filesystem::path(sh.out_dir) / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw loadertwin::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json solution_json(const loadertwin::JointSolution& s,
                   const loadertwin::LinkageGeometry& geom) {
    json j;
    j["theta0"] = s.theta0;
    j["theta3"] = s.theta3;
    j["theta4"] = s.theta4;
    j["theta5"] = s.theta5;
    j["theta6"] = s.theta6;
    j["theta7"] = s.theta7;
    j["theta8"] = s.theta8;
    j["theta9"] = s.theta9;
    j["theta10"] = s.theta10;
    j["s1"] = s.extensions.s1;
    j["s2"] = s.extensions.s2;
    j["s_lift"] = s.extensions.s_lift;
    j["s_tilt"] = s.extensions.s_tilt;
    j["p7"] = {s.p7.x, s.p7.y};
    j["p8"] = {s.p8.x, s.p8.y};
    j["p11"] = {s.p11.x, s.p11.y};
    j["p12"] = {s.p12.x, s.p12.y};
    j["y_p8"] = s.y_p8;
    j["residual_mm"] = loop_residuals(s, geom).max_abs();
    return j;
}

void print_solution(const loadertwin::JointSolution& s,
                    const loadertwin::LinkageGeometry& geom) {
    auto row = [](const char* k, double v) {
        std::printf("  %-10s %.12g\n", k, v);
    };
    std::printf("joint angles (rad):\n");
    row("theta0", s.theta0);
    row("theta3", s.theta3);
    row("theta4", s.theta4);
    row("theta5", s.theta5);
    row("theta6", s.theta6);
    row("theta7", s.theta7);
    row("theta8", s.theta8);
    row("theta9", s.theta9);
    row("theta10", s.theta10);
    std::printf("cylinder extensions (mm):\n");
    row("s1", s.extensions.s1);
    row("s2", s.extensions.s2);
    row("s_lift", s.extensions.s_lift);
    row("s_tilt", s.extensions.s_tilt);
    std::printf("points (mm):\n");
    std::printf("  %-10s (%.12g, %.12g)\n", "p7", s.p7.x, s.p7.y);
    std::printf("  %-10s (%.12g, %.12g)\n", "p8", s.p8.x, s.p8.y);
    std::printf("  %-10s (%.12g, %.12g)\n", "p11", s.p11.x, s.p11.y);
    std::printf("  %-10s (%.12g, %.12g)\n", "p12", s.p12.x, s.p12.y);
    std::printf("max loop residual: %.3g mm\n",
                loop_residuals(s, geom).max_abs());
}

int run_ik(const Shared& sh, double theta4, double height) {
    TwinConfig cfg = load_shared_config(sh);
    loadertwin::TaskTarget target{theta4, height};
    loadertwin::JointSolution s =
        loadertwin::inverse_kinematics(target, cfg.linkage);
    if (sh.format == "json") {
        std::cout << solution_json(s, cfg.linkage).dump(2) << "\n";
    } else {
        std::printf("pose: theta4 = %.12g rad, y_p8 = %.12g mm\n", theta4,
                    height);
        print_solution(s, cfg.linkage);
    }
    return 0;
}

int run_fk(const Shared& sh, double s1, double s2) {
    TwinConfig cfg = load_shared_config(sh);
    loadertwin::CylinderExtensions ext;
    ext.s1 = s1;
    ext.s2 = s2;
    auto [target, s] = loadertwin::forward_kinematics(ext, cfg.linkage);
    if (sh.format == "json") {
        json j = solution_json(s, cfg.linkage);
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("extensions: s1 = %.12g mm, s2 = %.12g mm\n", s1, s2);
        std::printf("pose: theta4 = %.12g rad, y_p8 = %.12g mm\n",
                    target.theta4, target.y_p8);
        print_solution(s, cfg.linkage);
    }
    return 0;
}

int run_simulate(const Shared& sh, const TwinConfig& cfg,
                 const std::string& traj_path,
                 const loadertwin::TerrainParams& terrain) {
    auto trajectory = loadertwin::read_trajectory_csv(traj_path);
    if (sh.verbose)
        std::cerr << "trajectory: " << trajectory.size() << " keyframes, dt = "
                  << (cfg.sim_dt > 0.0 ? cfg.sim_dt
                                       : loadertwin::stable_dt(terrain))
                  << " s\n";
    loadertwin::ForceTrace trace = loadertwin::run_dig_cycle(
        trajectory, terrain, cfg.seed, cfg.scenario());

    std::string csv = out_path(sh, "sim_trace.csv");
    std::string plot = out_path(sh, "sim_trace.gp");
    loadertwin::write_trace_csv(trace, csv);
    loadertwin::write_gnuplot_script({{csv, "simulated"}}, plot);

    if (sh.format == "json") {
        json j;
        j["samples"] = trace.samples.size();
        j["peak_force_n"] = trace.max_force();
        j["trace_csv"] = csv;
        j["plot_script"] = plot;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("simulated %zu samples, peak force %.6g N\n",
                    trace.samples.size(), trace.max_force());
        std::printf("trace: %s\nplot:  %s\n", csv.c_str(), plot.c_str());
    }
    return 0;
}

int run_calibrate(const Shared& sh, const std::string& measured_path,
                  const std::string& traj_path, int budget, bool budget_set) {
    TwinConfig cfg = load_shared_config(sh);
    loadertwin::CalibrationProblem problem;
    problem.initial = cfg.terrain;
    problem.lower = cfg.cal_lower;
    problem.upper = cfg.cal_upper;
    problem.trajectory = loadertwin::read_trajectory_csv(traj_path);
    problem.scenario = cfg.scenario();
    problem.seed = cfg.seed;
    problem.measured = loadertwin::read_trace_csv(measured_path);
    problem.w_peak = cfg.w_peak;
    problem.w_avg = cfg.w_avg;
    problem.budget = budget_set ? budget : cfg.budget;
    problem.jobs = cfg.jobs;
    if (sh.verbose)
        std::cerr << "calibrating: budget " << problem.budget << ", jobs "
                  << problem.jobs << "\n";

    loadertwin::CalibrationResult result = loadertwin::calibrate(problem);

    std::string report = out_path(sh, "calibration_report.json");
    std::string iters = out_path(sh, "calibration_iterations.csv");
    loadertwin::write_report(result, report, &cfg);
    loadertwin::write_iterations_csv(result, iters);

    // fitted-trace replay so the plot can show the fit against the data
    loadertwin::ForceTrace fit = loadertwin::run_dig_cycle(
        problem.trajectory, result.fitted, problem.seed, problem.scenario);
    fit.label = "fitted";
    std::string fit_csv = out_path(sh, "calibration_fit.csv");
    std::string plot = out_path(sh, "calibration_plot.gp");
    loadertwin::write_trace_csv(fit, fit_csv);
    loadertwin::write_gnuplot_script(
        {{measured_path, "measured"}, {fit_csv, "fitted"}}, plot);

    if (sh.format == "json") {
        std::cout << slurp(report);
    } else {
        std::cout << loadertwin::format_comparison(cfg.terrain, result);
        std::printf("report: %s\niterations: %s\nplot: %s\n", report.c_str(),
                    iters.c_str(), plot.c_str());
    }
    return 0;
}

int run_report(const Shared& sh, const std::string& result_path) {
    loadertwin::CalibrationResult result = loadertwin::read_report(result_path);
    if (sh.format == "json") {
        std::cout << slurp(result_path);
        return 0;
    }
    loadertwin::TerrainParams initial =
        result.history.empty() ? result.fitted : result.history.front().params;
    std::cout << loadertwin::format_comparison(initial, result);
    return 0;
}

int run_gen_synthetic(const Shared& sh, const std::string& traj_path,
                      const std::string& out_name) {
    TwinConfig cfg = load_shared_config(sh);
    auto trajectory = loadertwin::read_trajectory_csv(traj_path);
    loadertwin::ForceTrace trace = loadertwin::run_dig_cycle(
        trajectory, cfg.terrain, cfg.seed, cfg.scenario());
    if (trace.samples.size() != trajectory.size())
        throw loadertwin::DomainFailure("dig cycle returned " +
                                        std::to_string(trace.samples.size()) +
                                        " samples for " +
                                        std::to_string(trajectory.size()) +
                                        " keyframes");

    const double weight =
        (cfg.linkage.masses.at("bucket") + cfg.linkage.masses.at("bucket_base")) *
        loadertwin::kGravity;

    std::string path = out_path(sh, out_name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw loadertwin::IoError("cannot write '" + path + "'");
    out << "t,lift_pressure,tilt_pressure,inclinometer,encoder_position,"
           "f_mp_x,f_mp_y,f_sp_x,f_sp_y\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const double f = trace.samples[i].f;
        // soil reaction pointing up-left at fixed ratio, so its magnitude
        // stays exactly f under the hinge-balance inversion
        const double fsx = -0.6 * f;
        const double fsy = 0.8 * f;
        const double fx_total = fsx;
        const double fy_total = weight - fsy;
        const double p_lift =
            loadertwin::cylinder_pressure(f, cfg.piston_area_lift,
                                          loadertwin::CylinderSide::Head);
        const double p_tilt =
            loadertwin::cylinder_pressure(f, cfg.piston_area_tilt,
                                          loadertwin::CylinderSide::Head);
        out << num(trajectory[i].t) << ',' << num(p_lift) << ',' << num(p_tilt)
            << ',' << num(trajectory[i].angle) << ','
            << num(trajectory[i].position.y) << ',' << num(0.6 * fx_total)
            << ',' << num(0.6 * fy_total) << ',' << num(0.4 * fx_total) << ','
            << num(0.4 * fy_total) << '\n';
    }
    out.flush();
    if (!out) throw loadertwin::IoError("write failed on '" + path + "'");

    if (sh.format == "json") {
        json j;
        j["rows"] = trajectory.size();
        j["log_csv"] = path;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("wrote %zu rows to %s\n", trajectory.size(), path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"loadertwin: wheel-loader linkage and soil-bed digital twin"};
    app.require_subcommand(1);

    Shared sh;
    int rc = 0;

    auto* ik = app.add_subcommand("ik", "Closed-form inverse kinematics of a "
                                        "blade pose");
    add_shared(ik, sh);
    double ik_theta4 = 0.0, ik_height = 0.0;
    ik->add_option("--theta4", ik_theta4, "Bucket orientation (rad)")
        ->required();
    ik->add_option("--height", ik_height, "Blade-tip height y_p8 (mm)")
        ->required();
    ik->callback([&] { rc = run_ik(sh, ik_theta4, ik_height); });

    auto* fk = app.add_subcommand("fk", "Forward kinematics from cylinder "
                                        "extensions");
    add_shared(fk, sh);
    double fk_s1 = 0.0, fk_s2 = 0.0;
    fk->add_option("--s1", fk_s1, "Lift cylinder extension (mm)")->required();
    fk->add_option("--s2", fk_s2, "Tilt cylinder extension (mm)")->required();
    fk->callback([&] { rc = run_fk(sh, fk_s1, fk_s2); });

    auto* sim = app.add_subcommand("simulate", "Run one dig cycle and record "
                                               "the bucket force trace");
    add_shared(sim, sh);
    std::string sim_traj;
    sim->add_option("--trajectory", sim_traj,
                    "Bucket trajectory CSV (t,x,y,angle)")
        ->required();
    loadertwin::TerrainParams sim_terrain;
    bool sim_overridden = false;
    auto terrain_opt = [&](const char* name, double& field, const char* help) {
        sim->add_option(name, field, help)->each([&](const std::string&) {
            sim_overridden = true;
        });
    };
    terrain_opt("--young-modulus", sim_terrain.young_modulus,
                "Override Young's modulus (Pa)");
    terrain_opt("--mu-t", sim_terrain.mu_t, "Override sliding friction");
    terrain_opt("--restitution", sim_terrain.e, "Override restitution");
    terrain_opt("--diameter", sim_terrain.d, "Override particle diameter (m)");
    terrain_opt("--mu-r", sim_terrain.mu_r, "Override rolling resistance");
    sim->callback([&] {
        TwinConfig cfg = load_shared_config(sh);
        loadertwin::TerrainParams t = cfg.terrain;
        if (sim_overridden) {
            if (sim->count("--young-modulus"))
                t.young_modulus = sim_terrain.young_modulus;
            if (sim->count("--mu-t")) t.mu_t = sim_terrain.mu_t;
            if (sim->count("--restitution")) t.e = sim_terrain.e;
            if (sim->count("--diameter")) t.d = sim_terrain.d;
            if (sim->count("--mu-r")) t.mu_r = sim_terrain.mu_r;
            t.validate();
        }
        rc = run_simulate(sh, cfg, sim_traj, t);
    });

    auto* cal = app.add_subcommand("calibrate", "Fit terrain parameters to a "
                                                "measured force trace");
    add_shared(cal, sh);
    std::string cal_measured, cal_traj;
    int cal_budget = 0;
    bool cal_budget_set = false;
    cal->add_option("--measured", cal_measured, "Measured force trace CSV (t,f)")
        ->required();
    cal->add_option("--trajectory", cal_traj,
                    "Bucket trajectory CSV (t,x,y,angle)")
        ->required();
    cal->add_option("--budget", cal_budget,
                    "Max objective evaluations (overrides config)")
        ->each([&](const std::string&) { cal_budget_set = true; });
    cal->callback([&] {
        rc = run_calibrate(sh, cal_measured, cal_traj, cal_budget,
                           cal_budget_set);
    });

    auto* rep = app.add_subcommand("report", "Print the parameter/error tables "
                                             "of a calibration report");
    add_shared(rep, sh);
    std::string rep_path;
    rep->add_option("--result", rep_path, "Calibration report JSON")
        ->required();
    rep->callback([&] { rc = run_report(sh, rep_path); });

    auto* gen = app.add_subcommand("gen-synthetic",
                                   "Emit a synthetic sensor log for a "
                                   "trajectory under the configured terrain");
    add_shared(gen, sh);
    std::string gen_traj, gen_out = "synthetic_log.csv";
    gen->add_option("--trajectory", gen_traj,
                    "Bucket trajectory CSV (t,x,y,angle)")
        ->required();
    gen->add_option("--out", gen_out, "Output file name inside --out-dir")
        ->capture_default_str();
    gen->callback([&] { rc = run_gen_synthetic(sh, gen_traj, gen_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const loadertwin::IoFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const loadertwin::DomainFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

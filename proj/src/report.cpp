#include "loadertwin/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loadertwin/errors.hpp"

namespace loadertwin {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double (printf %.17g).
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json params_json(const TerrainParams& p) {
    ordered_json j;
    j["E"] = p.young_modulus;
    j["mu_t"] = p.mu_t;
    j["e"] = p.e;
    j["d"] = p.d;
    j["mu_r"] = p.mu_r;
    j["rho"] = p.rho;
    j["nu"] = p.nu;
    return j;
}

TerrainParams params_from_json(const ordered_json& j) {
    TerrainParams p;
    p.young_modulus = j.at("E").get<double>();
    p.mu_t = j.at("mu_t").get<double>();
    p.e = j.at("e").get<double>();
    p.d = j.at("d").get<double>();
    p.mu_r = j.at("mu_r").get<double>();
    p.rho = j.at("rho").get<double>();
    p.nu = j.at("nu").get<double>();
    return p;
}

/// FNV-1a 64-bit over a string.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<std::string> csv_rows(const std::string& text, int min_cols,
                                  const std::string& path) {
    std::vector<std::string> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.size() < 2)
        throw ParseError(path + ": expected a header and at least one row");
    (void)min_cols;
    return rows;
}

std::vector<double> split_nums(const std::string& line, std::size_t n,
                               const std::string& path, std::size_t lineno) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cellv;
    while (std::getline(ss, cellv, ',')) {
        const char* begin = cellv.c_str();
        char* end = nullptr;
        const double x = std::strtod(begin, &end);
        if (cellv.empty() || end != begin + cellv.size())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": bad number '" + cellv + "'");
        out.push_back(x);
    }
    if (out.size() != n)
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(n) + " columns");
    return out;
}

} // namespace

std::string config_fingerprint(const TwinConfig& c) {
    std::ostringstream ss;
    const auto put = [&](double v) { ss << num(v) << '|'; };
    const LinkageGeometry& g = c.linkage;
    for (double v : {g.l1, g.l2, g.l3, g.l4, g.l5, g.l6, g.l7, g.l8, g.l9,
                     g.l10, g.l11, g.l12, g.l13, g.l14, g.l15, g.l16, g.l17,
                     g.l18, g.beta0, g.beta1, g.beta2, g.beta3, g.beta4,
                     g.beta5, g.angle_p0p12p2, g.p0.x, g.p0.y,
                     g.stroke_lift.lo, g.stroke_lift.hi, g.stroke_tilt.lo,
                     g.stroke_tilt.hi, g.theta3_band.lo, g.theta3_band.hi,
                     g.theta4_band.lo, g.theta4_band.hi})
        put(v);
    for (const auto& [name, mass] : g.masses) {
        ss << name << '|';
        put(mass);
    }
    for (double v : {c.pin_length, c.pin_s1, c.pin_s2, c.piston_area_lift,
                     c.piston_area_tilt, c.bucket_width, c.bed_width,
                     c.bed_height, c.sim_dt, c.w_peak, c.w_avg})
        put(v);
    for (const Vec2& p : c.bucket_profile.points) {
        put(p.x);
        put(p.y);
    }
    for (const TerrainParams* t : {&c.terrain, &c.cal_lower, &c.cal_upper})
        for (double v : {t->young_modulus, t->mu_t, t->e, t->d, t->mu_r,
                         t->rho, t->nu})
            put(v);
    ss << c.seed << '|' << c.budget << '|' << c.jobs;
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(ss.str()));
    return buf;
}

void write_report(const CalibrationResult& result, const std::string& path,
                  const TwinConfig* config) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["fitted"] = params_json(result.fitted);
    j["metrics"]["peak_error_pct"] = result.peak_error_pct;
    j["metrics"]["avg_error_pct"] = result.avg_error_pct;
    j["metrics"]["objective"] = result.objective;
    j["evaluations"] = result.evaluations;
    ordered_json hist = ordered_json::array();
    for (const CalibrationHistoryEntry& h : result.history) {
        ordered_json e = params_json(h.params);
        e["objective"] = h.objective;
        hist.push_back(std::move(e));
    }
    j["history"] = std::move(hist);
    j["config_fingerprint"] =
        config ? config_fingerprint(*config) : std::string("none");
    write_text(path, j.dump(2) + "\n");
}

CalibrationResult read_report(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text(path));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw ParseError(path + ": unsupported schema version");
        CalibrationResult r;
        r.fitted = params_from_json(j.at("fitted"));
        r.peak_error_pct = j.at("metrics").at("peak_error_pct").get<double>();
        r.avg_error_pct = j.at("metrics").at("avg_error_pct").get<double>();
        r.objective = j.at("metrics").at("objective").get<double>();
        r.evaluations = j.at("evaluations").get<int>();
        for (const auto& e : j.at("history"))
            r.history.push_back(
                {params_from_json(e), e.at("objective").get<double>()});
        return r;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
}

void write_trace_csv(const ForceTrace& trace, const std::string& path) {
    std::ostringstream ss;
    ss << "t,f\n";
    for (const ForceTrace::Sample& s : trace.samples)
        ss << num(s.t) << ',' << num(s.f) << '\n';
    write_text(path, ss.str());
}

ForceTrace read_trace_csv(const std::string& path) {
    const std::vector<std::string> rows = csv_rows(read_text(path), 2, path);
    ForceTrace trace;
    trace.label = "trace";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::vector<double> v = split_nums(rows[i], 2, path, i + 1);
        trace.samples.push_back({v[0], v[1]});
    }
    trace.validate();
    return trace;
}

void write_pose_csv(const PoseTrace& trace, const std::string& path) {
    std::ostringstream ss;
    ss << "t,y_p8,theta4\n";
    for (const PoseTrace::Sample& s : trace.samples)
        ss << num(s.t) << ',' << num(s.y_p8) << ',' << num(s.theta4) << '\n';
    write_text(path, ss.str());
}

PoseTrace read_pose_csv(const std::string& path) {
    const std::vector<std::string> rows = csv_rows(read_text(path), 3, path);
    PoseTrace trace;
    trace.label = "trace";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::vector<double> v = split_nums(rows[i], 3, path, i + 1);
        trace.samples.push_back({v[0], v[1], v[2]});
    }
    trace.validate();
    return trace;
}

void write_trajectory_csv(const std::vector<TimedPose>& trajectory,
                          const std::string& path) {
    std::ostringstream ss;
    ss << "t,x,y,angle\n";
    for (const TimedPose& p : trajectory)
        ss << num(p.t) << ',' << num(p.position.x) << ',' << num(p.position.y)
           << ',' << num(p.angle) << '\n';
    write_text(path, ss.str());
}

std::vector<TimedPose> read_trajectory_csv(const std::string& path) {
    const std::vector<std::string> rows = csv_rows(read_text(path), 4, path);
    std::vector<TimedPose> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::vector<double> v = split_nums(rows[i], 4, path, i + 1);
        out.push_back({v[0], {v[1], v[2]}, v[3]});
    }
    if (out.size() < 2)
        throw ValidationError(path + ": trajectory needs at least 2 poses");
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        if (!(out[i].t < out[i + 1].t))
            throw ValidationError(path + ": trajectory times must increase");
    return out;
}

void write_iterations_csv(const CalibrationResult& result,
                          const std::string& path) {
    std::ostringstream ss;
    ss << "eval,E,mu_t,e,d,mu_r,objective\n";
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const CalibrationHistoryEntry& h = result.history[i];
        ss << (i + 1) << ',' << num(h.params.young_modulus) << ','
           << num(h.params.mu_t) << ',' << num(h.params.e) << ','
           << num(h.params.d) << ',' << num(h.params.mu_r) << ','
           << num(h.objective) << '\n';
    }
    write_text(path, ss.str());
}

std::string format_comparison(const TerrainParams& initial,
                              const CalibrationResult& result) {
    std::ostringstream ss;
    const auto row = [&](const char* name, double before, double after) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-6s %14.6g %14.6g\n", name, before,
                      after);
        ss << buf;
    };
    ss << "parameter        initial         fitted\n";
    row("E", initial.young_modulus, result.fitted.young_modulus);
    row("mu_t", initial.mu_t, result.fitted.mu_t);
    row("e", initial.e, result.fitted.e);
    row("d", initial.d, result.fitted.d);
    row("mu_r", initial.mu_r, result.fitted.mu_r);
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "errors: peak %.2f %%, average %.2f %% (%d evaluations)\n",
                  result.peak_error_pct, result.avg_error_pct,
                  result.evaluations);
    ss << buf;
    return ss.str();
}

void write_gnuplot_script(
    const std::vector<std::pair<std::string, std::string>>& traces,
    const std::string& path) {
    std::ostringstream ss;
    ss << "# force-trace comparison (schema_version " << kSchemaVersion
       << ")\n";
    ss << "set datafile separator ','\n";
    ss << "set xlabel 'time (s)'\n";
    ss << "set ylabel 'force (N)'\n";
    ss << "set key top left\n";
    ss << "plot ";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (i) ss << ", \\\n     ";
        ss << "'" << traces[i].first << "' using 1:2 skip 1 with lines title '"
           << traces[i].second << "'";
    }
    ss << "\n";
    write_text(path, ss.str());
}

} // namespace loadertwin

#include "loadertwin/sensor_log.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "loadertwin/errors.hpp"
#include "loadertwin/statics.hpp"

namespace loadertwin {

namespace {

enum class Quantity { Time, Pressure, Angle, Length, Force };

/// Exact SI conversion factor for the supported unit set.
double unit_factor(Quantity q, const std::string& unit,
                   const std::string& channel) {
    switch (q) {
    case Quantity::Time:
        if (unit == "s") return 1.0;
        if (unit == "ms") return 1e-3;
        break;
    case Quantity::Pressure:
        if (unit == "Pa") return 1.0;
        if (unit == "bar") return 1e5;
        break;
    case Quantity::Angle:
        if (unit == "rad") return 1.0;
        if (unit == "deg") return M_PI / 180.0;
        break;
    case Quantity::Length:
        if (unit == "m") return 1.0;
        if (unit == "mm") return 1e-3;
        break;
    case Quantity::Force:
        if (unit == "N") return 1.0;
        if (unit == "kN") return 1e3;
        break;
    }
    throw UnitError(channel + ": unsupported unit '" + unit + "'");
}

/// Splits one CSV record; honors double quotes, trims unquoted whitespace.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    for (std::string& f : out) {
        std::size_t a = 0, b = f.size();
        while (a < b && std::isspace(static_cast<unsigned char>(f[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(f[b - 1]))) --b;
        f = f.substr(a, b - a);
    }
    return out;
}

struct Binding {
    std::size_t index;
    double factor;
    std::string channel;
};

Binding bind(const std::vector<std::string>& header, const ColumnSpec& spec,
             Quantity q, const std::string& channel) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == spec.column)
            return {i, unit_factor(q, spec.unit, channel), channel};
    throw MissingColumn(channel + ": column '" + spec.column + "' not found");
}

double cell(const std::vector<std::string>& row, const Binding& b, int line) {
    if (b.index >= row.size())
        throw ParseError("line " + std::to_string(line) + ": row too short for " +
                         b.channel);
    const std::string& v = row[b.index];
    const char* begin = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (v.empty() || end != begin + v.size() || !std::isfinite(x))
        throw ParseError("line " + std::to_string(line) + ": " + b.channel +
                         " value '" + v + "' is not a finite number");
    return x * b.factor;
}

} // namespace

SensorLog read_sensor_log(const std::string& path,
                          const ColumnMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sensor log: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv(line);

    const Binding cols[9] = {
        bind(header, mapping.time, Quantity::Time, "time"),
        bind(header, mapping.lift_pressure, Quantity::Pressure, "lift_pressure"),
        bind(header, mapping.tilt_pressure, Quantity::Pressure, "tilt_pressure"),
        bind(header, mapping.inclinometer, Quantity::Angle, "inclinometer"),
        bind(header, mapping.encoder, Quantity::Length, "encoder"),
        bind(header, mapping.mp_fx, Quantity::Force, "f_mp_x"),
        bind(header, mapping.mp_fy, Quantity::Force, "f_mp_y"),
        bind(header, mapping.sp_fx, Quantity::Force, "f_sp_x"),
        bind(header, mapping.sp_fy, Quantity::Force, "f_sp_y"),
    };

    SensorLog log;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> row = split_csv(line);
        SensorLog::Row r;
        r.t = cell(row, cols[0], lineno);
        r.lift_pressure = cell(row, cols[1], lineno);
        r.tilt_pressure = cell(row, cols[2], lineno);
        r.inclinometer = cell(row, cols[3], lineno);
        r.encoder = cell(row, cols[4], lineno);
        r.f_mp_x = cell(row, cols[5], lineno);
        r.f_mp_y = cell(row, cols[6], lineno);
        r.f_sp_x = cell(row, cols[7], lineno);
        r.f_sp_y = cell(row, cols[8], lineno);
        if (!log.rows.empty() && !(log.rows.back().t < r.t))
            throw NonMonotoneTime("line " + std::to_string(lineno) +
                                  ": time must be strictly increasing");
        log.rows.push_back(r);
    }
    return log;
}

std::pair<PoseTrace, ForceTrace> extract_traces(const SensorLog& log,
                                                const TwinConfig& config) {
    if (log.rows.size() < 2)
        throw MissingChannel("sensor log has fewer than 2 rows");

    BucketBody body;
    body.m = config.linkage.masses.at("bucket") +
             config.linkage.masses.at("bucket_base");

    PoseTrace pose;
    pose.label = "measured";
    ForceTrace force;
    force.label = "measured";
    for (const SensorLog::Row& r : log.rows) {
        pose.samples.push_back({r.t, r.encoder * 1000.0, r.inclinometer});
        const HingeForces h{r.f_mp_x, r.f_mp_y, r.f_sp_x, r.f_sp_y};
        force.samples.push_back(
            {r.t, soil_force_from_hinges(h, body).magnitude()});
    }
    pose.validate();
    force.validate();
    return {pose, force};
}

} // namespace loadertwin

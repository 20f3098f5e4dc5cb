#include "loadertwin/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "loadertwin/errors.hpp"

namespace loadertwin {

TwinConfig::TwinConfig() {
    cal_lower = terrain;
    cal_upper = terrain;
    cal_lower.young_modulus = 1.0e5;
    cal_upper.young_modulus = 1.0e8;
    cal_lower.mu_t = 0.2;
    cal_upper.mu_t = 1.0;
    cal_lower.mu_r = 0.0;
    cal_upper.mu_r = 0.6;
    // e and d ship collapsed: frozen unless the config widens them
}

void TwinConfig::validate() const {
    linkage.validate();
    terrain.validate();
    cal_lower.validate();
    cal_upper.validate();
    const auto ordered = [](double lo, double hi, const char* name) {
        if (!(lo <= hi))
            throw ValidationError(std::string("calibration bounds for ") +
                                  name + " are inverted");
    };
    ordered(cal_lower.young_modulus, cal_upper.young_modulus, "E");
    ordered(cal_lower.mu_t, cal_upper.mu_t, "mu_t");
    ordered(cal_lower.e, cal_upper.e, "e");
    ordered(cal_lower.d, cal_upper.d, "d");
    ordered(cal_lower.mu_r, cal_upper.mu_r, "mu_r");
    if (!(pin_length > 0.0))
        throw ValidationError("pin length must be positive");
    if (!(pin_s1 > 0.0) || !(pin_s2 > 0.0) || pin_s1 + pin_s2 > pin_length)
        throw ValidationError("pin contact spans must be positive and disjoint");
    if (!(piston_area_lift > 0.0) || !(piston_area_tilt > 0.0))
        throw ValidationError("piston areas must be positive");
    if (bucket_profile.points.size() < 2)
        throw ValidationError("bucket profile needs at least 2 points");
    if (!(bucket_width > 0.0))
        throw ValidationError("bucket width must be positive");
    if (!(bed_width > 0.0) || !(bed_height > 0.0))
        throw ValidationError("bed extent must be positive");
    if (!(sim_dt >= 0.0)) throw ValidationError("dt must be non-negative");
    if (!(w_peak >= 0.0 && w_avg >= 0.0 && w_peak + w_avg > 0.0))
        throw ValidationError("weights must be non-negative, not both zero");
    if (budget < 1) throw ValidationError("budget must be at least 1");
    if (jobs < 1) throw ValidationError("jobs must be at least 1");
}

DigScenario TwinConfig::scenario() const {
    DigScenario sc;
    sc.bed_width = bed_width;
    sc.bed_height = bed_height;
    sc.profile = bucket_profile;
    sc.bucket_width = bucket_width;
    sc.dt = sim_dt;
    return sc;
}

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_num(const std::string& v, int line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end != begin + v.size() || v.empty())
        fail(line, "number expected, got '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const unsigned long long x = std::strtoull(begin, &end, 10);
    if (end != begin + v.size() || v.empty())
        fail(line, "unsigned integer expected, got '" + v + "'");
    return x;
}

int parse_int(const std::string& v, int line) {
    const double x = parse_num(v, line);
    if (x != std::floor(x)) fail(line, "integer expected, got '" + v + "'");
    return static_cast<int>(x);
}

BucketProfile parse_profile(const std::string& v, int line) {
    BucketProfile prof;
    std::stringstream ss(v);
    std::string point;
    while (ss >> point) {
        const std::size_t comma = point.find(',');
        if (comma == std::string::npos)
            fail(line, "profile point 'x,y' expected, got '" + point + "'");
        prof.points.push_back({parse_num(trim(point.substr(0, comma)), line),
                               parse_num(trim(point.substr(comma + 1)), line)});
    }
    if (prof.points.size() < 2) fail(line, "profile needs at least 2 points");
    return prof;
}

constexpr double kDeg = M_PI / 180.0;

struct KeyHandler {
    const char* section;
    const char* key;
    void (*apply)(TwinConfig&, const std::string&, int);
};

#define NUM_FIELD(sec, name, expr)                                   \
    {sec, name, [](TwinConfig& c, const std::string& v, int line) { \
         const double x = parse_num(v, line);                        \
         (void)x;                                                    \
         expr;                                                       \
     }}

const KeyHandler kHandlers[] = {
    // linkage lengths (mm)
    NUM_FIELD("linkage", "l1", c.linkage.l1 = x),
    NUM_FIELD("linkage", "l2", c.linkage.l2 = x),
    NUM_FIELD("linkage", "l3", c.linkage.l3 = x),
    NUM_FIELD("linkage", "l4", c.linkage.l4 = x),
    NUM_FIELD("linkage", "l5", c.linkage.l5 = x),
    NUM_FIELD("linkage", "l6", c.linkage.l6 = x),
    NUM_FIELD("linkage", "l7", c.linkage.l7 = x),
    NUM_FIELD("linkage", "l8", c.linkage.l8 = x),
    NUM_FIELD("linkage", "l9", c.linkage.l9 = x),
    NUM_FIELD("linkage", "l10", c.linkage.l10 = x),
    NUM_FIELD("linkage", "l11", c.linkage.l11 = x),
    NUM_FIELD("linkage", "l12", c.linkage.l12 = x),
    NUM_FIELD("linkage", "l13", c.linkage.l13 = x),
    NUM_FIELD("linkage", "l14", c.linkage.l14 = x),
    NUM_FIELD("linkage", "l15", c.linkage.l15 = x),
    NUM_FIELD("linkage", "l16", c.linkage.l16 = x),
    NUM_FIELD("linkage", "l17", c.linkage.l17 = x),
    NUM_FIELD("linkage", "l18", c.linkage.l18 = x),
    // frame angles (degrees in the file, radians in memory)
    NUM_FIELD("linkage", "beta0_deg", c.linkage.beta0 = x * kDeg),
    NUM_FIELD("linkage", "beta1_deg", c.linkage.beta1 = x * kDeg),
    NUM_FIELD("linkage", "beta2_deg", c.linkage.beta2 = x * kDeg),
    NUM_FIELD("linkage", "beta3_deg", c.linkage.beta3 = x * kDeg),
    NUM_FIELD("linkage", "beta4_deg", c.linkage.beta4 = x * kDeg),
    NUM_FIELD("linkage", "beta5_deg", c.linkage.beta5 = x * kDeg),
    NUM_FIELD("linkage", "sight_offset_deg", c.linkage.angle_p0p12p2 = x * kDeg),
    NUM_FIELD("linkage", "p0_x", c.linkage.p0.x = x),
    NUM_FIELD("linkage", "p0_y", c.linkage.p0.y = x),
    NUM_FIELD("linkage", "stroke_lift_min", c.linkage.stroke_lift.lo = x),
    NUM_FIELD("linkage", "stroke_lift_max", c.linkage.stroke_lift.hi = x),
    NUM_FIELD("linkage", "stroke_tilt_min", c.linkage.stroke_tilt.lo = x),
    NUM_FIELD("linkage", "stroke_tilt_max", c.linkage.stroke_tilt.hi = x),
    NUM_FIELD("linkage", "theta3_min_deg", c.linkage.theta3_band.lo = x * kDeg),
    NUM_FIELD("linkage", "theta3_max_deg", c.linkage.theta3_band.hi = x * kDeg),
    NUM_FIELD("linkage", "theta4_min_deg", c.linkage.theta4_band.lo = x * kDeg),
    NUM_FIELD("linkage", "theta4_max_deg", c.linkage.theta4_band.hi = x * kDeg),
    // part masses (kg)
    NUM_FIELD("linkage", "mass_bucket", c.linkage.masses["bucket"] = x),
    NUM_FIELD("linkage", "mass_bucket_base", c.linkage.masses["bucket_base"] = x),
    NUM_FIELD("linkage", "mass_link_a", c.linkage.masses["link_a"] = x),
    NUM_FIELD("linkage", "mass_link_b", c.linkage.masses["link_b"] = x),
    NUM_FIELD("linkage", "mass_main_arm", c.linkage.masses["main_arm"] = x),
    NUM_FIELD("linkage", "mass_hydraulic_rod_a1",
              c.linkage.masses["hydraulic_rod_a1"] = x),
    NUM_FIELD("linkage", "mass_hydraulic_rod_a2",
              c.linkage.masses["hydraulic_rod_a2"] = x),
    NUM_FIELD("linkage", "mass_hydraulic_rod_b1",
              c.linkage.masses["hydraulic_rod_b1"] = x),
    NUM_FIELD("linkage", "mass_hydraulic_rod_b2",
              c.linkage.masses["hydraulic_rod_b2"] = x),
    // instrumented pin (mm)
    NUM_FIELD("pin", "length", c.pin_length = x),
    NUM_FIELD("pin", "s1", c.pin_s1 = x),
    NUM_FIELD("pin", "s2", c.pin_s2 = x),
    // hydraulics (m^2)
    NUM_FIELD("cylinders", "area_lift", c.piston_area_lift = x),
    NUM_FIELD("cylinders", "area_tilt", c.piston_area_tilt = x),
    // bucket + bed (m)
    NUM_FIELD("bucket", "width", c.bucket_width = x),
    {"bucket", "profile",
     [](TwinConfig& c, const std::string& v, int line) {
         c.bucket_profile = parse_profile(v, line);
     }},
    NUM_FIELD("bed", "width", c.bed_width = x),
    NUM_FIELD("bed", "height", c.bed_height = x),
    // terrain parameters (SI)
    NUM_FIELD("terrain", "E", c.terrain.young_modulus = x),
    NUM_FIELD("terrain", "mu_t", c.terrain.mu_t = x),
    NUM_FIELD("terrain", "e", c.terrain.e = x),
    NUM_FIELD("terrain", "d", c.terrain.d = x),
    NUM_FIELD("terrain", "mu_r", c.terrain.mu_r = x),
    NUM_FIELD("terrain", "rho", c.terrain.rho = x),
    NUM_FIELD("terrain", "nu", c.terrain.nu = x),
    // simulation
    NUM_FIELD("simulation", "dt", c.sim_dt = x),
    {"simulation", "seed",
     [](TwinConfig& c, const std::string& v, int line) {
         c.seed = parse_u64(v, line);
     }},
    // calibration search box
    NUM_FIELD("calibration", "w_peak", c.w_peak = x),
    NUM_FIELD("calibration", "w_avg", c.w_avg = x),
    {"calibration", "budget",
     [](TwinConfig& c, const std::string& v, int line) {
         c.budget = parse_int(v, line);
     }},
    {"calibration", "jobs",
     [](TwinConfig& c, const std::string& v, int line) {
         c.jobs = parse_int(v, line);
     }},
    NUM_FIELD("calibration", "E_min", c.cal_lower.young_modulus = x),
    NUM_FIELD("calibration", "E_max", c.cal_upper.young_modulus = x),
    NUM_FIELD("calibration", "mu_t_min", c.cal_lower.mu_t = x),
    NUM_FIELD("calibration", "mu_t_max", c.cal_upper.mu_t = x),
    NUM_FIELD("calibration", "e_min", c.cal_lower.e = x),
    NUM_FIELD("calibration", "e_max", c.cal_upper.e = x),
    NUM_FIELD("calibration", "d_min", c.cal_lower.d = x),
    NUM_FIELD("calibration", "d_max", c.cal_upper.d = x),
    NUM_FIELD("calibration", "mu_r_min", c.cal_lower.mu_r = x),
    NUM_FIELD("calibration", "mu_r_max", c.cal_upper.mu_r = x),
};

#undef NUM_FIELD

void apply_key(TwinConfig& cfg, const std::string& section,
               const std::string& key, const std::string& value, int line) {
    bool section_known = false;
    for (const KeyHandler& h : kHandlers) {
        if (section != h.section) continue;
        section_known = true;
        if (key == h.key) {
            h.apply(cfg, value, line);
            return;
        }
    }
    if (!section_known) fail(line, "unknown section [" + section + "]");
    fail(line, "unknown key '" + key + "' in section [" + section + "]");
}

bool known_section(const std::string& section) {
    for (const KeyHandler& h : kHandlers)
        if (section == h.section) return true;
    return false;
}

} // namespace

TwinConfig parse_config(const std::string& text) {
    TwinConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const std::size_t hash = raw.find_first_of("#;");
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail(line, "empty section name");
            if (!known_section(section))
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (section.empty()) fail(line, "key '" + key + "' outside any section");
        apply_key(cfg, section, key, value, line);
    }
    cfg.validate();
    return cfg;
}

TwinConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace loadertwin

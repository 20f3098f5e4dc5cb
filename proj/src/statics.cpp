#include "loadertwin/statics.hpp"

#include <cmath>
#include <string>

#include "loadertwin/errors.hpp"

namespace loadertwin {

double SoilForce::magnitude() const { return std::hypot(f_s_x, f_s_y); }

SoilForce soil_force_from_hinges(const HingeForces& h, const BucketBody& b) {
    SoilForce s;
    s.f_s_x = h.f_mp_x + h.f_sp_x - b.m * b.a_x;
    s.f_s_y = b.weight() + b.m * b.a_y - h.f_mp_y - h.f_sp_y;
    return s;
}

std::pair<double, double> static_residual(const HingeForces& h,
                                          const SoilForce& s,
                                          const BucketBody& b) {
    return {h.f_mp_x + h.f_sp_x - s.f_s_x,
            h.f_mp_y + h.f_sp_y + s.f_s_y - b.weight()};
}

namespace {

/// Trapezoidal integral of a sampled distribution restricted to [lo, hi].
double integrate_span(const SampledLoad& load, double lo, double hi,
                      const char* name) {
    const auto& s = load.s;
    const auto& q = load.q;
    if (s.size() < 2 || s.size() != q.size())
        throw EmptySpan(std::string(name) + ": need at least 2 samples");
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i + 1] <= s[i])
            throw EmptySpan(std::string(name) + ": samples not increasing");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double a = std::max(s[i], lo);
        const double b = std::min(s[i + 1], hi);
        if (b <= a) continue;
        const double width = s[i + 1] - s[i];
        // linear interpolation of q at the clipped endpoints
        const double qa = q[i] + (q[i + 1] - q[i]) * (a - s[i]) / width;
        const double qb = q[i] + (q[i + 1] - q[i]) * (b - s[i]) / width;
        acc += 0.5 * (qa + qb) * (b - a);
    }
    return acc;
}

} // namespace

std::pair<double, double> pin_shears(const LoadPin& pin) {
    const double v1 = integrate_span(pin.q_bb, 0.0, pin.s1_pin, "q_bb");
    const double v2 =
        integrate_span(pin.q_la, pin.length - pin.s2_pin, pin.length, "q_la");
    return {v1, v2};
}

std::pair<double, double> resultant_from_shears(double v1, double v2,
                                                Axis /*axis*/) {
    return {v1, v2};
}

double cylinder_pressure(double force, double piston_area,
                         CylinderSide /*side*/) {
    if (!(piston_area > 0.0))
        throw NonPositiveArea("cylinder_pressure: piston area must be positive");
    return force / piston_area;
}

} // namespace loadertwin

#pragma once

#include <utility>
#include <vector>

namespace loadertwin {

/// Standard gravity (m/s^2).
inline constexpr double kGravity = 9.80665;

/// Measured pin forces at the two bucket hinges (N): main-arm pin (mp) and
/// coupler-link pin (sp).
struct HingeForces {
    double f_mp_x = 0.0;
    double f_mp_y = 0.0;
    double f_sp_x = 0.0;
    double f_sp_y = 0.0;
};

/// Soil reaction on the bucket (N).
struct SoilForce {
    double f_s_x = 0.0;
    double f_s_y = 0.0;
    double magnitude() const;
};

/// Free body the hinge forces act on: bucket plus bucket base.
struct BucketBody {
    double m = 290.6;   ///< kg
    double a_x = 0.0;   ///< m/s^2
    double a_y = 0.0;   ///< m/s^2
    double weight() const { return m * kGravity; }
};

/// Piecewise-linear load distribution q(s) (N/mm over mm), sampled at
/// strictly increasing positions.
struct SampledLoad {
    std::vector<double> s;
    std::vector<double> q;
};

/// Instrumented hinge pin: strain-gauge grooves at the neutral axis between
/// two contact spans, so each gauge reads the shear induced by one span.
struct LoadPin {
    double length = 0.0;   ///< mm
    double s1_pin = 0.0;   ///< bucket-base contact span is [0, s1_pin]
    double s2_pin = 0.0;   ///< coupler-link contact span is [length - s2_pin, length]
    SampledLoad q_bb;      ///< bucket-base side distribution
    SampledLoad q_la;      ///< link side distribution
};

enum class Axis { X, Y };
enum class CylinderSide { Head, Rod };

/// Soil reaction from hinge forces and the free-body inertia:
///   f_s_x = f_mp_x + f_sp_x - m*a_x
///   f_s_y = W + m*a_y - f_mp_y - f_sp_y
SoilForce soil_force_from_hinges(const HingeForces& h, const BucketBody& b);

/// Planar force balance residual of a (hinges, soil, body) triple in the
/// static case; (0,0) iff the triple is consistent.
std::pair<double, double> static_residual(const HingeForces& h,
                                          const SoilForce& s,
                                          const BucketBody& b);

/// Shear forces at the two gauge grooves: trapezoidal integrals of the
/// contact distributions over their spans. Throws EmptySpan when a span
/// has fewer than two samples.
std::pair<double, double> pin_shears(const LoadPin& pin);

/// Map groove shear readings to the contact resultants. With grooves at
/// the neutral axis between the spans each reading equals the adjacent
/// resultant, so the map is the identity per measured axis.
std::pair<double, double> resultant_from_shears(double v1, double v2, Axis axis);

/// p = force / piston_area. Throws NonPositiveArea.
double cylinder_pressure(double force, double piston_area, CylinderSide side);

} // namespace loadertwin

#pragma once

#include <map>
#include <string>

#include "loadertwin/vec2.hpp"

namespace loadertwin {

/// Inclusive scalar range.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
    double width() const { return hi - lo; }
};

/// Dimensions, frame constants and masses of the planar Z-bar loader
/// linkage. Lengths in mm, angles in rad, masses in kg.
///
/// Point names used throughout the mechanism code:
///   p0   lift-cylinder base (frame origin of the linkage model)
///   p1   main-arm pivot on the chassis, at l7 along direction beta0
///   t0   tilt-cylinder base, at l1 along direction beta1
///   p8   bucket blade tip, p7 bucket upper coupler pin
///   p11  lift-crank pin on the arm, p12 bell-crank pivot bracket
struct LinkageGeometry {
    // link lengths (mm)
    double l1 = 348.76;
    double l2 = 796.91;
    double l3 = 770.0;
    double l4 = 840.0;
    double l5 = 560.0;
    double l6 = 982.0;
    double l7 = 334.23;
    double l8 = 2030.0;
    double l9 = 772.33;
    double l10 = 272.41;
    double l11 = 1068.88;
    double l12 = 279.50;
    double l13 = 973.13;
    double l14 = 320.88;
    double l15 = 320.0;
    double l16 = 520.0;
    // retracted cylinder base lengths (mm); extensions are measured on top
    double l17 = 0.0;
    double l18 = 0.0;

    // frame constants (rad). beta0/beta1/angle_p0p12p2 are rig-dependent
    // and have no catalogue value; the shipped defaults are the pinned
    // test fixture.
    double beta0 = 65.0 * M_PI / 180.0;
    double beta1 = 95.0 * M_PI / 180.0;
    double beta2 = 26.8 * M_PI / 180.0;
    double beta3 = 12.31 * M_PI / 180.0;
    double beta4 = 16.06 * M_PI / 180.0;
    double beta5 = 5.86 * M_PI / 180.0;
    /// Angle between the p0->p12 sight line and the lift-cylinder axis.
    double angle_p0p12p2 = 6.0 * M_PI / 180.0;

    /// Linkage frame origin (mm).
    Vec2 p0{0.0, 0.0};

    /// Part masses (kg).
    std::map<std::string, double> masses = {
        {"bucket", 205.8},         {"bucket_base", 84.8},
        {"link_b", 8.99},          {"link_a", 33.9},
        {"main_arm", 294.6},       {"hydraulic_rod_a1", 20.3},
        {"hydraulic_rod_a2", 13.1}, {"hydraulic_rod_b1", 19.6},
        {"hydraulic_rod_b2", 14.7},
    };

    /// Admissible extension ranges (mm). With l17 = l18 = 0 the extension
    /// equals the full cylinder length.
    Range stroke_lift{900.0, 1080.0};
    Range stroke_tilt{1360.0, 1630.0};

    /// Assembly scan window used by the numeric forward solve (rad).
    Range theta3_band{40.0 * M_PI / 180.0, 96.0 * M_PI / 180.0};
    Range theta4_band{0.0, 83.0 * M_PI / 180.0};

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
};

/// Blade pose the inverse kinematics solves for.
struct TaskTarget {
    double theta4 = 0.0;  ///< bucket orientation (rad)
    double y_p8 = 0.0;    ///< blade-tip height (mm)
};

/// Lift/tilt cylinder state. s1/s2 are the rod extensions; s_lift/s_tilt
/// the full pin-to-pin lengths (extension + retracted base length).
struct CylinderExtensions {
    double s1 = 0.0;
    double s2 = 0.0;
    double s_lift = 0.0;
    double s_tilt = 0.0;
};

} // namespace loadertwin

#pragma once

#include <utility>

#include "loadertwin/geometry.hpp"
#include "loadertwin/trig.hpp"
#include "loadertwin/vec2.hpp"

namespace loadertwin {

/// Planar loop-closure residuals of a joint state (mm). Each member is the
/// vector gap of one closed chain evaluated from the solved angles alone:
///   lift: cylinder base -> crank pin vs. the arm-mounted pin p11
///   link: bell-crank and coupler chain to p7 vs. the arm + bucket chain
///   tilt: tilt cylinder to the bell-crank rod pin vs. the bracket chain
struct LoopResiduals {
    Vec2 lift;
    Vec2 link;
    Vec2 tilt;
    double max_abs() const;
};

/// Full joint state of the linkage. Angles in rad, lengths in mm.
struct JointSolution {
    double theta0 = 0.0;             ///< lift-cylinder tilt from vertical
    double theta3 = 0.0;             ///< main-arm joint angle
    double theta4 = 0.0;             ///< bucket orientation (copied target)
    double theta5 = 0.0;             ///< tilt-cylinder side angle
    double theta5_plus_theta8 = 0.0; ///< sum resolved before theta8 is known
    double theta6 = 0.0;             ///< bell-crank/coupler transfer angle
    double theta7 = 0.0;             ///< coupler-to-bucket angle
    double theta8 = 0.0;             ///< tilt-cylinder swing angle
    double theta9 = 0.0;             ///< lift-crank angle
    double theta10 = 0.0;            ///< arm bracket angle (= theta3 - beta5)

    Vec2 p7;   ///< bucket upper coupler pin
    Vec2 p8;   ///< blade tip
    Vec2 p11;  ///< lift-crank pin on the arm
    Vec2 p12;  ///< bell-crank pivot

    CylinderExtensions extensions;
    double y_p8 = 0.0;  ///< blade height implied by (theta3, theta4)
};

/// Inverse-kinematics knobs.
struct IkOptions {
    /// Branch of the arm-height solve; the supplementary branch mirrors the
    /// arm above the horizontal sight line and normally leaves the band.
    TrigBranch arm_branch = TrigBranch::Principal;
    /// Branch of the lift-loop solve.
    TrigBranch lift_branch = TrigBranch::Principal;
    /// Reject solutions whose extensions leave the configured strokes.
    bool enforce_stroke = true;
};

/// Closed-form inverse kinematics: blade pose -> full joint state.
///
/// Stage order (each stage names itself in thrown errors):
///   1 arm-height solve        theta3 from y_p8, theta4
///   2 bracket chain           theta10, p11, p12
///   3 cylinder sighting       theta0 from the p0->p12 direction
///   4 lift loop               s_lift, theta9
///   5 bucket points           p8, p7
///   6 coupler reach           theta6 by law of cosines
///   7 bell-crank angle        lambda = theta5 - (beta1 - theta8)
///   8 coupler angle           theta7, and the sum theta5 + theta8
///   9 tilt loop               s_tilt, theta8, then theta5
///
/// Throws WorkspaceError / StrokeError / GeometryError.
JointSolution inverse_kinematics(const TaskTarget& target,
                                 const LinkageGeometry& geom,
                                 const IkOptions& options = {});

/// Numeric forward kinematics: extensions -> blade pose + joint state.
///
/// Deterministic staged bisection on the closed-form maps: s_lift depends
/// on theta3 alone (strictly monotone across the configured band), then
/// s_tilt(theta3, .) is scanned across the theta4 band with refinement of
/// assembly-boundary cells and of same-sign cells hiding a fold crest
/// (targets attained twice between neighbouring grid nodes). Residuals of
/// the returned state are below 1e-10 mm. Only ext.s1 / ext.s2 are read.
///
/// Throws NoConvergence / AssemblyError.
std::pair<TaskTarget, JointSolution> forward_kinematics(
    const CylinderExtensions& ext, const LinkageGeometry& geom);

/// Blade-tip height (mm) implied by the solved arm and bucket angles:
/// l7*sin(beta0) + l8*sin(beta0 - theta3) - l9*sin(theta4 - (beta0 - theta3)).
double blade_height(const JointSolution& joints, const LinkageGeometry& geom);

/// Evaluate all loop closures of a solved state (mm gaps).
LoopResiduals loop_residuals(const JointSolution& joints,
                             const LinkageGeometry& geom);

/// Full cylinder length of the lift loop as a function of theta3 alone
/// (exposed because the forward solve and its tests bisect on it).
double lift_length_of_theta3(double theta3, const LinkageGeometry& geom);

/// Full cylinder length of the tilt loop at a fixed arm angle; NaN where
/// the bucket chain does not assemble. Exposed for the same reason: the
/// forward solve scans it, and tests probe fold crests through it.
double tilt_length_of_theta4(double theta3, double theta4,
                             const LinkageGeometry& geom);

} // namespace loadertwin

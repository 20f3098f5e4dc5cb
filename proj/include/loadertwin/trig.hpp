#pragma once

namespace loadertwin {

/// Root branch for solve_linear_trig.
enum class TrigBranch {
    Principal,     ///< x = asin(a/R) - phase
    Supplementary, ///< x = pi - asin(a/R) - phase
};

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Solve a = b*sin(x) - c*cos(x) for x.
///
/// Writing R = sqrt(b^2 + c^2) and phi = atan2(-c, b), the left side is
/// R*sin(x + phi); the principal branch takes the arcsine directly, the
/// supplementary branch takes its reflection about pi/2. The result is
/// wrapped to (-pi, pi].
///
/// Throws Degenerate when b = c = 0 and Unsolvable when |a| > R (no real
/// root; for linkage stages this signals a target outside the workspace).
double solve_linear_trig(double a, double b, double c,
                         TrigBranch branch = TrigBranch::Principal);

/// Result of solve_cos_sin_system.
struct CosSinSolution {
    double angle = 0.0;        ///< four-quadrant solution
    double consistency = 0.0;  ///< cos^2 + sin^2 - 1 of the raw solution
};

/// Solve the pair  p*cos(x) + q*sin(x) = c3,  r*sin(x) + s*cos(x) = f3
/// by inverting the 2x2 system for (cos x, sin x) and taking atan2.
///
/// Throws SingularSystem when |p*r - q*s| < 1e-12 and Inconsistent when the
/// recovered pair violates cos^2 + sin^2 = 1 by more than 1e-6 (the inputs
/// then do not describe a single angle).
CosSinSolution solve_cos_sin_system(double p, double q, double r, double s,
                                    double c3, double f3);

} // namespace loadertwin

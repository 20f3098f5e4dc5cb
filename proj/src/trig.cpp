#include "loadertwin/trig.hpp"

#include <cmath>
#include <string>

#include "loadertwin/errors.hpp"

namespace loadertwin {

double wrap_angle(double a) {
    if (a > -M_PI && a <= M_PI) return a;
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

double solve_linear_trig(double a, double b, double c, TrigBranch branch) {
    const double R = std::hypot(b, c);
    if (R == 0.0) throw Degenerate("solve_linear_trig: b = c = 0");
    double ratio = a / R;
    if (std::fabs(ratio) > 1.0) {
        // allow round-off at the workspace boundary
        if (std::fabs(ratio) > 1.0 + 1e-12)
            throw Unsolvable("solve_linear_trig: |a| > sqrt(b^2+c^2), ratio = " +
                             std::to_string(ratio));
        ratio = std::copysign(1.0, ratio);
    }
    const double phi = std::atan2(-c, b);
    const double base = std::asin(ratio);
    const double x = (branch == TrigBranch::Principal) ? base - phi
                                                       : M_PI - base - phi;
    return wrap_angle(x);
}

CosSinSolution solve_cos_sin_system(double p, double q, double r, double s,
                                    double c3, double f3) {
    const double det = p * r - q * s;
    if (std::fabs(det) < 1e-12)
        throw SingularSystem("solve_cos_sin_system: determinant " +
                             std::to_string(det));
    // [c3]   [p  q] [cos]          [cos]    1  [ r  -q] [c3]
    // [f3] = [s  r] [sin]   =>     [sin] = det [-s   p] [f3]
    const double cosx = (r * c3 - q * f3) / det;
    const double sinx = (p * f3 - s * c3) / det;
    const double consistency = cosx * cosx + sinx * sinx - 1.0;
    if (std::fabs(consistency) > 1e-6)
        throw Inconsistent("solve_cos_sin_system: cos^2+sin^2-1 = " +
                           std::to_string(consistency));
    return {std::atan2(sinx, cosx), consistency};
}

} // namespace loadertwin

#include "loadertwin/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "loadertwin/errors.hpp"

namespace loadertwin {

namespace {

constexpr int kMaxBisect = 200;

/// Everything determined by theta3 alone (arm, brackets, lift loop).
struct LiftSide {
    double theta10 = 0.0;
    Vec2 p1, p11, p12;
    double e_c = 0.0;     ///< lift-cylinder direction angle
    double theta0 = 0.0;
    double phi = 0.0;     ///< lift-crank leg direction angle
    double s_lift = 0.0;
    double theta9 = 0.0;
};

/// Everything added once theta4 is known (bucket, coupler, tilt loop).
struct TiltSide {
    Vec2 p7, p8;
    double theta6 = 0.0;
    double lambda = 0.0;  ///< bell-crank leg parameter = theta5-(beta1-theta8)
    double theta7 = 0.0;
    double theta5_plus_theta8 = 0.0;
    double theta8 = 0.0;
    double theta5 = 0.0;
    double s_tilt = 0.0;
};

LiftSide solve_lift_side(double theta3, const LinkageGeometry& g,
                         TrigBranch lift_branch) {
    LiftSide out;
    out.theta10 = theta3 - g.beta5;
    const double w = g.beta0 - out.theta10;  // bracket ray direction
    out.p1 = g.p0 + polar(g.l7, g.beta0);
    out.p11 = out.p1 + polar(g.l11, w);
    out.p12 = out.p11 + polar(g.l12, g.beta2 + w);

    // cylinder direction: sight p0->p12, offset by the configured angle
    const Vec2 sight = out.p12 - g.p0;
    out.e_c = std::atan2(sight.y, sight.x) - g.angle_p0p12p2;
    out.theta0 = wrap_angle(M_PI / 2.0 - out.e_c);
    const double ce = std::cos(out.e_c);
    const double se = std::sin(out.e_c);
    if (std::fabs(ce) < 1e-9)
        throw GeometryError("cylinder sighting: lift cylinder vertical, "
                            "x-projection degenerate");

    // lift loop: cylinder leg + crank leg of length l10 reach p11.
    // Eliminating the cylinder length leaves l10*sin(phi - e_c) = g2 with
    // g2 the p11 offset normal to the cylinder axis.
    const double c2 = out.p11.x - g.p0.x;
    const double f2 = out.p11.y - g.p0.y;
    const double g2 = f2 * ce - c2 * se;
    try {
        out.phi = solve_linear_trig(g2, g.l10 * ce, g.l10 * se, lift_branch);
    } catch (const Unsolvable& e) {
        throw WorkspaceError(std::string("lift loop: crank cannot reach the "
                                         "cylinder line (") + e.what() + ")");
    } catch (const Degenerate& e) {
        throw GeometryError(std::string("lift loop: ") + e.what());
    }
    out.s_lift = (c2 - g.l10 * std::cos(out.phi)) / ce;
    out.theta9 = wrap_angle(M_PI - out.e_c - out.phi);
    return out;
}

TiltSide solve_tilt_side(double theta3, double theta4, const LiftSide& lift,
                         const LinkageGeometry& g) {
    TiltSide out;
    const double v = g.beta0 - theta3;  // arm direction angle
    const double u = theta4 - v;        // bucket leg parameter

    // bucket points from the arm tip
    out.p8 = lift.p1 + polar(g.l8, v) +
             Vec2(g.l9 * std::cos(u), -g.l9 * std::sin(u));
    const double psi = M_PI / 2.0 - g.beta4 - u;
    out.p7 = out.p8 + Vec2(-g.l6 * std::cos(psi), g.l6 * std::sin(psi));

    // coupler reach: two-link chain l16 + l5 spans p12 -> p7
    const Vec2 delta = out.p7 - lift.p12;
    const double dist = delta.norm();
    const double denom = -2.0 * g.l16 * g.l5;
    if (denom == 0.0)
        throw GeometryError("coupler reach: zero-length bell-crank or coupler");
    double cy = (dist * dist - g.l16 * g.l16 - g.l5 * g.l5) / denom;
    if (std::fabs(cy) > 1.0) {
        if (std::fabs(cy) > 1.0 + 1e-12)
            throw WorkspaceError(
                "coupler reach: pin separation " + std::to_string(dist) +
                " mm outside the span of the bell-crank and coupler");
        cy = std::copysign(1.0, cy);
    }
    out.theta6 = M_PI - std::acos(cy);

    // bell-crank leg angle: p12 + l16*(cos L, -sin L) + l5*ang(theta6 - L)
    // reaches p7; expanding gives a plain 2x2 system in (cos L, sin L).
    const double p = g.l16 + g.l5 * std::cos(out.theta6);
    const double q = g.l5 * std::sin(out.theta6);
    out.lambda = solve_cos_sin_system(p, q, -p, q, delta.x, delta.y).angle;

    out.theta7 = wrap_angle(out.theta6 - out.lambda + psi);
    out.theta5_plus_theta8 = wrap_angle(g.beta1 + out.lambda);

    // tilt loop: cylinder from t0 to the bell-crank rod pin
    const Vec2 t0 = g.p0 + polar(g.l1, g.beta1);
    const Vec2 rod_pin = lift.p12 -
        Vec2(g.l15 * std::cos(out.lambda), -g.l15 * std::sin(out.lambda));
    const Vec2 a4 = rod_pin - t0;
    out.s_tilt = a4.norm();
    const double x7 = std::atan2(a4.y, a4.x);  // cylinder direction
    out.theta8 = wrap_angle(g.beta1 - x7);
    out.theta5 = wrap_angle(out.theta5_plus_theta8 - out.theta8);
    return out;
}

JointSolution assemble(double theta3, double theta4, const LiftSide& lift,
                       const TiltSide& tilt, const LinkageGeometry& g) {
    JointSolution s;
    s.theta0 = lift.theta0;
    s.theta3 = wrap_angle(theta3);
    s.theta4 = wrap_angle(theta4);
    s.theta5 = tilt.theta5;
    s.theta5_plus_theta8 = tilt.theta5_plus_theta8;
    s.theta6 = wrap_angle(tilt.theta6);
    s.theta7 = tilt.theta7;
    s.theta8 = tilt.theta8;
    s.theta9 = lift.theta9;
    s.theta10 = lift.theta10;
    s.p7 = tilt.p7;
    s.p8 = tilt.p8;
    s.p11 = lift.p11;
    s.p12 = lift.p12;
    s.extensions.s_lift = lift.s_lift;
    s.extensions.s_tilt = tilt.s_tilt;
    s.extensions.s1 = lift.s_lift - g.l17;
    s.extensions.s2 = tilt.s_tilt - g.l18;
    s.y_p8 = blade_height(s, g);
    return s;
}

} // namespace

double LoopResiduals::max_abs() const {
    return std::max({std::fabs(lift.x), std::fabs(lift.y), std::fabs(link.x),
                     std::fabs(link.y), std::fabs(tilt.x), std::fabs(tilt.y)});
}

double blade_height(const JointSolution& joints, const LinkageGeometry& g) {
    const double v = g.beta0 - joints.theta3;
    return g.p0.y + g.l7 * std::sin(g.beta0) + g.l8 * std::sin(v) -
           g.l9 * std::sin(joints.theta4 - v);
}

JointSolution inverse_kinematics(const TaskTarget& target,
                                 const LinkageGeometry& geom,
                                 const IkOptions& options) {
    if (!std::isfinite(target.theta4) || !std::isfinite(target.y_p8))
        throw GeometryError("arm-height solve: non-finite target");

    // stage 1: the height equation is linear in (sin v, cos v) with
    // v = beta0 - theta3
    const double a1 = target.y_p8 - geom.p0.y - geom.l7 * std::sin(geom.beta0);
    const double b1 = geom.l8 + geom.l9 * std::cos(target.theta4);
    const double c1 = geom.l9 * std::sin(target.theta4);
    double v = 0.0;
    try {
        v = solve_linear_trig(a1, b1, c1, options.arm_branch);
    } catch (const Unsolvable& e) {
        throw WorkspaceError(std::string("arm-height solve: blade height "
                                         "unreachable (") + e.what() + ")");
    } catch (const Degenerate& e) {
        throw GeometryError(std::string("arm-height solve: ") + e.what());
    }
    const double theta3 = geom.beta0 - v;

    const LiftSide lift = solve_lift_side(theta3, geom, options.lift_branch);
    const TiltSide tilt = solve_tilt_side(theta3, target.theta4, lift, geom);
    JointSolution sol = assemble(theta3, target.theta4, lift, tilt, geom);

    if (options.enforce_stroke) {
        if (!geom.stroke_lift.contains(sol.extensions.s1))
            throw StrokeError("lift extension " +
                              std::to_string(sol.extensions.s1) +
                              " mm outside stroke");
        if (!geom.stroke_tilt.contains(sol.extensions.s2))
            throw StrokeError("tilt extension " +
                              std::to_string(sol.extensions.s2) +
                              " mm outside stroke");
    }
    return sol;
}

double lift_length_of_theta3(double theta3, const LinkageGeometry& geom) {
    return solve_lift_side(theta3, geom, TrigBranch::Principal).s_lift;
}

namespace {

double tilt_length_or_nan(double theta3, double theta4, const LiftSide& lift,
                          const LinkageGeometry& g);

}  // namespace

double tilt_length_of_theta4(double theta3, double theta4,
                             const LinkageGeometry& geom) {
    const LiftSide lift = solve_lift_side(theta3, geom, TrigBranch::Principal);
    return tilt_length_or_nan(theta3, theta4, lift, geom);
}

namespace {

double tilt_length_or_nan(double theta3, double theta4, const LiftSide& lift,
                          const LinkageGeometry& g) {
    try {
        return solve_tilt_side(theta3, theta4, lift, g).s_tilt;
    } catch (const DomainFailure&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

std::pair<TaskTarget, JointSolution> forward_kinematics(
    const CylinderExtensions& ext, const LinkageGeometry& geom) {
    const double s_lift = ext.s1 + geom.l17;
    const double s_tilt = ext.s2 + geom.l18;

    // stage 1: theta3 from the lift length (strictly monotone on the band)
    auto f1 = [&](double t3) {
        return lift_length_of_theta3(t3, geom) - s_lift;
    };
    double lo = geom.theta3_band.lo, hi = geom.theta3_band.hi;
    double flo = f1(lo), fhi = f1(hi);
    if (std::isnan(flo) || std::isnan(fhi) || flo * fhi > 0.0)
        throw AssemblyError("lift length " + std::to_string(s_lift) +
                            " mm not attained inside the arm band");
    for (int i = 0; i < kMaxBisect && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f1(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if ((fm < 0.0) == (flo < 0.0)) { lo = mid; flo = fm; }
        else hi = mid;
    }
    const double theta3 = 0.5 * (lo + hi);
    const LiftSide lift = solve_lift_side(theta3, geom, TrigBranch::Principal);

    // stage 2: scan the theta4 band for tilt-length crossings; cells cut by
    // the assembly boundary are refined by binary search before bracketing
    auto f2 = [&](double t4) {
        const double st = tilt_length_or_nan(theta3, t4, lift, geom);
        return st - s_tilt;  // NaN propagates
    };
    constexpr int kCells = 256;
    const double t4lo = geom.theta4_band.lo, t4hi = geom.theta4_band.hi;
    const double step = (t4hi - t4lo) / kCells;
    double theta4 = std::numeric_limits<double>::quiet_NaN();
    double prev_t = t4lo, prev_f = f2(t4lo);
    for (int i = 1; i <= kCells && std::isnan(theta4); ++i) {
        const double cur_t = (i == kCells) ? t4hi : t4lo + i * step;
        const double cur_f = f2(cur_t);
        double a_t = prev_t, a_f = prev_f, b_t = cur_t, b_f = cur_f;
        prev_t = cur_t;
        prev_f = cur_f;
        if (std::isnan(a_f) && std::isnan(b_f)) continue;
        if (std::isnan(a_f) || std::isnan(b_f)) {
            // shrink the cell onto the assembly boundary
            const bool left_bad = std::isnan(a_f);
            double glo = a_t, ghi = b_t;
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (glo + ghi);
                if (std::isnan(f2(mid)) == left_bad) glo = mid;
                else ghi = mid;
            }
            if (left_bad) { a_t = ghi; a_f = f2(ghi); }
            else          { b_t = glo; b_f = f2(glo); }
            if (std::isnan(a_f) || std::isnan(b_f)) continue;
        }
        if (a_f == 0.0) { theta4 = a_t; break; }
        if (b_f == 0.0) { theta4 = b_t; break; }
        if (a_f * b_f > 0.0) continue;
        for (int k = 0; k < kMaxBisect && b_t - a_t > 1e-15; ++k) {
            const double mid = 0.5 * (a_t + b_t);
            const double fm = f2(mid);
            if (fm == 0.0) { a_t = b_t = mid; break; }
            if ((fm < 0.0) == (a_f < 0.0)) { a_t = mid; a_f = fm; }
            else b_t = mid;
        }
        theta4 = 0.5 * (a_t + b_t);
    }
    // fold rescue: a target just below a tilt-length crest (or just above a
    // trough) crosses twice between neighbouring grid nodes, so both cell
    // ends share one sign; locate the interior extremum of such cells by
    // golden section and bisect its left flank
    if (std::isnan(theta4)) {
        constexpr double kInvGolden = 0.6180339887498949;
        prev_t = t4lo;
        prev_f = f2(t4lo);
        for (int i = 1; i <= kCells && std::isnan(theta4); ++i) {
            const double cur_t = (i == kCells) ? t4hi : t4lo + i * step;
            const double cur_f = f2(cur_t);
            const double a_t = prev_t, a_f = prev_f;
            const double b_t = cur_t, b_f = cur_f;
            prev_t = cur_t;
            prev_f = cur_f;
            if (std::isnan(a_f) || std::isnan(b_f) || a_f * b_f <= 0.0)
                continue;  // empty or already covered by the first pass
            const bool want_max = a_f < 0.0;
            double glo = a_t, ghi = b_t;
            double c_t = ghi - kInvGolden * (ghi - glo);
            double d_t = glo + kInvGolden * (ghi - glo);
            double c_f = f2(c_t), d_f = f2(d_t);
            for (int k = 0; k < 90 && ghi - glo > 1e-14; ++k) {
                bool keep_left;
                if (std::isnan(c_f)) keep_left = false;  // NaN loses either way
                else if (std::isnan(d_f)) keep_left = true;
                else keep_left = want_max ? (c_f > d_f) : (c_f < d_f);
                if (keep_left) {
                    ghi = d_t; d_t = c_t; d_f = c_f;
                    c_t = ghi - kInvGolden * (ghi - glo);
                    c_f = f2(c_t);
                } else {
                    glo = c_t; c_t = d_t; c_f = d_f;
                    d_t = glo + kInvGolden * (ghi - glo);
                    d_f = f2(d_t);
                }
            }
            const double e_t = 0.5 * (glo + ghi);
            const double e_f = f2(e_t);
            if (std::isnan(e_f) || (want_max ? e_f < 0.0 : e_f > 0.0))
                continue;  // the extremum never reaches the target
            double x_lo = a_t, x_hi = e_t, f_lo = a_f;
            for (int k = 0; k < kMaxBisect && x_hi - x_lo > 1e-15; ++k) {
                const double mid = 0.5 * (x_lo + x_hi);
                const double fm = f2(mid);
                if (fm == 0.0) { x_lo = x_hi = mid; break; }
                if ((fm < 0.0) == (f_lo < 0.0)) { x_lo = mid; f_lo = fm; }
                else x_hi = mid;
            }
            theta4 = 0.5 * (x_lo + x_hi);
        }
    }
    if (std::isnan(theta4))
        throw AssemblyError("tilt length " + std::to_string(s_tilt) +
                            " mm not attained inside the bucket band");

    const TiltSide tilt = solve_tilt_side(theta3, theta4, lift, geom);
    JointSolution sol = assemble(theta3, theta4, lift, tilt, geom);
    if (std::fabs(sol.extensions.s_lift - s_lift) > 1e-10 ||
        std::fabs(sol.extensions.s_tilt - s_tilt) > 1e-10)
        throw NoConvergence("forward solve residual above 1e-10 mm");
    // keep the caller's extensions bit-exactly
    sol.extensions.s1 = ext.s1;
    sol.extensions.s2 = ext.s2;
    sol.extensions.s_lift = s_lift;
    sol.extensions.s_tilt = s_tilt;
    return {TaskTarget{sol.theta4, sol.y_p8}, sol};
}

LoopResiduals loop_residuals(const JointSolution& s,
                             const LinkageGeometry& g) {
    LoopResiduals r;
    const Vec2 arm_base = g.p0 + polar(g.l7, g.beta0);
    const double e_c = M_PI / 2.0 - s.theta0;

    // lift loop: cylinder + crank vs. arm-mounted pin
    const Vec2 p11 = arm_base + polar(g.l11, g.beta0 - s.theta10);
    const Vec2 lift_chain = g.p0 + polar(s.extensions.s_lift, e_c) +
                            polar(g.l10, M_PI - (s.theta9 + e_c));
    r.lift = lift_chain - p11;

    // coupler loop: bracket + bell-crank + coupler vs. arm + bucket chain
    const double lambda = s.theta5 - (g.beta1 - s.theta8);
    const Vec2 p12 = p11 + polar(g.l12, g.beta2 + (g.beta0 - s.theta10));
    const Vec2 crank_leg{g.l16 * std::cos(lambda), -g.l16 * std::sin(lambda)};
    const Vec2 coupler_leg = polar(g.l5, s.theta6 - lambda);
    const double gg = s.theta7 - (s.theta6 - lambda);
    const Vec2 bucket_leg{-g.l6 * std::cos(gg), g.l6 * std::sin(gg)};
    const double v = g.beta0 - s.theta3;
    const double u = s.theta4 - v;
    const Vec2 p8 = arm_base + polar(g.l8, v) +
                    Vec2(g.l9 * std::cos(u), -g.l9 * std::sin(u));
    r.link = (p12 + crank_leg + coupler_leg) - (p8 + bucket_leg);

    // tilt loop: tilt cylinder vs. bracket + bell-crank rod leg
    const Vec2 t0 = g.p0 + polar(g.l1, g.beta1);
    const Vec2 rod_pin = p12 - Vec2(g.l15 * std::cos(lambda),
                                    -g.l15 * std::sin(lambda));
    r.tilt = (t0 + polar(s.extensions.s_tilt, g.beta1 - s.theta8)) - rod_pin;
    return r;
}

void LinkageGeometry::validate() const {
    const struct {
        const char* name;
        double value;
    } lengths[] = {
        {"l1", l1},   {"l2", l2},   {"l3", l3},   {"l4", l4},
        {"l5", l5},   {"l6", l6},   {"l7", l7},   {"l8", l8},
        {"l9", l9},   {"l10", l10}, {"l11", l11}, {"l12", l12},
        {"l13", l13}, {"l14", l14}, {"l15", l15}, {"l16", l16},
    };
    for (const auto& lk : lengths)
        if (!(lk.value > 0.0))
            throw ValidationError(std::string(lk.name) + " must be positive");
    if (!(l17 >= 0.0)) throw ValidationError("l17 must be non-negative");
    if (!(l18 >= 0.0)) throw ValidationError("l18 must be non-negative");
    const struct {
        const char* name;
        double value;
    } angles[] = {
        {"beta0", beta0}, {"beta1", beta1}, {"beta2", beta2},
        {"beta3", beta3}, {"beta4", beta4}, {"beta5", beta5},
        {"angle_p0p12p2", angle_p0p12p2},
    };
    for (const auto& an : angles)
        if (!(an.value > -M_PI && an.value <= M_PI) || !std::isfinite(an.value))
            throw ValidationError(std::string(an.name) +
                                  " must lie in (-pi, pi]");
    for (const auto& [part, mass] : masses)
        if (!(mass > 0.0))
            throw ValidationError("mass of " + part + " must be positive");
    const struct {
        const char* name;
        Range range;
    } ranges[] = {
        {"stroke_lift", stroke_lift},
        {"stroke_tilt", stroke_tilt},
        {"theta3_band", theta3_band},
        {"theta4_band", theta4_band},
    };
    for (const auto& rg : ranges)
        if (!(rg.range.lo < rg.range.hi))
            throw ValidationError(std::string(rg.name) +
                                  " must have positive width");
}

} // namespace loadertwin

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "loadertwin/errors.hpp"
#include "loadertwin/geometry.hpp"
#include "loadertwin/mechanism.hpp"

using namespace loadertwin;

namespace {

/// Independently solved joint states, frozen as regression anchors.
struct GoldenPose {
    double theta4, y_p8;
    double theta0, theta3, theta5, theta6, theta7, theta8, theta9, theta10;
    double s_lift, s_tilt;
};

const GoldenPose kGolden[] = {
    {0.39999999999999997, -794.5394142455458, 1.5611836228364699,
     1.4344640137963143, 1.9568218578334085, 2.0220831848255427,
     0.73446572181630965, 1.5793548434950453, 2.8184935846005077,
     1.3321877196294463, 930.215016611582769, 1590.80037364972145},
    {0.75, -223.53481186756221, 1.3028549912067509, 1.1344640137963142,
     2.0146852584894606, 2.1087683774603638, 0.97580849139915116,
     1.3168338658909726, 2.3136128617243363, 1.0321877196294464,
     1009.78197189505806, 1595.00510079843411},
    {1.1000000000000001, 224.90889364593875, 1.0948262874876566,
     0.88446401379631423, 2.2819656368550469, 2.2689736940041927,
     0.96318776267875317, 1.1223795327896133, 1.9197021935003427,
     0.78218771962944655, 1062.51639921916512, 1652.98096366873369},
    {1.02, 644.68360101004328, 0.9722611214671355, 0.73446401379631421,
     1.3612532835021534, 1.812112966026423, 1.84462387269573,
     0.93479504814776038, 1.6924551940497965, 0.63218771962944642,
     1087.4994476200161, 1346.56727789693491},
    {0.48000000000000004, -1129.8253401622619, 1.6680029142553086,
     1.5544640137963142, 2.1530639204939099, 1.5332023313616638,
     -0.27654843896432468, 1.7052460881512996, 3.0325806851204109,
     1.4521877196294464, 894.216415703867483, 1653.61478345666956},
};

constexpr double kAngleTol = 1e-10;  // rad
constexpr double kLengthTol = 1e-7;  // mm

void check_invariants(const JointSolution& s, const LinkageGeometry& geom) {
    CHECK(loop_residuals(s, geom).max_abs() < 1e-9);
    CHECK(s.theta10 == s.theta3 - geom.beta5);  // bitwise bracket identity
    CHECK(std::abs(wrap_angle(s.theta5_plus_theta8 - (s.theta5 + s.theta8))) <
          1e-9);
    CHECK(std::abs(blade_height(s, geom) - s.y_p8) < 1e-9);
    CHECK(std::abs(s.p8.y - s.y_p8) < 1e-9);
}

} // namespace

TEST_CASE("inverse kinematics reproduces frozen joint states") {
    const LinkageGeometry geom;
    IkOptions opts;
    opts.enforce_stroke = false;  // two anchors sit just outside the strokes
    for (const GoldenPose& g : kGolden) {
        CAPTURE(g.theta4);
        CAPTURE(g.y_p8);
        const JointSolution s =
            inverse_kinematics({g.theta4, g.y_p8}, geom, opts);
        CHECK(std::abs(s.theta0 - g.theta0) < kAngleTol);
        CHECK(std::abs(s.theta3 - g.theta3) < kAngleTol);
        CHECK(s.theta4 == g.theta4);
        CHECK(std::abs(s.theta5 - g.theta5) < kAngleTol);
        CHECK(std::abs(s.theta6 - g.theta6) < kAngleTol);
        CHECK(std::abs(s.theta7 - g.theta7) < kAngleTol);
        CHECK(std::abs(s.theta8 - g.theta8) < kAngleTol);
        CHECK(std::abs(s.theta9 - g.theta9) < kAngleTol);
        CHECK(std::abs(s.theta10 - g.theta10) < kAngleTol);
        CHECK(std::abs(s.extensions.s_lift - g.s_lift) < kLengthTol);
        CHECK(std::abs(s.extensions.s_tilt - g.s_tilt) < kLengthTol);
        CHECK(std::abs(s.y_p8 - g.y_p8) < 1e-9);
        check_invariants(s, geom);
    }
}

TEST_CASE("forward kinematics reproduces a frozen pose") {
    const LinkageGeometry geom;
    CylinderExtensions ext;
    ext.s1 = 1000.0;
    ext.s2 = 1530.0;
    const auto [target, s] = forward_kinematics(ext, geom);
    CHECK(std::abs(target.theta4 - 0.64076829178092609) < 1e-9);
    CHECK(std::abs(target.y_p8 - (-265.83224776443052)) < 1e-6);
    CHECK(std::abs(s.theta3 - 1.1750241239706039) < 1e-9);
    CHECK(loop_residuals(s, geom).max_abs() < 1e-10);
    check_invariants(s, geom);
}

TEST_CASE("extension round trip: fk then ik returns the same strokes") {
    const LinkageGeometry geom;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lift(geom.stroke_lift.lo + 1e-3,
                                                geom.stroke_lift.hi - 1e-3);
    std::uniform_real_distribution<double> tilt(geom.stroke_tilt.lo + 1e-3,
                                                geom.stroke_tilt.hi - 1e-3);
    for (int i = 0; i < 200; ++i) {
        CylinderExtensions ext;
        ext.s1 = lift(rng);
        ext.s2 = tilt(rng);
        const auto [target, fwd] = forward_kinematics(ext, geom);
        const JointSolution back = inverse_kinematics(target, geom);
        CHECK(std::abs(back.extensions.s1 - ext.s1) < 1e-9);
        CHECK(std::abs(back.extensions.s2 - ext.s2) < 1e-9);
        check_invariants(back, geom);
        check_invariants(fwd, geom);
    }
}

TEST_CASE("pose round trip: ik then fk returns the same pose") {
    const LinkageGeometry geom;
    IkOptions opts;
    opts.enforce_stroke = false;
    std::mt19937_64 rng(5);
    // strip parametrization of reachable poses: theta3 offset v, theta4 = v+u
    std::uniform_real_distribution<double> v_dist(-0.42, 0.40);
    std::uniform_real_distribution<double> u_dist(0.60, 0.92);
    const double theta3_ref = 1.1344640137963142;
    int tested = 0;
    for (int i = 0; i < 200; ++i) {
        const double v = v_dist(rng);
        const double u = u_dist(rng);
        const double theta4 = v + u;
        // derive the target height from the arm/bucket chain at theta3
        const double theta3 = theta3_ref - v;
        const double y =
            geom.l7 * std::sin(geom.beta0) +
            geom.l8 * std::sin(geom.beta0 - theta3) -
            geom.l9 * std::sin(theta4 - (geom.beta0 - theta3));
        const JointSolution s = inverse_kinematics({theta4, y}, geom, opts);
        CHECK(std::abs(s.theta3 - theta3) < 1e-9);
        if (!geom.stroke_lift.contains(s.extensions.s_lift) ||
            !geom.stroke_tilt.contains(s.extensions.s_tilt))
            continue;
        const auto [target, fwd] = forward_kinematics(s.extensions, geom);
        CHECK(std::abs(target.theta4 - theta4) < 1e-6);
        CHECK(std::abs(target.y_p8 - y) < 1e-6);
        ++tested;
    }
    CHECK(tested > 50);
}

TEST_CASE("stroke enforcement rejects out-of-stroke poses") {
    const LinkageGeometry geom;
    // anchor 4 needs s_tilt below the tilt stroke
    CHECK_THROWS_AS(inverse_kinematics({1.02, 644.68360101004328}, geom),
                    StrokeError);
    // anchor 5 needs s_lift below the lift stroke
    CHECK_THROWS_AS(
        inverse_kinematics({0.48000000000000004, -1129.8253401622619}, geom),
        StrokeError);
    try {
        // anchor 4 leaves both strokes; the lift check trips first
        inverse_kinematics({1.02, 644.68360101004328}, geom);
        FAIL("expected StrokeError");
    } catch (const StrokeError& e) {
        CHECK(std::string(e.what()).find("lift extension") !=
              std::string::npos);
    }
    try {
        // pose of (s1 = 1000, s2 = 1650): only the tilt stroke is violated
        inverse_kinematics({0.76808801514678227, -338.06749979856932}, geom);
        FAIL("expected StrokeError");
    } catch (const StrokeError& e) {
        CHECK(std::string(e.what()).find("tilt extension") !=
              std::string::npos);
    }
}

TEST_CASE("workspace failures name the failing stage") {
    const LinkageGeometry geom;
    try {
        inverse_kinematics({0.0, 3300.0}, geom);
        FAIL("expected WorkspaceError");
    } catch (const WorkspaceError& e) {
        CHECK(std::string(e.what()).find("arm-height solve") !=
              std::string::npos);
    }
    try {
        IkOptions opts;
        opts.enforce_stroke = false;
        inverse_kinematics({-1.5, 0.0}, geom, opts);
        FAIL("expected WorkspaceError");
    } catch (const WorkspaceError& e) {
        CHECK(std::string(e.what()).find("coupler reach") !=
              std::string::npos);
    }
}

TEST_CASE("forward kinematics rejects unassemblable extensions") {
    const LinkageGeometry geom;
    CylinderExtensions ext;
    ext.s1 = 5000.0;  // far beyond any assemblable lift length
    ext.s2 = 1500.0;
    CHECK_THROWS_AS(forward_kinematics(ext, geom), DomainFailure);
}

TEST_CASE("lift length is strictly monotone across the arm band") {
    const LinkageGeometry geom;
    double prev = lift_length_of_theta3(geom.theta3_band.lo, geom);
    const int n = 500;
    for (int i = 1; i <= n; ++i) {
        const double t = geom.theta3_band.lo +
                         geom.theta3_band.width() * i / double(n);
        const double len = lift_length_of_theta3(t, geom);
        CHECK(len < prev);
        prev = len;
    }
}

TEST_CASE("geometry validation names the offending field") {
    LinkageGeometry geom;
    geom.l5 = -1.0;
    try {
        geom.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()) == "l5 must be positive");
    }

    geom = LinkageGeometry{};
    geom.masses["bucket"] = 0.0;
    CHECK_THROWS_AS(geom.validate(), ValidationError);

    geom = LinkageGeometry{};
    geom.beta0 = 7.0;  // outside (-pi, pi]
    CHECK_THROWS_AS(geom.validate(), ValidationError);

    geom = LinkageGeometry{};
    geom.stroke_lift = {1080.0, 900.0};
    CHECK_THROWS_AS(geom.validate(), ValidationError);

    CHECK_NOTHROW(LinkageGeometry{}.validate());
}

TEST_CASE("forward solve recovers targets just below a tilt-length crest") {
    LinkageGeometry geom;
    const double theta3 = 1.5544640137963142;

    // locate the crest of the tilt-length map across the bucket band
    double crest_t4 = geom.theta4_band.lo;
    double crest_s = -1.0;
    const int grid = 4000;
    for (int i = 0; i <= grid; ++i) {
        const double t4 = geom.theta4_band.lo +
                          geom.theta4_band.width() * i / grid;
        const double s = tilt_length_of_theta4(theta3, t4, geom);
        if (!std::isnan(s) && s > crest_s) {
            crest_s = s;
            crest_t4 = t4;
        }
    }
    REQUIRE(crest_s > 0.0);
    REQUIRE(crest_t4 > geom.theta4_band.lo + 0.01);
    REQUIRE(crest_t4 < geom.theta4_band.hi - 0.01);

    // both roots of this target sit in one scan cell around the crest, so
    // only the fold refinement can bracket them
    const double target_s = crest_s - 5e-4;
    CylinderExtensions ext;
    ext.s1 = lift_length_of_theta3(theta3, geom) - geom.l17;
    ext.s2 = target_s - geom.l18;
    const auto [pose, sol] = forward_kinematics(ext, geom);
    CHECK(std::fabs(sol.extensions.s_tilt - target_s) < 1e-9);
    CHECK(std::fabs(sol.theta4 - crest_t4) < 0.05);
    CHECK(loop_residuals(sol, geom).max_abs() < 1e-9);
}

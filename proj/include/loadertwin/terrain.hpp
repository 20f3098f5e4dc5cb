#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "loadertwin/trace.hpp"
#include "loadertwin/vec2.hpp"

namespace loadertwin {

/// Calibratable soil parameters plus two auxiliary constants that the
/// calibration never touches.
struct TerrainParams {
    double young_modulus = 1.0e6;  ///< Pa
    double mu_t = 0.67;            ///< sliding friction
    double e = 0.25;               ///< restitution
    double d = 0.06;               ///< particle diameter (m)
    double mu_r = 0.1;             ///< rolling resistance
    double rho = 1500.0;           ///< density (kg/m^3), auxiliary
    double nu = 0.3;               ///< Poisson ratio, auxiliary

    /// Throws ValidationError naming the violated bound.
    void validate() const;

    /// Plane-strain contact modulus for two like bodies: E / (2 (1 - nu^2)).
    double effective_young() const {
        return young_modulus / (2.0 * (1.0 - nu * nu));
    }
    /// Combined shear modulus for two like bodies: E / (4 (1+nu) (2-nu)).
    double effective_shear() const {
        return young_modulus / (4.0 * (1.0 + nu) * (2.0 - nu));
    }
};

/// Unit-depth disk.
struct Particle {
    Vec2 pos;            ///< m
    Vec2 vel;            ///< m/s
    double omega = 0.0;  ///< rad/s
    double radius = 0.0; ///< m
    double mass = 0.0;   ///< kg (disk area x unit depth x rho)
    double inertia = 0.0;///< kg m^2
};

/// Bucket cross-section polyline in its local frame (m); the blade tip is
/// the local origin.
struct BucketProfile {
    std::vector<Vec2> points;
};

/// World pose and motion of the bucket profile.
struct BucketState {
    Vec2 position;        ///< blade tip (m)
    double angle = 0.0;   ///< rad
    Vec2 velocity;        ///< m/s
    double omega = 0.0;   ///< rad/s
};

/// Result of one scalar contact evaluation.
struct ContactForce {
    double normal = 0.0;          ///< N along the contact normal; the damped
                                  ///< separation tail may dip negative
    double tangential = 0.0;      ///< N, signed along the tangent
    double rolling_torque = 0.0;  ///< N m, magnitude (caller applies sign)
    double new_spring = 0.0;      ///< updated tangential spring displacement (m)
};

/// Complete simulation state. Deterministic value type: stepping equal
/// states with equal inputs yields bit-equal successors.
struct SimState {
    std::vector<Particle> particles;
    BucketProfile bucket;
    BucketState bucket_state{{1.0e9, 1.0e9}, 0.0, {0.0, 0.0}, 0.0};
    double bed_width = 0.0;   ///< walls at x = 0 and x = bed_width
    double ground_y = 0.0;    ///< floor plane
    double time = 0.0;
    std::uint64_t seed = 0;

    /// Reaction on the bucket from the last step (N per unit depth).
    Vec2 bucket_force;
    double bucket_torque = 0.0;

    /// Tangential spring displacements keyed by contact identity.
    std::unordered_map<std::uint64_t, double> springs;

    /// Blow-up guard for step(); exceeding speed raises UnstableStep.
    double max_speed_guard = 200.0;

    /// Diagnostics from the last step.
    double diag_internal_force_sum = 0.0;  ///< |sum of pairwise forces| (N)
    double diag_max_force = 0.0;           ///< largest single |force| (N)
};

/// Scenario constants for a dig run (everything around the particles).
struct DigScenario {
    double bed_width = 2.0;    ///< m
    double bed_height = 0.45;  ///< m
    BucketProfile profile;     ///< empty -> default blade profile
    double bucket_width = 2.5; ///< out-of-plane width (m), scales force to N
    double dt = 0.0;           ///< s; 0 -> stable_dt(params)
};

/// Default bucket cross-section: straight blade with a short back wall.
BucketProfile default_bucket_profile();

/// Scalar Hertz normal force with restitution-matched damping, incremental
/// tangential spring with Coulomb cap, and a constant rolling-resistance
/// torque magnitude. Pure function; zero overlap returns all zeros.
///
/// normal_rel_vel < 0 means approach. spring_state is the accumulated
/// tangential displacement (m); dt advances it by tangential_rel_vel * dt
/// before the cap is applied.
ContactForce hertz_mindlin_contact(double overlap, double normal_rel_vel,
                                   double tangential_rel_vel,
                                   double effective_radius,
                                   double effective_mass,
                                   const TerrainParams& params,
                                   double spring_state, double dt);

/// Stability bound 0.2 * sqrt(m_min / k_max), with k_max the Hertz tangent
/// stiffness at a reference overlap of 0.01 d for the largest jittered
/// particle pair and m_min the smallest jittered particle mass.
double stable_dt(const TerrainParams& params);

/// Deterministic jittered-lattice bed of the given extent (width x height),
/// settled under gravity. Same seed, same state. Throws ExtentTooSmall.
SimState fill_bed(double width, double height, const TerrainParams& params,
                  std::uint64_t seed);

/// Advance one symplectic-Euler step. Throws UnstableStep when a particle
/// exceeds state.max_speed_guard.
SimState step(SimState state, double dt, const TerrainParams& params);

/// Fill a bed, sweep the bucket through the timed poses (linear interpolation
/// between keyframes) and record the bucket reaction-force magnitude, scaled
/// by the scenario bucket width, at every trajectory timestamp.
ForceTrace run_dig_cycle(const std::vector<TimedPose>& trajectory,
                         const TerrainParams& params, std::uint64_t seed,
                         const DigScenario& scenario);

} // namespace loadertwin

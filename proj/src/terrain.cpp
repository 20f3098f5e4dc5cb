#include "loadertwin/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loadertwin/errors.hpp"
#include "loadertwin/statics.hpp"

namespace loadertwin {

void TerrainParams::validate() const {
    if (!(young_modulus > 0.0))
        throw ValidationError("young_modulus must be positive");
    if (!(mu_t >= 0.0)) throw ValidationError("mu_t must be non-negative");
    if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("e must be in [0, 1]");
    if (!(d > 0.0)) throw ValidationError("d must be positive");
    if (!(mu_r >= 0.0)) throw ValidationError("mu_r must be non-negative");
    if (!(rho > 0.0)) throw ValidationError("rho must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) throw ValidationError("nu must be in [0, 0.5)");
}

ContactForce hertz_mindlin_contact(double overlap, double normal_rel_vel,
                                   double tangential_rel_vel,
                                   double effective_radius,
                                   double effective_mass,
                                   const TerrainParams& params,
                                   double spring_state, double dt) {
    ContactForce out;
    if (overlap <= 0.0) return out;  // also drops the spring

    const double estar = params.effective_young();
    const double gstar = params.effective_shear();
    const double sqrt_r_delta = std::sqrt(effective_radius * overlap);

    const double elastic = (4.0 / 3.0) * estar *
                           std::sqrt(effective_radius) * overlap *
                           std::sqrt(overlap);

    // restitution-matched dashpot: zero at e = 1, limit 1 at e -> 0
    double beta;
    if (params.e >= 1.0) beta = 0.0;
    else if (params.e <= 0.0) beta = 1.0;
    else {
        const double ln_e = std::log(params.e);
        beta = -ln_e / std::sqrt(ln_e * ln_e + M_PI * M_PI);
    }
    const double sn = 2.0 * estar * sqrt_r_delta;
    const double damping = -2.0 * std::sqrt(5.0 / 6.0) * beta *
                           std::sqrt(sn * effective_mass) * normal_rel_vel;
    // the damped separation tail may dip negative; suppressing it would
    // inflate the effective restitution of strongly damped contacts
    out.normal = elastic + damping;
    const double pressing = std::max(0.0, out.normal);

    // incremental tangential spring + matching dashpot while sticking;
    // Coulomb kinetic force while slipping (spring parked at the cap)
    const double st = 8.0 * gstar * sqrt_r_delta;
    double spring = spring_state + tangential_rel_vel * dt;
    const double damp = -2.0 * std::sqrt(5.0 / 6.0) * beta *
                        std::sqrt(st * effective_mass) * tangential_rel_vel;
    double ft = -st * spring + damp;
    const double cap = params.mu_t * pressing;
    if (std::fabs(ft) > cap) {
        ft = std::copysign(cap, ft);
        spring = (st > 0.0) ? -ft / st : 0.0;
    }
    out.tangential = ft;
    out.new_spring = spring;

    out.rolling_torque = params.mu_r * pressing * effective_radius;
    return out;
}

double stable_dt(const TerrainParams& params) {
    const double r_min = 0.45 * params.d;
    const double m_min = params.rho * M_PI * r_min * r_min;
    const double r_star_max = 0.275 * params.d;  // largest jittered pair
    // the stiffest mode is tangential: reduced mass m/2, and rotation adds
    // a^2/I = 2/m per disc, so the mode mass is m_min/6; reference overlap
    // 5% of d covers the static compression of a soft settled bed
    const double delta_ref = 0.05 * params.d;
    const double k_max =
        2.0 * params.effective_young() * std::sqrt(r_star_max * delta_ref);
    return 0.2 * std::sqrt(m_min / (6.0 * k_max));
}

namespace {

// contact-identity key spaces: pair | plane | bucket
inline std::uint64_t pair_key(std::size_t i, std::size_t j) {
    return (static_cast<std::uint64_t>(i) << 32) | j;
}
inline std::uint64_t plane_key(int plane, std::size_t i) {
    return (1ull << 63) | (static_cast<std::uint64_t>(plane) << 32) | i;
}
inline std::uint64_t bucket_key(std::size_t i) {
    return (1ull << 62) | i;
}

inline std::int64_t cell_key(int ix, int iy) {
    return (static_cast<std::int64_t>(ix) << 32) |
           static_cast<std::uint32_t>(iy);
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// Largest share of the relative rolling a single contact may cancel per
/// step (a disc in a dense 2D bed touches up to ~8 things at once).
constexpr double kRollingStopFraction = 0.125;

struct Accum {
    std::vector<Vec2> force;
    std::vector<double> torque;
    Vec2 internal_sum;
    double max_force = 0.0;
};

/// Apply one resolved contact to particle i against something moving with
/// contact-point velocity v_other (possibly another particle j >= 0).
struct ContactFrame {
    Vec2 n;       // unit normal, pushes particle i away
    double vn;    // relative normal velocity (negative = approach)
    double vt;    // relative tangential velocity along n.perp()
    double arm_i; // torque arm on particle i
};

ContactFrame relative_motion(const Particle& pi, const Vec2& n, double arm_i,
                             const Vec2& v_other_contact) {
    const Vec2 t = n.perp();
    const Vec2 v_contact_i = pi.vel - t * (pi.omega * arm_i);
    const Vec2 vrel = v_contact_i - v_other_contact;
    return {n, vrel.dot(n), vrel.dot(t), arm_i};
}

/// Closest point on segment [a, b] to p.
Vec2 closest_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 == 0.0) return a;
    const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + ab * s;
}

class Stepper {
public:
    Stepper(SimState& st, double dt, const TerrainParams& prm)
        : st_(st), dt_(dt), prm_(prm) {}

    void run() {
        const std::size_t n = st_.particles.size();
        acc_.force.assign(n, Vec2{0.0, -kGravity} * 0.0);
        acc_.torque.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            acc_.force[i] = Vec2{0.0, -kGravity * st_.particles[i].mass};
        st_.bucket_force = {0.0, 0.0};
        st_.bucket_torque = 0.0;
        acc_.internal_sum = {0.0, 0.0};
        acc_.max_force = 0.0;

        pair_contacts();
        plane_contacts();
        bucket_contacts();

        for (std::size_t i = 0; i < n; ++i) {
            Particle& p = st_.particles[i];
            p.vel += acc_.force[i] * (dt_ / p.mass);
            p.omega += acc_.torque[i] * (dt_ / p.inertia);
            if (p.vel.norm() > st_.max_speed_guard)
                throw UnstableStep("particle " + std::to_string(i) +
                                   " exceeded " +
                                   std::to_string(st_.max_speed_guard) +
                                   " m/s; reduce dt");
            p.pos += p.vel * dt_;
        }
        st_.time += dt_;
        st_.diag_internal_force_sum = acc_.internal_sum.norm();
        st_.diag_max_force = acc_.max_force;
    }

private:
    void pair_contacts() {
        const auto& ps = st_.particles;
        const double cell = prm_.d;
        grid_.clear();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const int ix = static_cast<int>(std::floor(ps[i].pos.x / cell));
            const int iy = static_cast<int>(std::floor(ps[i].pos.y / cell));
            grid_[cell_key(ix, iy)].push_back(i);
        }
        // jittered radii allow contact distance up to 1.1 d, so the search
        // covers two cells each way
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const int ix = static_cast<int>(std::floor(ps[i].pos.x / cell));
            const int iy = static_cast<int>(std::floor(ps[i].pos.y / cell));
            for (int dx = -2; dx <= 2; ++dx)
                for (int dy = -2; dy <= 2; ++dy) {
                    const auto it = grid_.find(cell_key(ix + dx, iy + dy));
                    if (it == grid_.end()) continue;
                    for (std::size_t j : it->second)
                        if (j > i) pair_contact(i, j);
                }
        }
    }

    void pair_contact(std::size_t i, std::size_t j) {
        Particle& pi = st_.particles[i];
        Particle& pj = st_.particles[j];
        const Vec2 dvec = pi.pos - pj.pos;
        const double dist = dvec.norm();
        const double overlap = pi.radius + pj.radius - dist;
        const std::uint64_t key = pair_key(i, j);
        if (overlap <= 0.0 || dist == 0.0) {
            st_.springs.erase(key);
            return;
        }
        const Vec2 n = dvec / dist;
        const double arm_i = pi.radius - 0.5 * overlap;
        const double arm_j = pj.radius - 0.5 * overlap;
        const Vec2 v_other =
            pj.vel + n.perp() * (pj.omega * arm_j);  // contact point of j
        const ContactFrame f = relative_motion(pi, n, arm_i, v_other);

        const double r_star =
            pi.radius * pj.radius / (pi.radius + pj.radius);
        const double m_star = pi.mass * pj.mass / (pi.mass + pj.mass);
        const ContactForce cf = hertz_mindlin_contact(
            overlap, f.vn, f.vt, r_star, m_star, prm_, spring(key), dt_);
        st_.springs[key] = cf.new_spring;

        const Vec2 force = n * cf.normal + n.perp() * cf.tangential;
        acc_.force[i] += force;
        acc_.force[j] -= force;
        acc_.internal_sum += force;
        acc_.internal_sum -= force;
        acc_.max_force = std::max(acc_.max_force, force.norm());
        acc_.torque[i] += -arm_i * cf.tangential;
        acc_.torque[j] += -arm_j * cf.tangential;
        // resistance may remove only a fraction of the relative rolling per
        // step: several contacts act on each disc at once, and their summed
        // one-step corrections would otherwise overshoot into a sign-flip
        // limit cycle
        const double w = pi.omega - pj.omega;
        const double stop_cap = kRollingStopFraction * std::fabs(w) /
                                (dt_ * (1.0 / pi.inertia + 1.0 / pj.inertia));
        const double tr = std::min(cf.rolling_torque, stop_cap) * sgn(w);
        acc_.torque[i] -= tr;
        acc_.torque[j] += tr;
    }

    void plane_contacts() {
        for (std::size_t i = 0; i < st_.particles.size(); ++i) {
            Particle& p = st_.particles[i];
            // floor, left wall, right wall
            const Vec2 normals[3] = {{0.0, 1.0}, {1.0, 0.0}, {-1.0, 0.0}};
            const double gaps[3] = {p.pos.y - st_.ground_y, p.pos.x,
                                    st_.bed_width - p.pos.x};
            for (int k = 0; k < 3; ++k) {
                const double overlap = p.radius - gaps[k];
                const std::uint64_t key = plane_key(k, i);
                if (overlap <= 0.0) {
                    st_.springs.erase(key);
                    continue;
                }
                const double arm = p.radius - 0.5 * overlap;
                const ContactFrame f =
                    relative_motion(p, normals[k], arm, Vec2{0.0, 0.0});
                const ContactForce cf = hertz_mindlin_contact(
                    overlap, f.vn, f.vt, p.radius, p.mass, prm_, spring(key),
                    dt_);
                st_.springs[key] = cf.new_spring;
                const Vec2 force =
                    normals[k] * cf.normal + normals[k].perp() * cf.tangential;
                acc_.force[i] += force;
                acc_.max_force = std::max(acc_.max_force, force.norm());
                acc_.torque[i] += -arm * cf.tangential;
                const double stop_cap =
                    kRollingStopFraction * std::fabs(p.omega) * p.inertia / dt_;
                acc_.torque[i] -=
                    std::min(cf.rolling_torque, stop_cap) * sgn(p.omega);
            }
        }
    }

    void bucket_contacts() {
        const auto& prof = st_.bucket.points;
        if (prof.size() < 2) return;
        const BucketState& b = st_.bucket_state;
        // world-frame polyline
        world_.clear();
        for (const Vec2& p : prof) world_.push_back(b.position + p.rotated(b.angle));

        for (std::size_t i = 0; i < st_.particles.size(); ++i) {
            Particle& p = st_.particles[i];
            // single contact against the closest polyline point
            double best = 1e300;
            Vec2 best_c;
            for (std::size_t k = 0; k + 1 < world_.size(); ++k) {
                const Vec2 c = closest_on_segment(world_[k], world_[k + 1], p.pos);
                const double d2 = (p.pos - c).norm2();
                if (d2 < best) { best = d2; best_c = c; }
            }
            const double dist = std::sqrt(best);
            const double overlap = p.radius - dist;
            const std::uint64_t key = bucket_key(i);
            if (overlap <= 0.0 || dist == 0.0) {
                st_.springs.erase(key);
                continue;
            }
            const Vec2 n = (p.pos - best_c) / dist;
            const double arm = p.radius - 0.5 * overlap;
            const Vec2 v_bucket =
                b.velocity + (best_c - b.position).perp() * b.omega;
            const ContactFrame f = relative_motion(p, n, arm, v_bucket);
            const ContactForce cf = hertz_mindlin_contact(
                overlap, f.vn, f.vt, p.radius, p.mass, prm_, spring(key), dt_);
            st_.springs[key] = cf.new_spring;
            const Vec2 force = n * cf.normal + n.perp() * cf.tangential;
            acc_.force[i] += force;
            acc_.max_force = std::max(acc_.max_force, force.norm());
            acc_.torque[i] += -arm * cf.tangential;
            const double stop_cap =
                kRollingStopFraction * std::fabs(p.omega) * p.inertia / dt_;
            acc_.torque[i] -=
                std::min(cf.rolling_torque, stop_cap) * sgn(p.omega);
            // equal and opposite on the bucket
            st_.bucket_force -= force;
            st_.bucket_torque -= (best_c - b.position).cross(force);
        }
    }

    double spring(std::uint64_t key) const {
        const auto it = st_.springs.find(key);
        return it == st_.springs.end() ? 0.0 : it->second;
    }

    SimState& st_;
    double dt_;
    const TerrainParams& prm_;
    Accum acc_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;
    std::vector<Vec2> world_;
};

void step_inplace(SimState& state, double dt, const TerrainParams& params) {
    Stepper(state, dt, params).run();
}

/// 64-bit splitmix generator: stable across platforms.
struct SplitMix {
    std::uint64_t s;
    explicit SplitMix(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

} // namespace

BucketProfile default_bucket_profile() {
    return {{{0.0, 0.0}, {0.55, 0.06}, {0.62, 0.42}}};
}

SimState fill_bed(double width, double height, const TerrainParams& params,
                  std::uint64_t seed) {
    params.validate();
    if (width < params.d || height < params.d)
        throw ExtentTooSmall("bed extent " + std::to_string(width) + " x " +
                             std::to_string(height) +
                             " smaller than one particle");
    SimState st;
    st.bed_width = width;
    st.ground_y = 0.0;
    st.seed = seed;

    SplitMix rng(seed);
    const double d = params.d;
    const double pitch = 1.02 * d;
    const double row_h = pitch * std::sqrt(3.0) / 2.0;
    for (int row = 0;; ++row) {
        const double yc = 0.51 * d + row * row_h;
        if (yc > height - 0.5 * d) break;
        const double x0 = 0.51 * d + ((row % 2) ? 0.5 * pitch : 0.0);
        for (int col = 0;; ++col) {
            const double xc = x0 + col * pitch;
            if (xc > width - 0.51 * d) break;
            Particle p;
            p.radius = 0.5 * d * (0.9 + 0.2 * rng.uniform());
            const double jx = (rng.uniform() - 0.5) * 0.1 * pitch;
            const double jy = (rng.uniform() - 0.5) * 0.1 * pitch;
            p.pos = {std::clamp(xc + jx, p.radius, width - p.radius),
                     std::max(yc + jy, p.radius)};
            p.mass = params.rho * M_PI * p.radius * p.radius;
            p.inertia = 0.5 * p.mass * p.radius * p.radius;
            st.particles.push_back(p);
        }
    }

    // settle with the bucket parked far away; the extra velocity bleed makes
    // deposition quasi-static (constant-torque rolling friction never lets a
    // free bed ring down on its own)
    const double dt = stable_dt(params);
    for (int k = 0; k < 40000; ++k) {
        step_inplace(st, dt, params);
        double vmax = 0.0;
        for (Particle& p : st.particles) {
            p.vel = p.vel * 0.95;
            p.omega *= 0.95;
            vmax = std::max(vmax, p.vel.norm());
        }
        if (vmax < 1e-4) break;
    }
    st.time = 0.0;
    st.bucket_force = {0.0, 0.0};
    st.bucket_torque = 0.0;
    return st;
}

SimState step(SimState state, double dt, const TerrainParams& params) {
    step_inplace(state, dt, params);
    return state;
}

ForceTrace run_dig_cycle(const std::vector<TimedPose>& trajectory,
                         const TerrainParams& params, std::uint64_t seed,
                         const DigScenario& scenario) {
    if (trajectory.size() < 2)
        throw ValidationError("trajectory needs at least 2 poses");
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i)
        if (!(trajectory[i].t < trajectory[i + 1].t))
            throw ValidationError("trajectory times must be strictly increasing");

    SimState st = fill_bed(scenario.bed_width, scenario.bed_height, params, seed);
    st.bucket = scenario.profile.points.empty() ? default_bucket_profile()
                                                : scenario.profile;

    const double dt = scenario.dt > 0.0 ? scenario.dt : stable_dt(params);
    ForceTrace trace;
    trace.label = "sim";

    std::size_t seg = 0;    // active trajectory segment
    std::size_t sample = 0; // next timestamp to record
    double t = trajectory.front().t;
    st.time = t;
    const double t_end = trajectory.back().t;

    auto set_bucket = [&](double now) {
        while (seg + 1 < trajectory.size() - 1 && now >= trajectory[seg + 1].t)
            ++seg;
        const TimedPose& a = trajectory[seg];
        const TimedPose& b = trajectory[seg + 1];
        const double span = b.t - a.t;
        const double s = std::clamp((now - a.t) / span, 0.0, 1.0);
        st.bucket_state.position = a.position + (b.position - a.position) * s;
        st.bucket_state.angle = a.angle + (b.angle - a.angle) * s;
        st.bucket_state.velocity = (b.position - a.position) / span;
        st.bucket_state.omega = (b.angle - a.angle) / span;
    };

    auto record_due = [&](double now) {
        while (sample < trajectory.size() &&
               trajectory[sample].t <= now + 1e-12) {
            trace.samples.push_back(
                {trajectory[sample].t,
                 st.bucket_force.norm() * scenario.bucket_width});
            ++sample;
        }
    };

    record_due(t);
    while (t < t_end - 1e-12) {
        set_bucket(t);
        step_inplace(st, dt, params);
        t = st.time;
        record_due(t);
    }
    // flush any timestamps the last step jumped over
    record_due(t_end + 1.0);
    return trace;
}

} // namespace loadertwin

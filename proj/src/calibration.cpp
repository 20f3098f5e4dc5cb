#include "loadertwin/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <string>

#include "loadertwin/errors.hpp"

namespace loadertwin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Overlap {
    double t0, t1;
};

Overlap overlap_of(double a0, double a1, double b0, double b1) {
    const double t0 = std::max(a0, b0);
    const double t1 = std::min(a1, b1);
    if (!(t0 < t1)) throw NoOverlap("traces share no time interval");
    return {t0, t1};
}

/// Piecewise-linear interpolation of a sampled channel at time t.
template <class S, class Getter>
double interp(const std::vector<S>& samples, double t, Getter get) {
    if (t <= samples.front().t) return get(samples.front());
    if (t >= samples.back().t) return get(samples.back());
    // first sample with time > t
    const auto it = std::upper_bound(
        samples.begin(), samples.end(), t,
        [](double v, const S& s) { return v < s.t; });
    const S& hi = *it;
    const S& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return get(lo) + w * (get(hi) - get(lo));
}

} // namespace

double peak_error(const ForceTrace& sim, const ForceTrace& meas) {
    sim.validate();
    meas.validate();
    const double ms = sim.max_force();
    const double mm = meas.max_force();
    if (mm == 0.0) throw ZeroReference("measured trace peak is zero");
    return 100.0 * std::fabs(ms - mm) / mm;
}

double avg_error(const ForceTrace& sim, const ForceTrace& meas,
                 int grid_points) {
    sim.validate();
    meas.validate();
    const Overlap ov =
        overlap_of(sim.samples.front().t, sim.samples.back().t,
                   meas.samples.front().t, meas.samples.back().t);
    const auto force = [](const ForceTrace::Sample& s) { return s.f; };
    double abs_sum = 0.0;
    double meas_sum = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double t =
            ov.t0 + (ov.t1 - ov.t0) * k / static_cast<double>(grid_points - 1);
        const double fs = interp(sim.samples, t, force);
        const double fm = interp(meas.samples, t, force);
        abs_sum += std::fabs(fs - fm);
        meas_sum += fm;
    }
    if (meas_sum == 0.0) throw ZeroReference("measured trace mean is zero");
    return 100.0 * abs_sum / meas_sum;
}

TrajectoryMatch trajectory_match(const PoseTrace& sim, const PoseTrace& meas,
                                 int grid_points) {
    sim.validate();
    meas.validate();
    const Overlap ov =
        overlap_of(sim.samples.front().t, sim.samples.back().t,
                   meas.samples.front().t, meas.samples.back().t);
    double h2 = 0.0;
    double a2 = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double t =
            ov.t0 + (ov.t1 - ov.t0) * k / static_cast<double>(grid_points - 1);
        const auto height = [](const PoseTrace::Sample& s) { return s.y_p8; };
        const auto angle = [](const PoseTrace::Sample& s) { return s.theta4; };
        const double dh = interp(sim.samples, t, height) -
                          interp(meas.samples, t, height);
        const double da =
            interp(sim.samples, t, angle) - interp(meas.samples, t, angle);
        h2 += dh * dh;
        a2 += da * da;
    }
    return {std::sqrt(h2 / grid_points), std::sqrt(a2 / grid_points)};
}

void CalibrationProblem::validate() const {
    initial.validate();
    lower.validate();
    upper.validate();
    const auto check = [](double lo, double v, double hi, const char* name) {
        if (!(lo <= hi))
            throw ValidationError(std::string(name) + ": lower bound above upper");
        if (!(lo <= v && v <= hi))
            throw ValidationError(std::string(name) +
                                  ": initial value outside bounds");
    };
    check(lower.young_modulus, initial.young_modulus, upper.young_modulus, "E");
    check(lower.mu_t, initial.mu_t, upper.mu_t, "mu_t");
    check(lower.e, initial.e, upper.e, "e");
    check(lower.d, initial.d, upper.d, "d");
    check(lower.mu_r, initial.mu_r, upper.mu_r, "mu_r");
    if (!(w_peak >= 0.0 && w_avg >= 0.0 && w_peak + w_avg > 0.0))
        throw ValidationError("weights must be non-negative, not both zero");
    if (budget < 1) throw ValidationError("budget must be at least 1");
    measured.validate();
}

namespace {

struct Scored {
    double objective = kInf;
    double peak = kInf;
    double avg = kInf;
};

Scored score(const TerrainParams& params, const CalibrationProblem& problem) {
    Scored s;
    try {
        const ForceTrace sim = run_dig_cycle(problem.trajectory, params,
                                             problem.seed, problem.scenario);
        s.peak = peak_error(sim, problem.measured);
        s.avg = avg_error(sim, problem.measured);
        s.objective = problem.w_peak * s.peak + problem.w_avg * s.avg;
    } catch (const DomainFailure&) {
        // unstable or degenerate simulation: rejected via infinite objective
    }
    return s;
}

/// Search-space axes: log10(E), mu_t, e, d, mu_r. Collapsed bounds freeze an
/// axis at its bound value. Free axes are normalized to [0, 1].
struct SearchSpace {
    struct Axis {
        double lo, hi;
        bool frozen;
    };
    Axis axes[5];
    std::vector<int> free_idx;

    explicit SearchSpace(const CalibrationProblem& p) {
        const double lo[5] = {std::log10(p.lower.young_modulus), p.lower.mu_t,
                              p.lower.e, p.lower.d, p.lower.mu_r};
        const double hi[5] = {std::log10(p.upper.young_modulus), p.upper.mu_t,
                              p.upper.e, p.upper.d, p.upper.mu_r};
        for (int k = 0; k < 5; ++k) {
            axes[k] = {lo[k], hi[k], hi[k] - lo[k] < 1e-12};
            if (!axes[k].frozen) free_idx.push_back(k);
        }
    }

    int dim() const { return static_cast<int>(free_idx.size()); }

    std::vector<double> normalize(const TerrainParams& t) const {
        const double raw[5] = {std::log10(t.young_modulus), t.mu_t, t.e, t.d,
                               t.mu_r};
        std::vector<double> z(free_idx.size());
        for (std::size_t i = 0; i < free_idx.size(); ++i) {
            const Axis& a = axes[free_idx[i]];
            z[i] = (raw[free_idx[i]] - a.lo) / (a.hi - a.lo);
        }
        return z;
    }

    TerrainParams params_of(const std::vector<double>& z,
                            const TerrainParams& tmpl) const {
        double raw[5];
        for (int k = 0; k < 5; ++k) raw[k] = axes[k].lo; // frozen value
        for (std::size_t i = 0; i < free_idx.size(); ++i) {
            const Axis& a = axes[free_idx[i]];
            raw[free_idx[i]] = a.lo + std::clamp(z[i], 0.0, 1.0) * (a.hi - a.lo);
        }
        TerrainParams t = tmpl; // keeps rho, nu
        t.young_modulus = std::pow(10.0, raw[0]);
        t.mu_t = raw[1];
        t.e = raw[2];
        t.d = raw[3];
        t.mu_r = raw[4];
        return t;
    }
};

} // namespace

double evaluate(const TerrainParams& params, const CalibrationProblem& problem) {
    return score(params, problem).objective;
}

CalibrationResult calibrate(const CalibrationProblem& problem) {
    problem.validate();
    const SearchSpace space(problem);
    const int n = space.dim();
    if (problem.budget < n + 1)
        throw BudgetTooSmall("budget " + std::to_string(problem.budget) +
                             " below simplex size " + std::to_string(n + 1));

    CalibrationResult result;
    int used = 0;
    Scored best;
    TerrainParams best_params = problem.initial;

    const auto record = [&](const TerrainParams& params, const Scored& s) {
        result.history.push_back({params, s.objective});
        ++used;
        if (s.objective < best.objective) {
            best = s;
            best_params = params;
        }
    };

    struct Vertex {
        std::vector<double> z;
        double f;
    };

    const auto eval_z = [&](const std::vector<double>& z) {
        std::vector<double> c(z);
        for (double& v : c) v = std::clamp(v, 0.0, 1.0);
        const TerrainParams params = space.params_of(c, problem.initial);
        const Scored s = score(params, problem);
        record(params, s);
        return Vertex{c, s.objective};
    };

    // batch evaluation of independent points; records in input order so the
    // serial and parallel paths produce identical histories
    const auto eval_batch = [&](std::vector<std::vector<double>> zs) {
        std::vector<Vertex> out;
        if (problem.jobs > 1 && zs.size() > 1) {
            std::vector<Scored> scored(zs.size());
            std::vector<TerrainParams> prm(zs.size());
            for (std::size_t i = 0; i < zs.size(); ++i) {
                for (double& v : zs[i]) v = std::clamp(v, 0.0, 1.0);
                prm[i] = space.params_of(zs[i], problem.initial);
            }
            std::size_t next = 0;
            while (next < zs.size()) {
                const std::size_t batch =
                    std::min<std::size_t>(problem.jobs, zs.size() - next);
                std::vector<std::future<Scored>> fut;
                for (std::size_t b = 0; b < batch; ++b)
                    fut.push_back(std::async(std::launch::async, score,
                                             prm[next + b], std::cref(problem)));
                for (std::size_t b = 0; b < batch; ++b)
                    scored[next + b] = fut[b].get();
                next += batch;
            }
            for (std::size_t i = 0; i < zs.size(); ++i) {
                record(prm[i], scored[i]);
                out.push_back({zs[i], scored[i].objective});
            }
        } else {
            for (const auto& z : zs) out.push_back(eval_z(z));
        }
        return out;
    };

    // candidate start points: the supplied initial guess, plus a coarse
    // two-level sweep of the box corners when the budget comfortably covers
    // it; the sweep keeps the descent from committing to a poor basin
    std::vector<std::vector<double>> cand_z;
    cand_z.push_back(space.normalize(problem.initial));
    const int corners = (n >= 1 && n <= 4) ? (1 << n) : 0;
    if (corners > 0 && problem.budget >= corners + 3 * (n + 1)) {
        for (int c = 0; c < corners; ++c) {
            std::vector<double> z(n);
            for (int i = 0; i < n; ++i) z[i] = (c >> i & 1) ? 0.7 : 0.3;
            cand_z.push_back(z);
        }
    }

    std::vector<Vertex> simplex;
    if (n > 0) {
        const std::vector<Vertex> cand = eval_batch(std::move(cand_z));
        const Vertex& centre = *std::min_element(
            cand.begin(), cand.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });

        // initial simplex: best candidate plus one offset vertex per free
        // axis, each stepping away from the nearer bound
        std::vector<std::vector<double>> offsets;
        for (int i = 0; i < n; ++i) {
            std::vector<double> z = centre.z;
            z[i] += (z[i] <= 0.5) ? 0.25 : -0.25;
            offsets.push_back(z);
        }
        simplex.push_back(centre);
        for (Vertex& v : eval_batch(std::move(offsets)))
            simplex.push_back(std::move(v));
    } else {
        simplex = eval_batch(std::move(cand_z));
    }

    if (n == 0) {
        // nothing to search: the initial point is the answer
        if (!std::isfinite(best.objective))
            throw CalibrationFailed("simulation failed at the fixed point");
        result.fitted = best_params;
        result.objective = best.objective;
        result.peak_error_pct = best.peak;
        result.avg_error_pct = best.avg;
        result.evaluations = used;
        return result;
    }

    const auto by_value = [](const Vertex& a, const Vertex& b) {
        return a.f < b.f;
    };
    const auto diameter = [&]() {
        double dmax = 0.0;
        for (std::size_t a = 0; a < simplex.size(); ++a)
            for (std::size_t b = a + 1; b < simplex.size(); ++b)
                for (int k = 0; k < n; ++k)
                    dmax = std::max(dmax,
                                    std::fabs(simplex[a].z[k] - simplex[b].z[k]));
        return dmax;
    };

    while (used < problem.budget) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        if (diameter() < 1e-3) break;

        std::vector<double> centroid(n, 0.0);
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < n; ++k) centroid[k] += simplex[v].z[k] / n;
        const Vertex& worst = simplex.back();

        const auto along = [&](double coef) {
            std::vector<double> z(n);
            for (int k = 0; k < n; ++k)
                z[k] = centroid[k] + coef * (centroid[k] - worst.z[k]);
            return z;
        };

        const Vertex refl = eval_z(along(1.0));
        if (refl.f < simplex.front().f) {
            if (used < problem.budget) {
                const Vertex exp = eval_z(along(2.0));
                simplex.back() = (exp.f < refl.f) ? exp : refl;
            } else {
                simplex.back() = refl;
            }
        } else if (refl.f < simplex[n - 1].f) {
            simplex.back() = refl;
        } else if (used < problem.budget) {
            const bool outside = refl.f < worst.f;
            const Vertex contr = eval_z(along(outside ? 0.5 : -0.5));
            if (contr.f < std::min(refl.f, worst.f)) {
                simplex.back() = contr;
            } else {
                // shrink toward the best vertex
                for (std::size_t v = 1;
                     v < simplex.size() && used < problem.budget; ++v) {
                    std::vector<double> z(n);
                    for (int k = 0; k < n; ++k)
                        z[k] = 0.5 * (simplex[0].z[k] + simplex[v].z[k]);
                    simplex[v] = eval_z(z);
                }
            }
        } else {
            break;
        }
    }

    if (!std::isfinite(best.objective))
        throw CalibrationFailed("every evaluation failed");
    result.fitted = best_params;
    result.objective = best.objective;
    result.peak_error_pct = best.peak;
    result.avg_error_pct = best.avg;
    result.evaluations = used;
    return result;
}

} // namespace loadertwin

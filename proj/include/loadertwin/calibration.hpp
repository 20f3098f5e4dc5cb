#pragma once

#include <cstdint>
#include <vector>

#include "loadertwin/terrain.hpp"
#include "loadertwin/trace.hpp"

namespace loadertwin {

/// Terrain-parameter fitting problem: match a measured bucket-force trace by
/// adjusting (E, mu_t, e, d, mu_r) within bounds, replaying a fixed dig
/// trajectory on a fixed bed.
struct CalibrationProblem {
    TerrainParams initial;
    TerrainParams lower; ///< per-field lower bounds (five searched fields)
    TerrainParams upper; ///< per-field upper bounds; lower==upper freezes a field
    std::vector<TimedPose> trajectory;
    DigScenario scenario;
    std::uint64_t seed = 1;
    ForceTrace measured;
    double w_peak = 0.5;
    double w_avg = 0.5;
    int budget = 100;   ///< max objective evaluations
    int jobs = 1;       ///< parallel evaluations for independent candidates

    void validate() const;
};

struct CalibrationHistoryEntry {
    TerrainParams params;
    double objective;
};

struct CalibrationResult {
    TerrainParams fitted;
    double peak_error_pct = 0.0;
    double avg_error_pct = 0.0;
    double objective = 0.0;
    std::vector<CalibrationHistoryEntry> history; ///< every evaluation, in order
    int evaluations = 0;
};

/// Percent error between trace maxima: 100*|max(sim)-max(meas)|/max(meas).
/// Throws ZeroReference when max(meas) is zero.
double peak_error(const ForceTrace& sim, const ForceTrace& meas);

/// Mean absolute error over a common uniform resampling of the time overlap,
/// normalized by the mean measured force, in percent.
/// Throws NoOverlap / ZeroReference.
double avg_error(const ForceTrace& sim, const ForceTrace& meas,
                 int grid_points = 200);

struct TrajectoryMatch {
    double height_rmse; ///< mm
    double angle_rmse;  ///< rad
};

/// RMSE between two pose traces after resampling onto the time overlap.
TrajectoryMatch trajectory_match(const PoseTrace& sim, const PoseTrace& meas,
                                 int grid_points = 200);

/// Runs one dig simulation at the given parameters and scores it against the
/// measured trace: w_peak*peak_error + w_avg*avg_error. Simulation failures
/// surface as an infinite objective.
double evaluate(const TerrainParams& params, const CalibrationProblem& problem);

/// Bounded derivative-free search (Nelder-Mead over log10(E), mu_t, e, d,
/// mu_r) for the parameters minimizing the weighted force-trace error.
/// Out-of-bounds candidates are projected onto the bounds; collapsed bounds
/// freeze an axis. Stops at the evaluation budget or when the normalized
/// simplex diameter falls below 1e-3.
CalibrationResult calibrate(const CalibrationProblem& problem);

} // namespace loadertwin

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "loadertwin/calibration.hpp"
#include "loadertwin/config.hpp"
#include "loadertwin/trace.hpp"

namespace loadertwin {

/// Version stamp carried by every emitted file.
inline constexpr int kSchemaVersion = 1;

/// Stable hash of every configurable value, for tying reports to configs.
std::string config_fingerprint(const TwinConfig& config);

/// Calibration result as JSON with stable key order: fitted parameters,
/// metrics, full evaluation history, fingerprint. Throws IoError.
void write_report(const CalibrationResult& result, const std::string& path,
                  const TwinConfig* config = nullptr);

/// Reads a report written by write_report back into a CalibrationResult.
CalibrationResult read_report(const std::string& path);

/// Force trace as CSV (t,f), 17 significant digits (value-preserving).
void write_trace_csv(const ForceTrace& trace, const std::string& path);
ForceTrace read_trace_csv(const std::string& path);

/// Pose trace as CSV (t,y_p8,theta4).
void write_pose_csv(const PoseTrace& trace, const std::string& path);
PoseTrace read_pose_csv(const std::string& path);

/// Dig trajectory as CSV (t,x,y,angle) in s/m/m/rad.
void write_trajectory_csv(const std::vector<TimedPose>& trajectory,
                          const std::string& path);
std::vector<TimedPose> read_trajectory_csv(const std::string& path);

/// One CSV row per objective evaluation: eval,E,mu_t,e,d,mu_r,objective.
void write_iterations_csv(const CalibrationResult& result,
                          const std::string& path);

/// Plain-text comparison of initial vs. fitted parameters and error levels.
std::string format_comparison(const TerrainParams& initial,
                              const CalibrationResult& result);

/// gnuplot script plotting the given (csv_path, title) force traces.
void write_gnuplot_script(const std::vector<std::pair<std::string,
                                                      std::string>>& traces,
                          const std::string& path);

} // namespace loadertwin

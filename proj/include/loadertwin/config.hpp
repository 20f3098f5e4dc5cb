#pragma once

#include <cstdint>
#include <string>

#include "loadertwin/geometry.hpp"
#include "loadertwin/statics.hpp"
#include "loadertwin/terrain.hpp"

namespace loadertwin {

/// Complete run configuration: linkage geometry, load-pin layout, cylinder
/// piston areas, bucket and soil-bed setup, terrain parameters and the
/// calibration search box. Every field has a working default; a config file
/// only overrides what it names.
struct TwinConfig {
    LinkageGeometry linkage;

    /// Instrumented hinge pin (mm): total length and the two contact spans
    /// [0, s1] (bucket-base side) and [length - s2, length] (link side).
    double pin_length = 180.0;
    double pin_s1 = 60.0;
    double pin_s2 = 60.0;

    /// Hydraulic piston areas (m^2), pressure * area = rod force.
    double piston_area_lift = 8.0e-3;
    double piston_area_tilt = 1.13e-2;

    /// Digging tool and soil bed.
    BucketProfile bucket_profile = default_bucket_profile();
    double bucket_width = 2.5;  ///< out-of-plane width (m)
    double bed_width = 2.0;     ///< m
    double bed_height = 0.45;   ///< m

    TerrainParams terrain;

    double sim_dt = 0.0;  ///< 0 selects the stability-derived step
    std::uint64_t seed = 1;

    /// Calibration weights, budget and per-parameter search box. Collapsed
    /// bounds (lo == hi) freeze a parameter.
    double w_peak = 0.5;
    double w_avg = 0.5;
    int budget = 100;
    int jobs = 1;
    TerrainParams cal_lower;
    TerrainParams cal_upper;

    TwinConfig();

    /// Re-checks every embedded invariant; throws ValidationError.
    void validate() const;

    /// Bed/bucket block as a simulation scenario.
    DigScenario scenario() const;
};

/// Parses the key/value config format (see README). Missing file raises
/// IoError; syntax problems raise ParseError with the line number; invariant
/// violations raise ValidationError. An empty file yields all defaults.
TwinConfig load_config(const std::string& path);

/// Parses config text directly (same rules as load_config).
TwinConfig parse_config(const std::string& text);

} // namespace loadertwin

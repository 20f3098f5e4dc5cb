#pragma once

#include <string>
#include <vector>

#include "loadertwin/vec2.hpp"

namespace loadertwin {

/// Scalar force-magnitude time series (s, N), strictly increasing time.
struct ForceTrace {
    struct Sample {
        double t = 0.0;
        double f = 0.0;
    };
    std::vector<Sample> samples;
    std::string label;

    /// Throws ValidationError unless >= 2 samples, strictly increasing t,
    /// and all values finite and non-negative.
    void validate() const;
    double max_force() const;
};

/// Blade pose time series: (s, mm, rad), strictly increasing time.
struct PoseTrace {
    struct Sample {
        double t = 0.0;
        double y_p8 = 0.0;    ///< mm
        double theta4 = 0.0;  ///< rad
    };
    std::vector<Sample> samples;
    std::string label;

    void validate() const;
};

/// One keyframe of a prescribed bucket motion (world frame, m / rad).
struct TimedPose {
    double t = 0.0;
    Vec2 position;       ///< blade-tip position (m)
    double angle = 0.0;  ///< bucket orientation (rad)
};

} // namespace loadertwin

#include "loadertwin/trace.hpp"

#include <cmath>
#include <string>

#include "loadertwin/errors.hpp"

namespace loadertwin {

void ForceTrace::validate() const {
    if (samples.size() < 2)
        throw ValidationError("force trace needs at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].f))
            throw ValidationError("force trace sample " + std::to_string(i) +
                                  " is not finite");
        if (samples[i].f < 0.0)
            throw ValidationError("force trace sample " + std::to_string(i) +
                                  " is negative; magnitudes expected");
        if (i > 0 && !(samples[i - 1].t < samples[i].t))
            throw ValidationError("force trace times must be strictly increasing");
    }
}

double ForceTrace::max_force() const {
    double m = 0.0;
    for (const Sample& s : samples) m = std::max(m, s.f);
    return m;
}

void PoseTrace::validate() const {
    if (samples.size() < 2)
        throw ValidationError("pose trace needs at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].y_p8) ||
            !std::isfinite(samples[i].theta4))
            throw ValidationError("pose trace sample " + std::to_string(i) +
                                  " is not finite");
        if (i > 0 && !(samples[i - 1].t < samples[i].t))
            throw ValidationError("pose trace times must be strictly increasing");
    }
}

} // namespace loadertwin

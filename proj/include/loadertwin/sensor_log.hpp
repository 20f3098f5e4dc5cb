#pragma once

#include <string>
#include <utility>
#include <vector>

#include "loadertwin/config.hpp"
#include "loadertwin/trace.hpp"

namespace loadertwin {

/// One CSV column binding: header name plus the unit the column is stored
/// in. Values are converted to SI on ingestion.
struct ColumnSpec {
    std::string column;
    std::string unit;
};

/// Maps the nine log channels onto arbitrary CSV column names/units, so any
/// dataset layout binds without code changes. Defaults match the synthetic
/// log schema this artifact emits.
struct ColumnMapping {
    ColumnSpec time{"t", "s"};
    ColumnSpec lift_pressure{"lift_pressure", "Pa"};
    ColumnSpec tilt_pressure{"tilt_pressure", "Pa"};
    ColumnSpec inclinometer{"inclinometer", "rad"};
    ColumnSpec encoder{"encoder_position", "m"};
    ColumnSpec mp_fx{"f_mp_x", "N"};
    ColumnSpec mp_fy{"f_mp_y", "N"};
    ColumnSpec sp_fx{"f_sp_x", "N"};
    ColumnSpec sp_fy{"f_sp_y", "N"};
};

/// Time series of sensor readings in SI units.
struct SensorLog {
    struct Row {
        double t;              ///< s
        double lift_pressure;  ///< Pa
        double tilt_pressure;  ///< Pa
        double inclinometer;   ///< rad, bucket orientation
        double encoder;        ///< m, blade-tip height
        double f_mp_x, f_mp_y; ///< N, main hinge pin
        double f_sp_x, f_sp_y; ///< N, secondary hinge pin
    };
    std::vector<Row> rows;
};

/// Reads a CSV sensor log, binding columns through the mapping and
/// converting to SI. Throws MissingColumn, NonMonotoneTime, UnitError,
/// ParseError, IoError.
SensorLog read_sensor_log(const std::string& path, const ColumnMapping& mapping);

/// Derives the pose trace (inclinometer + height channel) and the
/// bucket/soil contact-force magnitude trace (pin forces + bucket weight
/// balance) from a log. Throws MissingChannel when the log is empty.
std::pair<PoseTrace, ForceTrace> extract_traces(const SensorLog& log,
                                                const TwinConfig& config);

} // namespace loadertwin

#pragma once

#include <stdexcept>
#include <string>

namespace loadertwin {

/// Base class of every domain error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// I/O and configuration failures (exit code 1 in the CLI).
class IoFailure : public Error {
public:
    using Error::Error;
};

/// Domain failures: unreachable targets, failed calibrations, bad inputs
/// (exit code 2 in the CLI).
class DomainFailure : public Error {
public:
    using Error::Error;
};

// --- trigonometric solvers ---------------------------------------------
class Degenerate : public DomainFailure { public: using DomainFailure::DomainFailure; };
class Unsolvable : public DomainFailure { public: using DomainFailure::DomainFailure; };
class SingularSystem : public DomainFailure { public: using DomainFailure::DomainFailure; };
class Inconsistent : public DomainFailure { public: using DomainFailure::DomainFailure; };

// --- mechanism -----------------------------------------------------------
class WorkspaceError : public DomainFailure { public: using DomainFailure::DomainFailure; };
class StrokeError : public DomainFailure { public: using DomainFailure::DomainFailure; };
class GeometryError : public DomainFailure { public: using DomainFailure::DomainFailure; };
class NoConvergence : public DomainFailure { public: using DomainFailure::DomainFailure; };
class AssemblyError : public DomainFailure { public: using DomainFailure::DomainFailure; };

// --- statics --------------------------------------------------------------
class EmptySpan : public DomainFailure { public: using DomainFailure::DomainFailure; };
class NonPositiveArea : public DomainFailure { public: using DomainFailure::DomainFailure; };

// --- terrain ----------------------------------------------------------------
class ExtentTooSmall : public DomainFailure { public: using DomainFailure::DomainFailure; };
class UnstableStep : public DomainFailure { public: using DomainFailure::DomainFailure; };

// --- calibration -------------------------------------------------------------
class ZeroReference : public DomainFailure { public: using DomainFailure::DomainFailure; };
class NoOverlap : public DomainFailure { public: using DomainFailure::DomainFailure; };
class BudgetTooSmall : public DomainFailure { public: using DomainFailure::DomainFailure; };
class CalibrationFailed : public DomainFailure { public: using DomainFailure::DomainFailure; };

// --- io -------------------------------------------------------------------
class ParseError : public IoFailure { public: using IoFailure::IoFailure; };
class ValidationError : public IoFailure { public: using IoFailure::IoFailure; };
class MissingColumn : public IoFailure { public: using IoFailure::IoFailure; };
class NonMonotoneTime : public IoFailure { public: using IoFailure::IoFailure; };
class UnitError : public IoFailure { public: using IoFailure::IoFailure; };
class MissingChannel : public IoFailure { public: using IoFailure::IoFailure; };
class IoError : public IoFailure { public: using IoFailure::IoFailure; };

} // namespace loadertwin

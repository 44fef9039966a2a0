#pragma once

#include <stdexcept>
#include <string>

namespace matest {

// Precondition violations (bad arguments, dimension mismatches).
struct InvalidArgument : std::invalid_argument {
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

struct DimMismatch : InvalidArgument {
    explicit DimMismatch(const std::string& what) : InvalidArgument(what) {}
};

struct InvalidMetric : InvalidArgument {
    explicit InvalidMetric(const std::string& what) : InvalidArgument(what) {}
};

// Numeric failures detected at runtime.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct NonFinite : NumericError {
    explicit NonFinite(const std::string& what) : NumericError(what) {}
};

struct NoConvergence : NumericError {
    explicit NoConvergence(const std::string& what) : NumericError(what) {}
};

struct NotPositiveDefinite : NumericError {
    explicit NotPositiveDefinite(const std::string& what) : NumericError(what) {}
};

struct InfeasibleDual : NumericError {
    explicit InfeasibleDual(const std::string& what) : NumericError(what) {}
};

struct DualConstructionFailed : NumericError {
    explicit DualConstructionFailed(const std::string& what) : NumericError(what) {}
};

struct LineSearchStalled : NumericError {
    explicit LineSearchStalled(const std::string& what) : NumericError(what) {}
};

struct NonFiniteLoss : NumericError {
    explicit NonFiniteLoss(const std::string& what) : NumericError(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace matest

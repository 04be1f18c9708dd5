#pragma once

#include <stdexcept>
#include <string>

namespace och {

/// Invalid sizes, counts, or mutually inconsistent arguments. CLI exit code 2.
struct ArgumentError : std::runtime_error {
  explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input files (fvecs/csv/model/codes). CLI exit code 3.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric degeneracies: zero vectors, zero bandwidth, underflow, rank loss.
/// CLI exit code 4.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A retraction step collapsed the row rank of V + delta. Callers may halve
/// the step and retry.
struct DegenerateStepError : NumericError {
  explicit DegenerateStepError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace och

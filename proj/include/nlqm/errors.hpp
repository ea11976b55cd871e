#pragma once

#include <stdexcept>

namespace nlqm {

struct EmptySampleError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PlaneMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynchronizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BlindingViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompleteRunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlqm

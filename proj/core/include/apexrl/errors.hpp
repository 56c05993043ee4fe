#pragma once

#include <stdexcept>
#include <string>

namespace apexrl {

// Malformed input file (CSV/JSON); message carries the line or field path.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Geometry that cannot form a usable track (too few points, degenerate spacing, ...).
struct InvalidTrackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Empty corridor at some waypoint; carries the offending index.
struct InfeasibleCorridorError : std::runtime_error {
  InfeasibleCorridorError(const std::string& msg, std::size_t index)
      : std::runtime_error(msg), index(index) {}
  std::size_t index;
};

// State outside the validity domain of a formula (e.g. u below the dynamics floor).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: shape mismatch, stale tape, stepping a finished episode, ...
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite state out of the integrator; carries the offending state as text.
struct IntegrationBlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training aborted: non-finite events exceeded the configured budget.
struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace apexrl

#pragma once

#include <stdexcept>

namespace crowdnav {

// Scenario generation ran out of rejection-sampling attempts (over-packed arena).
struct PlacementFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Engine::step called after the episode already terminated.
struct EpisodeFinished : std::logic_error {
  using std::logic_error::logic_error;
};

// Vector or tensor sizes disagree with the configured dimensions.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A PPO update produced a non-finite loss or gradient; the update is aborted.
struct NonFiniteLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad config file, unknown key, or unparsable value. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trace file is malformed, has an unsupported version, or contradicts its own header.
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Aggregation requested over an empty record set.
struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace crowdnav

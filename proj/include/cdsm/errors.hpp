#pragma once

#include <stdexcept>
#include <string>

namespace cdsm {

/// Input stream has fewer elements than the operation requires.
struct StreamTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The eigensolver failed to reach its residual bound within the sweep cap.
struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A size precondition was violated (k larger than the problem, etc.).
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A hierarchy level cannot be built because the stream carries too few
/// distinct transitions for the requested cluster count or embedding.
struct TooFewSymbols : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A raw symbol (or an irreparable transition) was not in the training
/// alphabet of the model being decoded.
struct UnknownObservation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The top level of a model has a unit that never activates on the
/// evaluation streams, so no accuracy can be attributed to it.
struct DegenerateTopLevel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Object placement was rejected 10,000 times in a row for one object.
struct PlacementFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value or flag combination.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (stream file, model file, config file).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cdsm

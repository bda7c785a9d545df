#pragma once

#include <stdexcept>

namespace viseq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// game
struct InvalidProportion : Error { using Error::Error; };
struct NoInteriorEquilibrium : Error { using Error::Error; };
struct NotConcave : Error { using Error::Error; };

// signals
struct NoFrames : Error { using Error::Error; };

// behavior
struct SignalRequired : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };
struct InvalidMixture : Error { using Error::Error; };

// solvers
struct MaxIterExceeded : Error { using Error::Error; };
struct DegenerateSlope : Error { using Error::Error; };
struct OutsideUnitInterval : Error { using Error::Error; };

// stats
struct KOutOfRange : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct Separation : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };

// pipeline
struct MissingSignal : Error { using Error::Error; };
struct CellTooSmall : Error { using Error::Error; };
struct MissingPublicTrials : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

// cli / io
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace viseq

#pragma once

#include <stdexcept>
#include <string>

namespace gravjet {

// Named error types so callers and tests can react to specific failure modes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// flux algebra
struct FluxTooSmall : Error { using Error::Error; };
struct GeometryOrderViolation : Error { using Error::Error; };
struct NonPositive : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ParameterBelowMinimum : Error { using Error::Error; };

// geometry / grid
struct NormalizationError : Error { using Error::Error; };
struct CrossingWalls : Error { using Error::Error; };
struct TruncationTooSmall : Error { using Error::Error; };
struct ResolutionTooCoarse : Error { using Error::Error; };

// free boundaries / fields
struct NonGraph : Error { using Error::Error; };
struct EmptyBoundary : Error { using Error::Error; };
struct WindowEmpty : Error { using Error::Error; };

// fitter
struct NoBracket : Error { using Error::Error; };

// config / io
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

} // namespace gravjet

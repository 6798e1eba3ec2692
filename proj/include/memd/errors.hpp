#pragma once

#include <stdexcept>
#include <string>

namespace memd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct TooFewKnots : Error { using Error::Error; };
struct TooFewExtrema : Error { using Error::Error; };
struct NonMonotonicKnots : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct RaggedRows : Error { using Error::Error; };
struct NyquistViolation : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct StreamFlushed : Error { using Error::Error; };

}  // namespace memd

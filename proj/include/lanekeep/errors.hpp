#pragma once

#include <stdexcept>
#include <string>

namespace lanekeep {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// imagecore
struct SingularHomography : Error { using Error::Error; };
struct DegenerateQuad : Error { using Error::Error; };
struct MalformedHeader : Error { using Error::Error; };
struct TruncatedData : Error { using Error::Error; };

// perception
struct EvenKernel : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct NoLanesVisible : Error { using Error::Error; };

// control
struct NoHeadingSource : Error { using Error::Error; };

// simulator
struct OutOfRoad : Error { using Error::Error; };
struct OffRoad : Error { using Error::Error; };

// parking
struct DegenerateSamples : Error { using Error::Error; };
struct HeightBelowAsymptote : Error { using Error::Error; };
struct SpaceTooSmall : Error { using Error::Error; };
struct NoExitFound : Error { using Error::Error; };

// configuration / file formats
struct ConfigError : Error { using Error::Error; };

} // namespace lanekeep

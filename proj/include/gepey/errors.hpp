#pragma once

#include <stdexcept>
#include <string>

namespace gepey {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct TooFewViews : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct SingularProjection : Error { using Error::Error; };
struct ZeroOracle : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct RankZero : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };
struct ZeroColumn : Error { using Error::Error; };
struct InvalidLambdas : Error { using Error::Error; };
struct InvalidRho : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace gepey

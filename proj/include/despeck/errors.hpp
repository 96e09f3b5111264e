#pragma once

#include <stdexcept>
#include <string>

namespace despeck {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositivePixel : Error {
    using Error::Error;
};
struct AllZeroImage : Error {
    using Error::Error;
};
struct ImageTooSmall : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct UncoveredPixel : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct ProxDivergence : Error {
    using Error::Error;
};
struct ZeroWeight : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

} // namespace despeck

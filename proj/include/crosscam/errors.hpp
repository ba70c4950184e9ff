#pragma once

#include <stdexcept>
#include <string>

namespace crosscam {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};

// geometry
struct DegenerateGeometry : Error {
    using Error::Error;
};
struct DegenerateBand : Error {
    using Error::Error;
};
struct PointAtCameraCenter : Error {
    using Error::Error;
};

// labels
struct InvalidThreshold : Error {
    using Error::Error;
};

// association
struct ZeroVector : Error {
    using Error::Error;
};

// trainer
struct DimMismatch : Error {
    using Error::Error;
};
struct LabelOutOfRange : Error {
    using Error::Error;
};
struct PhaseBatchMismatch : Error {
    using Error::Error;
};
struct Diverged : Error {
    using Error::Error;
};

// eval / reporting
struct MissingGT : Error {
    using Error::Error;
};
struct MissingArtifacts : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace crosscam

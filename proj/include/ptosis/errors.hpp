#pragma once

#include <stdexcept>
#include <string>

namespace ptosis {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation (bad parameters, degenerate input).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A requested image region is empty or outside the raster.
class RegionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Malformed input file (landmark JSON, CSV, model file, PGM header).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A measurement stage failed; carries the name of the failed stage.
class MeasurementError : public Error {
public:
    MeasurementError(std::string stage, const std::string& message)
        : Error(stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Training data cannot support the requested fit (e.g. single-class input).
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ptosis

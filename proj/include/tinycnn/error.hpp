#pragma once

#include <stdexcept>
#include <string>

namespace tinycnn {

enum class ErrorKind { Config, Dataset, Numeric, Io };

/// Base of every error raised by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// A derived layer size underflows or violates the pooling parity rule.
class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& what) : Error(ErrorKind::Dataset, what) {}
};

/// NaN or Inf detected in an activation, gradient or weight.
class NumericFault : public Error {
public:
    explicit NumericFault(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Weight file exists but its byte count does not match the configured network.
class SizeMismatchError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace tinycnn

#pragma once

#include <stdexcept>
#include <string>

namespace rbl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluation of a timeline before its start.
class UndefinedTimeError : public Error {
public:
    UndefinedTimeError(double t, double start);
    double time() const noexcept { return time_; }

private:
    double time_;
};

// An inequality needs a correlation/probability cell that is not present.
class MissingCellError : public Error {
public:
    explicit MissingCellError(std::string key);
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// A cell exists but holds fewer trials than the configured minimum.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace rbl

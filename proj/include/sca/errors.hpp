#pragma once

#include <stdexcept>
#include <string>

namespace sca {

/// Base class for domain failures that callers are expected to handle.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No branch of the amplifier has a nonzero heralding probability.
class NeverHeralded : public Error {
public:
    NeverHeralded() : Error("never-heralded: every branch has zero acceptance weight") {}
};

/// The interferometer imperfection pushes a count probability below zero.
class InvalidEpsilon : public Error {
public:
    explicit InvalidEpsilon(const std::string& what) : Error("invalid-epsilon: " + what) {}
};

/// The pulse-number estimator has no usable signal to invert.
class InsufficientSignal : public Error {
public:
    explicit InsufficientSignal(const std::string& what)
        : Error("insufficient-signal: " + what) {}
};

/// A configuration value failed validation; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace sca

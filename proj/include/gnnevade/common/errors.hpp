#pragma once

#include <stdexcept>
#include <string>

namespace gnnevade {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes passed to an op.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Index (class id, node id, slot) out of its valid range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Input data breaks a documented invariant. `rule` names the invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string rule, const std::string& detail)
        : Error(rule + ": " + detail), rule_(std::move(rule)) {}

    const std::string& rule() const noexcept { return rule_; }

private:
    std::string rule_;
};

/// Malformed file contents.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration (budgets, train settings, CLI flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure during training (empty masks, diverging loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// No legal attacker exists for a victim under the requested variant.
class NoAttackerError : public Error {
public:
    using Error::Error;
};

}  // namespace gnnevade

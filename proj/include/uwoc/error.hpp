#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uwoc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gamma function evaluated exactly at one of its poles.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Fox H-function kernel with no analytic strip between its pole families.
class EmptyStripError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Contour integral failed its refinement self-consistency check.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// Two leading poles coincide, so the simple-pole high-SNR expansion does not exist.
class PoleCollisionError : public Error {
public:
    using Error::Error;
};

/// Requested an analytic form that is only derived for IM/DD.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

struct Violation {
    std::string field;
    std::string constraint;
};

inline std::string describe(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.field + ": " + v.constraint;
    }
    return out;
}

/// Scenario failed validation; carries every violated invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error("invalid scenario: " + describe(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Scenario file could not be parsed. `where` is a line number or a field path.
class ConfigError : public Error {
public:
    ConfigError(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace uwoc

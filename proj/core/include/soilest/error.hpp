#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace soilest {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value outside the mathematical domain of a function (negative tension,
/// invalid soil parameters, non-finite head).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Grid index or layer out of range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Failure of a numerical procedure (Newton divergence, singular innovation,
/// non-finite state).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A non-finite value appeared in the state during integration.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, long node)
        : NumericalError(what), node_(node) {}
    [[nodiscard]] long node() const noexcept { return node_; }

private:
    long node_;
};

/// An implicit step could not be completed even after sub-stepping.
class StepFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// File cannot be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input files or configuration violate their schema. Carries every issue
/// found, not only the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : Error(join(issues)), issues_(std::move(issues)) {}
    explicit ValidationError(const std::string& issue)
        : ValidationError(std::vector<std::string>{issue}) {}

    [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "validation failed";
        for (const auto& issue : issues) {
            out += "\n  - ";
            out += issue;
        }
        return out;
    }
    std::vector<std::string> issues_;
};

} // namespace soilest

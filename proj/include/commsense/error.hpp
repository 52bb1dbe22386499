#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace commsense {

/// Argument or precondition violation, detected before any work happened.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable, malformed or inconsistent data: files, captures, datasets.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A processing stage failed on otherwise well-formed input.
class PipelineError : public std::runtime_error {
public:
    explicit PipelineError(const std::string& what) : std::runtime_error(what) {}

    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    /// Name of the stage that failed; empty when raised outside a harness run.
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace commsense

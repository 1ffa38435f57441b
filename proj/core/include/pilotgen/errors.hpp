#pragma once

#include <stdexcept>
#include <string>

namespace pilotgen {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Test source could not be tokenized, or an edit list does not fit the source.
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// The package under test could not be loaded by the harness.
class ExplorationFailure : public Error {
public:
    using Error::Error;
};

/// Network or authentication failure after the retry budget is exhausted.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

/// A replay cache has no record for the requested prompt hash.
class CacheMiss : public Error {
public:
    using Error::Error;
};

/// The harness process died, timed out, or replied with garbage.
class HarnessCrash : public Error {
public:
    HarnessCrash(const std::string& what, std::string stderrTail)
        : Error(what), stderr_(std::move(stderrTail)) {}

    const std::string& stderrTail() const noexcept { return stderr_; }

private:
    std::string stderr_;
};

/// The harness replied ok:false for a request.
class HarnessError : public Error {
public:
    HarnessError(std::string kind, const std::string& message)
        : Error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class AnalysisFailure : public Error {
public:
    using Error::Error;
};

}  // namespace pilotgen

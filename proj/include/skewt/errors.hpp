#pragma once

#include <stdexcept>
#include <string>

namespace skewt {

/// Model, scenario or config input violates a documented invariant.
/// The message names the offending field and the constraint.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A linear solve or factorization failed, or an iteration diverged.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// All particle weights underflowed; the replication cannot continue.
class DegeneracyError : public NumericalError {
public:
    explicit DegeneracyError(const std::string& what) : NumericalError(what) {}
};

}  // namespace skewt

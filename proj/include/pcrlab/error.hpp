#pragma once

#include <stdexcept>
#include <string>

namespace pcrlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, dimensions, or arguments.
class ValidationError : public Error {
public:
    using Error::Error;
};

class AsymmetryError : public ValidationError {
public:
    AsymmetryError(const std::string& what, double asymmetry)
        : ValidationError(what), asymmetry_(asymmetry) {}

    double asymmetry() const noexcept { return asymmetry_; }

private:
    double asymmetry_;
};

/// Raised when the requested number of components exceeds the numerical
/// rank of the sample covariance.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, long k, double lambda_k)
        : Error(what), k_(k), lambda_k_(lambda_k) {}

    long k() const noexcept { return k_; }
    double lambda_k() const noexcept { return lambda_k_; }

private:
    long k_;
    double lambda_k_;
};

class InconsistentMomentsError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(what), line_(line) {}

    /// 1-based line number, 0 when not tied to a line.
    long line() const noexcept { return line_; }

private:
    long line_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

} // namespace pcrlab

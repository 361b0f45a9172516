#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace ccn {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (bad mesh, bad exponents, bad keys).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Caller broke a contract (shape mismatch, wrong sizes).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A value lies outside the set where an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error("parse error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// Base for numerical solver failures; maps to exit status 2 in the CLI.
class SolverError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public SolverError {
public:
    using SolverError::SolverError;
};

class NoConvergenceError : public SolverError {
public:
    NoConvergenceError(const std::string& what, Eigen::VectorXd last = {})
        : SolverError(what), last_(std::move(last)) {}
    const Eigen::VectorXd& last_iterate() const noexcept { return last_; }

private:
    Eigen::VectorXd last_;
};

class StagnationError : public SolverError {
public:
    using SolverError::SolverError;
};

class MonotonicityError : public SolverError {
public:
    using SolverError::SolverError;
};

class ContinuationError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A diagnostic was asked to run where its hypotheses do not apply.
class InapplicableError : public Error {
public:
    using Error::Error;
};

class CertificateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ccn

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace randghep {

inline constexpr const char* kVersion = "0.3.0";

using Index  = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using MatrixRef  = Eigen::Ref<const Matrix>;
using VectorRef  = Eigen::Ref<const Vector>;

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent shapes. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(what + (line ? " (line " + std::to_string(line) + ")" : std::string{})),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that is well-formed but outside what the library supports.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Floating point breakdown. Maps to CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefiniteError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Raised when a Gram matrix or sketch product is too ill-conditioned for the
/// requested algorithm.
class IllConditionedError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Eigenvalue at infinity in the spectral transform.
class PoleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw ConfigError(msg);
}

inline double spectral_norm(const MatrixRef& M)
{
    if (M.size() == 0)
        return 0.0;
    if (std::min(M.rows(), M.cols()) <= 16)
        return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
    return Eigen::BDCSVD<Matrix>(M).singularValues()(0);
}

inline Matrix symmetrized(const MatrixRef& T)
{
    return 0.5 * (T + T.transpose());
}

} // namespace detail

} // namespace randghep

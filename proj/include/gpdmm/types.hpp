#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gpdmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched dimensions between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or configuration value.
class ValueError : public Error {
public:
    using Error::Error;
};

/// File- or dataset-level problem (missing file, bad cell, ragged data).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure (singular matrix after jitter, non-finite objective).
class NumericError : public Error {
public:
    using Error::Error;
};

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite())
        throw NumericError(what + ": non-finite entries");
}

} // namespace gpdmm

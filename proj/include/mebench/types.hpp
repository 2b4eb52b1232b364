// types.hpp - Shared aliases, error types and small helpers

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mebench {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Which one-sided limit to take when a control has a jump exactly at t.
// Integrators evaluate the end of a step with Left so that a switch placed on
// a grid node is seen only by the following step.
enum class Side { Left, Right };

// Malformed input: bad indices, violated preconditions, schema errors.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure during a run (NaN, degenerate frame, truncation blowup).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateFrameError : public SolverError {
public:
    using SolverError::SolverError;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// exp(-i h t) for Hermitian h via its eigendecomposition; unitary to rounding.
Matrix unitary_exponential(const Matrix& h, double t);

// 64-bit FNV-1a, used for config and settings fingerprints.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

} // namespace mebench

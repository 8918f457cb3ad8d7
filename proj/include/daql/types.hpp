#pragma once

#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace daql {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, std::ptrdiff_t>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Basis-index bit of qubit `q` in an `n`-qubit register. Qubit 0 is the
/// most significant bit.
constexpr int qubit_bit(int n, int q) { return n - 1 - q; }

}  // namespace daql

#pragma once

#include <cstddef>
#include <exception>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

#include "daql/types.hpp"

namespace daql {

struct SpectralDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns
};

/// Hermitian matrix in angular-frequency units (rad/us), stored sparse.
///
/// The spectral decomposition is computed on first request and shared by all
/// copies of the operator; the matrix itself is immutable after construction.
class HermitianOperator {
 public:
  /// Throws ValidationError if `m` is not square or not Hermitian within `tol`.
  static HermitianOperator from_dense(const CMatrix& m, double tol = 1e-10);
  static HermitianOperator from_sparse(SparseCMatrix m, double tol = 1e-10);

  std::size_t dimension() const { return static_cast<std::size_t>(matrix_->rows()); }
  /// log2(dimension), or -1 when the dimension is not a power of two.
  int num_qubits() const;

  const SparseCMatrix& sparse() const { return *matrix_; }
  CMatrix dense() const { return CMatrix(*matrix_); }
  /// True when every entry is real, so the eigenproblem is real symmetric.
  bool is_real() const { return real_; }

  /// y = H x.
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  CVector apply(const CVector& x) const;

  /// Dense eigendecomposition; throws NumericalError on non-convergence.
  const SpectralDecomposition& spectral() const;
  bool has_spectral() const;

  /// Rigorous spectral enclosure from Gershgorin discs.
  std::pair<double, double> spectral_bounds() const;
  /// max |bound|; an upper bound on the operator 2-norm.
  double norm_bound() const;

 private:
  struct Cache {
    std::once_flag once;
    SpectralDecomposition value;
    bool ready = false;
  };

  HermitianOperator(SparseCMatrix m);

  std::shared_ptr<const SparseCMatrix> matrix_;
  std::shared_ptr<Cache> cache_;
  bool real_ = true;
};

}  // namespace daql

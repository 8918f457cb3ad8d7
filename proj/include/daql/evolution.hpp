#pragma once

#include <memory>
#include <span>
#include <vector>

#include "daql/hermitian_operator.hpp"
#include "daql/state.hpp"

namespace daql {

/// exp(-i H t)|psi> through the cached spectral decomposition of H (hbar = 1).
/// Throws ValidationError for t < 0 or a dimension mismatch.
QuantumState evolve(const HermitianOperator& h, double t, const QuantumState& state);

/// <psi|O|psi>; the imaginary residue is discarded.
double expectation(const QuantumState& state, const HermitianOperator& op);

/// Fixed-time propagator exp(-i H t) that can be applied many times.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual std::size_t dimension() const = 0;
  /// In place; `adjoint` applies exp(+i H t).
  virtual void apply(std::span<cplx> state, bool adjoint = false) const = 0;
};

/// Dense U = V exp(-i Lambda t) V^dag built once from the spectral
/// decomposition. Cheapest when the same H is applied to many states.
class SpectralPropagator final : public Propagator {
 public:
  SpectralPropagator(const HermitianOperator& h, double t);
  std::size_t dimension() const override { return static_cast<std::size_t>(u_.rows()); }
  void apply(std::span<cplx> state, bool adjoint = false) const override;
  const CMatrix& matrix() const { return u_; }

 private:
  CMatrix u_;
};

/// Matrix-free Chebyshev expansion of exp(-i H t) using sparse H products.
/// Coefficients are Bessel values J_k(r t) truncated below 1e-16, which makes
/// the result exact to double precision. Cheapest for few applications of a
/// given H (noisy layers drawn once and used once).
class ChebyshevPropagator final : public Propagator {
 public:
  ChebyshevPropagator(HermitianOperator h, double t);
  std::size_t dimension() const override { return h_.dimension(); }
  void apply(std::span<cplx> state, bool adjoint = false) const override;
  std::size_t num_terms() const { return coeffs_.size(); }

 private:
  HermitianOperator h_;
  double center_ = 0.0;
  double half_width_ = 1.0;
  double t_ = 0.0;
  std::vector<cplx> coeffs_;  // forward direction; adjoint conjugates
};

enum class PropagatorKind { Auto, Spectral, Chebyshev };

/// Auto picks Spectral for dimension <= 1024 when `reuse` is set and
/// Chebyshev otherwise.
std::shared_ptr<const Propagator> make_propagator(const HermitianOperator& h, double t,
                                                  PropagatorKind kind = PropagatorKind::Auto,
                                                  bool reuse = true);

struct GroundState {
  double energy = 0.0;
  QuantumState state{1};
};

struct GroundStateOptions {
  std::size_t dense_limit = 1024;   // dense eigensolver at or below this dimension
  double relative_tolerance = 1e-10;  // residual ||H psi - E psi|| / norm_bound(H)
  std::size_t krylov_dim = 120;
  int max_restarts = 200;
};

/// Lowest eigenpair. Dense diagonalization for small operators; restarted
/// Lanczos with full reorthogonalization on the sparse operator otherwise.
/// Deterministic for fixed input. Throws NumericalError on non-convergence.
GroundState ground_state(const HermitianOperator& h, const GroundStateOptions& opts = {});

}  // namespace daql

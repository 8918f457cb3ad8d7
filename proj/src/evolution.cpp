#include "daql/evolution.hpp"

#include <cmath>
#include <string>

#include "daql/errors.hpp"
#include "daql/kernels.hpp"

namespace daql {
namespace {

void check_dims(const HermitianOperator& h, const QuantumState& s) {
  if (h.dimension() != s.dimension()) {
    throw ValidationError("dimension mismatch: operator " + std::to_string(h.dimension()) + " vs state " +
                          std::to_string(s.dimension()));
  }
}

using CMap = Eigen::Map<CVector>;
using ConstCMap = Eigen::Map<const CVector>;

}  // namespace

QuantumState evolve(const HermitianOperator& h, double t, const QuantumState& state) {
  check_dims(h, state);
  if (!(t >= 0.0)) throw ValidationError("evolution time must be >= 0");
  if (t == 0.0) return state;
  const SpectralDecomposition& sd = h.spectral();
  CVector coeffs = sd.eigenvectors.adjoint() * state.amplitudes();
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::exp(-kI * sd.eigenvalues[k] * t);
  CVector out = sd.eigenvectors * coeffs;
  return QuantumState::from_amplitudes(state.num_qubits(), std::move(out), true);
}

double expectation(const QuantumState& state, const HermitianOperator& op) {
  check_dims(op, state);
  CVector hx(static_cast<Eigen::Index>(state.dimension()));
  op.apply(state.view(), {hx.data(), state.dimension()});
  return kernels::inner(state.view(), {hx.data(), state.dimension()}).real();
}

SpectralPropagator::SpectralPropagator(const HermitianOperator& h, double t) {
  if (!(t >= 0.0)) throw ValidationError("evolution time must be >= 0");
  const SpectralDecomposition& sd = h.spectral();
  CVector phases(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * sd.eigenvalues[k] * t);
  u_ = sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
}

void SpectralPropagator::apply(std::span<cplx> state, bool adjoint) const {
  if (state.size() != dimension()) throw ValidationError("propagator: dimension mismatch");
  CMap v(state.data(), static_cast<Eigen::Index>(state.size()));
  CVector out = adjoint ? CVector(u_.adjoint() * v) : CVector(u_ * v);
  v = out;
}

ChebyshevPropagator::ChebyshevPropagator(HermitianOperator h, double t) : h_(std::move(h)), t_(t) {
  if (!(t >= 0.0)) throw ValidationError("evolution time must be >= 0");
  const auto [lo, hi] = h_.spectral_bounds();
  center_ = 0.5 * (hi + lo);
  half_width_ = std::max(0.5 * (hi - lo) * (1.0 + 1e-12), 1e-300);
  const double x = half_width_ * t_;
  // exp(-i x y) = J_0(x) + 2 sum_k (-i)^k J_k(x) T_k(y) for y in [-1, 1].
  const cplx global = std::exp(-kI * center_ * t_);
  cplx phase = 1.0;
  for (int k = 0;; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(k), x);
    coeffs_.push_back(global * phase * (k == 0 ? 1.0 : 2.0) * jk);
    phase *= -kI;
    if (k > x && std::abs(jk) < 1e-17) break;
    if (k > 100000) throw NumericalError("Chebyshev expansion did not terminate");
  }
}

void ChebyshevPropagator::apply(std::span<cplx> state, bool adjoint) const {
  const std::size_t d = dimension();
  if (state.size() != d) throw ValidationError("propagator: dimension mismatch");
  if (t_ == 0.0) return;
  // The adjoint uses conjugated coefficients: exp(+iHt) = conj of the
  // real-argument expansion since T_k(H) is Hermitian.
  auto coeff = [&](std::size_t k) { return adjoint ? std::conj(coeffs_[k]) : coeffs_[k]; };
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  CVector prev = ConstCMap(state.data(), n);  // T_0 v
  CVector cur(n);                             // T_1 v
  CVector next(n);
  CVector acc = coeff(0) * prev;
  const double inv = 1.0 / half_width_;

  h_.apply({prev.data(), d}, {cur.data(), d});
  cur = (cur - center_ * prev) * inv;
  if (coeffs_.size() > 1) acc += coeff(1) * cur;
  for (std::size_t k = 2; k < coeffs_.size(); ++k) {
    h_.apply({cur.data(), d}, {next.data(), d});
    next = 2.0 * inv * (next - center_ * cur) - prev;
    acc += coeff(k) * next;
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  CMap(state.data(), n) = acc;
}

std::shared_ptr<const Propagator> make_propagator(const HermitianOperator& h, double t, PropagatorKind kind,
                                                  bool reuse) {
  if (kind == PropagatorKind::Auto) {
    kind = (reuse && h.dimension() <= 1024) ? PropagatorKind::Spectral : PropagatorKind::Chebyshev;
  }
  if (kind == PropagatorKind::Spectral) return std::make_shared<SpectralPropagator>(h, t);
  return std::make_shared<ChebyshevPropagator>(h, t);
}

namespace {

GroundState dense_ground_state(const HermitianOperator& h) {
  const SpectralDecomposition& sd = h.spectral();
  CVector v = sd.eigenvectors.col(0);
  return {sd.eigenvalues[0], QuantumState::from_amplitudes(h.num_qubits(), std::move(v), true)};
}

GroundState lanczos_ground_state(const HermitianOperator& h, const GroundStateOptions& opts) {
  const std::size_t d = h.dimension();
  const Eigen::Index n = static_cast<Eigen::Index>(d);
  const double scale = std::max(h.norm_bound(), 1e-300);
  const Eigen::Index m = static_cast<Eigen::Index>(std::min<std::size_t>(opts.krylov_dim, d));

  // Fixed pseudo-random start vector: overlaps every symmetry sector.
  RngStream rng(0x4c414e43u, 0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
  v.normalize();

  CMatrix basis(n, m);
  CVector w(n);
  double last_residual = 0.0;
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    RVector alpha(m);
    RVector beta(m);
    basis.col(0) = v;
    Eigen::Index k = 0;
    for (; k < m; ++k) {
      h.apply({basis.col(k).data(), d}, {w.data(), d});
      alpha[k] = basis.col(k).dot(w).real();
      // Full reorthogonalization, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        const CVector proj = basis.leftCols(k + 1).adjoint() * w;
        w -= basis.leftCols(k + 1) * proj;
      }
      beta[k] = w.norm();
      if (k + 1 == m || beta[k] < 1e-14 * scale) {
        ++k;
        break;
      }
      basis.col(k + 1) = w / beta[k];
    }
    RMatrix tri = RMatrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(tri);
    if (es.info() != Eigen::Success) throw NumericalError("Lanczos: tridiagonal eigensolver failed");
    const double theta = es.eigenvalues()[0];
    v = basis.leftCols(k) * es.eigenvectors().col(0).cast<cplx>();
    v.normalize();
    h.apply({v.data(), d}, {w.data(), d});
    last_residual = (w - theta * v).norm();
    if (last_residual <= opts.relative_tolerance * scale) {
      return {expectation(QuantumState::from_amplitudes(h.num_qubits(), v, true), h),
              QuantumState::from_amplitudes(h.num_qubits(), v, true)};
    }
  }
  throw NumericalError("Lanczos did not converge: residual " + std::to_string(last_residual) + " after " +
                       std::to_string(opts.max_restarts) + " restarts (dimension " + std::to_string(d) + ")");
}

}  // namespace

GroundState ground_state(const HermitianOperator& h, const GroundStateOptions& opts) {
  if (h.num_qubits() < 1) throw ValidationError("ground_state: operator dimension must be 2^n");
  if (h.dimension() <= opts.dense_limit) return dense_ground_state(h);
  return lanczos_ground_state(h, opts);
}

}  // namespace daql

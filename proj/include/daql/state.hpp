#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "daql/rng.hpp"
#include "daql/types.hpp"

namespace daql {

/// Normalized amplitude vector over `n` qubits. Basis index bit n-1-q holds
/// qubit q, so qubit 0 is the most significant bit.
class QuantumState {
 public:
  /// |0...0>.
  explicit QuantumState(int n);

  static QuantumState basis(int n, std::uint64_t index);
  /// Throws ValidationError unless the vector has length 2^n and unit norm
  /// (within 1e-10). With `normalize` the vector is rescaled instead.
  static QuantumState from_amplitudes(int n, CVector amplitudes, bool normalize = false);
  /// Tensor product of single-qubit states, qubit 0 first.
  static QuantumState product(std::span<const std::array<cplx, 2>> qubits);

  int num_qubits() const { return n_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }

  const CVector& amplitudes() const { return amps_; }
  std::span<const cplx> view() const { return {amps_.data(), dimension()}; }
  /// Mutable access for in-place kernels; callers keep the norm invariant.
  std::span<cplx> mutable_view() { return {amps_.data(), dimension()}; }

  cplx operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  double norm() const { return amps_.norm(); }

 private:
  QuantumState(int n, CVector amps) : n_(n), amps_(std::move(amps)) {}

  int n_;
  CVector amps_;
};

/// |<a|b>|^2.
double fidelity(const QuantumState& a, const QuantumState& b);

/// Apply a 2^k x 2^k unitary to `targets` (first target is the most
/// significant bit of the gate's local index). Returns the new state.
QuantumState apply_gate(const QuantumState& state, const CMatrix& gate,
                        std::span<const int> targets);

/// In-place variant; same validation.
void apply_gate_inplace(QuantumState& state, const CMatrix& gate, std::span<const int> targets);

/// Probability that qubit `q` reads 1.
double probability_one(const QuantumState& state, int q);

/// Diagonal of sum_k |1_k><1_k| scaled by `weight`, in the computational basis.
RVector excitation_count_diagonal(int n, double weight = 1.0);

/// i.i.d. computational-basis outcomes; each entry is a basis index.
std::vector<std::uint64_t> sample_bitstrings(const QuantumState& state, std::size_t shots,
                                             RngStream& rng);

/// Von Neumann entropy (nats) of the reduced state on `subsystem`.
double entanglement_entropy(const QuantumState& state, std::span<const int> subsystem);

/// Normalized i.i.d. standard complex Gaussian vector (Haar distributed).
QuantumState haar_random_state(int n, RngStream& rng);

/// Checks that a square matrix is unitary within `tol` (max-abs of U^dag U - I).
bool is_unitary(const CMatrix& u, double tol = 1e-10);

}  // namespace daql

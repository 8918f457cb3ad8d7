#include "daql/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "daql/errors.hpp"
#include "daql/kernels.hpp"

namespace daql {
namespace {

constexpr int kMaxQubits = 30;

void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits) throw ValidationError("qubit count must be in [1, 30], got " + std::to_string(n));
}

void check_targets(int n, std::span<const int> targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n) {
      throw IndexError("target qubit " + std::to_string(targets[i]) + " out of range for " +
                       std::to_string(n) + " qubits");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw ValidationError("gate targets must be distinct");
    }
  }
}

// Generic k-qubit application for k > 2.
void apply_kq(std::span<cplx> amps, int n, const CMatrix& gate, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::size_t local = std::size_t{1} << k;
  std::vector<std::size_t> masks(local, 0);
  std::size_t target_mask = 0;
  for (std::size_t l = 0; l < local; ++l) {
    for (int t = 0; t < k; ++t) {
      if ((l >> (k - 1 - t)) & 1U) masks[l] |= std::size_t{1} << qubit_bit(n, targets[t]);
    }
  }
  for (int t = 0; t < k; ++t) target_mask |= std::size_t{1} << qubit_bit(n, targets[t]);

  CVector in(static_cast<Eigen::Index>(local));
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & target_mask) continue;
    for (std::size_t l = 0; l < local; ++l) in[static_cast<Eigen::Index>(l)] = amps[base | masks[l]];
    const CVector out = gate * in;
    for (std::size_t l = 0; l < local; ++l) amps[base | masks[l]] = out[static_cast<Eigen::Index>(l)];
  }
}

}  // namespace

QuantumState::QuantumState(int n) : n_(n) {
  check_qubits(n);
  amps_ = CVector::Zero(Eigen::Index{1} << n);
  amps_[0] = 1.0;
}

QuantumState QuantumState::basis(int n, std::uint64_t index) {
  check_qubits(n);
  if (index >= (std::uint64_t{1} << n)) throw IndexError("basis index out of range");
  CVector amps = CVector::Zero(Eigen::Index{1} << n);
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return QuantumState(n, std::move(amps));
}

QuantumState QuantumState::from_amplitudes(int n, CVector amplitudes, bool normalize) {
  check_qubits(n);
  if (amplitudes.size() != (Eigen::Index{1} << n)) {
    throw ValidationError("amplitude vector length " + std::to_string(amplitudes.size()) +
                          " is not 2^" + std::to_string(n));
  }
  const double norm = amplitudes.norm();
  if (normalize) {
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("cannot normalize a zero or non-finite vector");
    amplitudes /= norm;
  } else if (std::abs(norm * norm - 1.0) > 1e-10) {
    throw ValidationError("state is not normalized (norm^2 = " + std::to_string(norm * norm) + ")");
  }
  return QuantumState(n, std::move(amplitudes));
}

QuantumState QuantumState::product(std::span<const std::array<cplx, 2>> qubits) {
  const int n = static_cast<int>(qubits.size());
  check_qubits(n);
  CVector amps(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    cplx a = 1.0;
    for (int q = 0; q < n; ++q) a *= qubits[q][(i >> qubit_bit(n, q)) & 1];
    amps[i] = a;
  }
  return from_amplitudes(n, std::move(amps), true);
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dimension() != b.dimension()) throw ValidationError("fidelity: dimension mismatch");
  return std::norm(kernels::inner(a.view(), b.view()));
}

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const CMatrix prod = u.adjoint() * u;
  return (prod - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

void apply_gate_inplace(QuantumState& state, const CMatrix& gate, std::span<const int> targets) {
  const int n = state.num_qubits();
  const int k = static_cast<int>(targets.size());
  if (k < 1) throw ValidationError("gate needs at least one target");
  if (gate.rows() != (Eigen::Index{1} << k) || gate.cols() != gate.rows()) {
    throw ValidationError("gate shape does not match " + std::to_string(k) + " targets");
  }
  check_targets(n, targets);
  if (!is_unitary(gate, 1e-10)) throw ValidationError("gate is not unitary within 1e-10");

  auto amps = state.mutable_view();
  if (k == 1) {
    kernels::apply_1q(amps, n, targets[0], {gate(0, 0), gate(0, 1), gate(1, 0), gate(1, 1)});
  } else if (k == 2) {
    kernels::Mat4 g;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) g[4 * r + c] = gate(r, c);
    kernels::apply_2q(amps, n, targets[0], targets[1], g);
  } else {
    apply_kq(amps, n, gate, targets);
  }
}

QuantumState apply_gate(const QuantumState& state, const CMatrix& gate, std::span<const int> targets) {
  QuantumState out = state;
  apply_gate_inplace(out, gate, targets);
  return out;
}

double probability_one(const QuantumState& state, int q) {
  const int n = state.num_qubits();
  if (q < 0 || q >= n) throw IndexError("qubit index out of range");
  const std::size_t mask = std::size_t{1} << qubit_bit(n, q);
  double p = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (i & mask) p += std::norm(state[i]);
  }
  return p;
}

RVector excitation_count_diagonal(int n, double weight) {
  RVector d(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = weight * std::popcount(static_cast<std::uint64_t>(i));
  return d;
}

std::vector<std::uint64_t> sample_bitstrings(const QuantumState& state, std::size_t shots, RngStream& rng) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  std::vector<double> cdf(state.dimension());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += std::norm(state[i]);
    cdf[i] = acc;
  }
  std::vector<std::uint64_t> out(shots);
  for (auto& o : out) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    o = static_cast<std::uint64_t>(it - cdf.begin());
  }
  return out;
}

double entanglement_entropy(const QuantumState& state, std::span<const int> subsystem) {
  const int n = state.num_qubits();
  check_targets(n, subsystem);
  const int na = static_cast<int>(subsystem.size());
  if (na == 0 || na == n) throw ValidationError("subsystem must be a nonempty proper subset");

  // Reduce over the smaller side; the spectrum of rho_A equals that of rho_B.
  std::vector<int> a(subsystem.begin(), subsystem.end());
  std::vector<bool> in_a(n, false);
  for (int q : a) in_a[q] = true;
  std::vector<int> b;
  for (int q = 0; q < n; ++q)
    if (!in_a[q]) b.push_back(q);
  if (a.size() > b.size()) std::swap(a, b);

  const auto sub_index = [n](std::size_t i, const std::vector<int>& qs) {
    std::size_t out = 0;
    for (int q : qs) out = (out << 1) | ((i >> qubit_bit(n, q)) & 1U);
    return out;
  };
  const Eigen::Index da = Eigen::Index{1} << a.size();
  const Eigen::Index db = Eigen::Index{1} << b.size();
  CMatrix m = CMatrix::Zero(da, db);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    m(static_cast<Eigen::Index>(sub_index(i, a)), static_cast<Eigen::Index>(sub_index(i, b))) = state[i];
  }
  const CMatrix rho = m * m.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("entanglement_entropy: eigensolver failed");
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double p = es.eigenvalues()[k];
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

QuantumState haar_random_state(int n, RngStream& rng) {
  check_qubits(n);
  CVector amps(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < amps.size(); ++i) amps[i] = cplx(rng.normal(), rng.normal());
  return QuantumState::from_amplitudes(n, std::move(amps), true);
}

}  // namespace daql

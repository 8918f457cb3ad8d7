#include <numeric>

#include <gtest/gtest.h>

#include "daql/errors.hpp"
#include "daql/evolution.hpp"
#include "daql/hamiltonians.hpp"
#include "daql/state.hpp"
#include "oracles.hpp"

using namespace daql;

namespace {

CMatrix hadamard() {
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

CMatrix pauli_x() { return oracle::pauli('X'); }

HermitianOperator pauli_op(char p) { return HermitianOperator::from_dense(oracle::pauli(p)); }

QuantumState plus_state() {
  const std::array<cplx, 2> plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  return QuantumState::product(std::span(&plus, 1));
}

CMatrix random_unitary(int dim, RngStream& rng) {
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ();
}

}  // namespace

TEST(ApplyGate, XOnQubitZeroFlipsMostSignificantBit) {
  const int targets[] = {0};
  const auto out = apply_gate(QuantumState(2), pauli_x(), targets);
  EXPECT_NEAR(std::abs(out[0b10]), 1.0, 1e-15);
}

TEST(ApplyGate, HadamardIsAnInvolution) {
  RngStream rng(1);
  const auto psi = haar_random_state(4, rng);
  const int q0[] = {0};
  const auto out = apply_gate(apply_gate(psi, hadamard(), q0), hadamard(), q0);
  EXPECT_LT((out.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyGate, CnotMovesTenToEleven) {
  CMatrix cnot = CMatrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  const int targets[] = {0, 1};
  const auto out = apply_gate(QuantumState::basis(2, 0b10), cnot, targets);
  EXPECT_NEAR(std::abs(out[0b11]), 1.0, 1e-15);
}

TEST(ApplyGate, RejectsNonUnitaryAndBadTargets) {
  const int q0[] = {0};
  const int q5[] = {5};
  const int dup[] = {1, 1};
  CMatrix bad = CMatrix::Identity(2, 2) * 2.0;
  EXPECT_THROW(apply_gate(QuantumState(2), bad, q0), ValidationError);
  EXPECT_THROW(apply_gate(QuantumState(2), pauli_x(), q5), IndexError);
  EXPECT_THROW(apply_gate(QuantumState(2), CMatrix::Identity(4, 4), dup), ValidationError);
}

TEST(ApplyGate, TwoQubitGateMatchesDenseEmbedding) {
  RngStream rng(2);
  for (int n = 2; n <= 5; ++n) {
    for (int q0 = 0; q0 < n; ++q0) {
      for (int q1 = 0; q1 < n; ++q1) {
        if (q0 == q1) continue;
        const CMatrix g = random_unitary(4, rng);
        const auto psi = haar_random_state(n, rng);
        const int targets[] = {q0, q1};
        const auto out = apply_gate(psi, g, targets);
        const CVector ref = oracle::embed_2q(n, q0, q1, g) * psi.amplitudes();
        EXPECT_LT((out.amplitudes() - ref).cwiseAbs().maxCoeff(), 1e-12) << n << ' ' << q0 << ' ' << q1;
        EXPECT_NEAR(out.norm(), 1.0, 1e-10);
      }
    }
  }
}

TEST(Evolve, ZeroTimeIsIdentity) {
  RngStream rng(3);
  const auto psi = haar_random_state(4, rng);
  const auto h = build_rydberg(rydberg_params(4, 0.8, 0.87));
  EXPECT_LT((evolve(h, 0.0, psi).amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(evolve(h, -1.0, psi), ValidationError);
  EXPECT_THROW(evolve(h, 0.1, QuantumState(3)), ValidationError);
}

TEST(Evolve, FullRabiCycleNegatesGroundState) {
  const double omega = kTwoPi * 4.0;
  RydbergParams p;
  p.n = 1;
  p.omega = omega;
  p.delta = 0.0;
  p.positions = {{0.0, 0.0}};
  const auto out = evolve(build_rydberg(p), kTwoPi / omega, QuantumState(1));
  EXPECT_NEAR(out[0].real(), -1.0, 1e-12);
  EXPECT_NEAR(std::abs(out[1]), 0.0, 1e-12);
}

TEST(Evolve, MatchesFourthOrderTrotter) {
  const auto params = rydberg_params(4, 0.8, 0.87);
  const auto h = build_rydberg(params);
  oracle::Mat drive = oracle::Mat::Zero(16, 16);
  for (int j = 0; j < 4; ++j) drive += 0.5 * params.omega * oracle::embed_1q(4, j, oracle::pauli('X'));
  const Eigen::VectorXd diag =
      oracle::dense_rydberg(4, params.omega, params.delta, params.positions, params.c6).diagonal().real();
  RngStream rng(4);
  const auto psi = haar_random_state(4, rng);
  const auto out = evolve(h, 0.25, psi);
  const oracle::Vec ref = oracle::trotter4(drive, diag, 0.25, 10000, psi.amplitudes());
  EXPECT_GT(std::norm(ref.dot(out.amplitudes())), 1.0 - 1e-6);
}

TEST(Evolve, MatchesDenseMatrixExponential) {
  const auto params = rydberg_params(5, 1.3, 1.1);
  const auto h = build_rydberg(params);
  const auto u = oracle::expm_i(h.dense(), 0.37);
  RngStream rng(5);
  const auto psi = haar_random_state(5, rng);
  const CVector ref = u * psi.amplitudes();
  EXPECT_LT((evolve(h, 0.37, psi).amplitudes() - ref).cwiseAbs().maxCoeff(), 1e-10);
  const ChebyshevPropagator cheb(h, 0.37);
  CVector v = psi.amplitudes();
  cheb.apply({v.data(), static_cast<std::size_t>(v.size())});
  EXPECT_LT((v - ref).cwiseAbs().maxCoeff(), 1e-10);
  cheb.apply({v.data(), static_cast<std::size_t>(v.size())}, true);
  EXPECT_LT((v - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Evolve, TimesCompose) {
  const auto h = build_xxz({6, 0.7, 1.0, 0.4});
  RngStream rng(6);
  const auto psi = haar_random_state(6, rng);
  const auto two_steps = evolve(h, 0.3, evolve(h, 0.2, psi));
  EXPECT_GT(fidelity(two_steps, evolve(h, 0.5, psi)), 1.0 - 1e-9);
  EXPECT_NEAR(two_steps.norm(), 1.0, 1e-10);
}

TEST(Expectation, PauliEigenstates) {
  EXPECT_NEAR(expectation(QuantumState(1), pauli_op('Z')), 1.0, 1e-15);
  EXPECT_NEAR(expectation(plus_state(), pauli_op('X')), 1.0, 1e-15);
  const auto density = HermitianOperator::from_dense(excitation_count_diagonal(4).cast<cplx>().asDiagonal());
  EXPECT_NEAR(expectation(QuantumState::basis(4, 0b1010), density) / 4.0, 0.5, 1e-15);
}

TEST(Sampling, ZeroStateAlwaysReadsZero) {
  RngStream rng(7);
  for (auto s : sample_bitstrings(QuantumState(5), 100, rng)) EXPECT_EQ(s, 0u);
}

TEST(Sampling, FrequenciesMatchProbabilities) {
  RngStream rng(8);
  const auto plus = sample_bitstrings(plus_state(), 10000, rng);
  EXPECT_NEAR(std::count(plus.begin(), plus.end(), 1u) / 1e4, 0.5, 0.02);
  CVector amps(2);
  amps << std::sqrt(0.25), std::sqrt(0.75);
  const auto skew = sample_bitstrings(QuantumState::from_amplitudes(1, amps), 10000, rng);
  EXPECT_NEAR(std::count(skew.begin(), skew.end(), 1u) / 1e4, 0.75, 0.02);
}

TEST(Entropy, ProductBellAndGhz) {
  RngStream rng(9);
  std::vector<std::array<cplx, 2>> qubits;
  for (int i = 0; i < 6; ++i) {
    const auto one = haar_random_state(1, rng);
    qubits.push_back({one[0], one[1]});
  }
  const auto product = QuantumState::product(qubits);
  for (int cut = 1; cut < 6; ++cut) {
    std::vector<int> a(cut);
    std::iota(a.begin(), a.end(), 0);
    EXPECT_NEAR(entanglement_entropy(product, a), 0.0, 1e-10);
  }
  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const int first[] = {0};
  EXPECT_NEAR(entanglement_entropy(QuantumState::from_amplitudes(2, bell), first), std::log(2.0), 1e-10);
  CVector ghz = CVector::Zero(1 << 13);
  ghz(0) = ghz((1 << 13) - 1) = 1.0 / std::sqrt(2.0);
  const int six[] = {0, 1, 2, 3, 4, 5};
  EXPECT_NEAR(entanglement_entropy(QuantumState::from_amplitudes(13, ghz), six), std::log(2.0), 1e-10);
}

TEST(Entropy, ComplementSymmetryAndErrors) {
  RngStream rng(10);
  const auto psi = haar_random_state(7, rng);
  const int a[] = {0, 3, 5};
  const int b[] = {1, 2, 4, 6};
  EXPECT_NEAR(entanglement_entropy(psi, a), entanglement_entropy(psi, b), 1e-9);
  const int all[] = {0, 1, 2, 3, 4, 5, 6};
  EXPECT_THROW(entanglement_entropy(psi, {}), ValidationError);
  EXPECT_THROW(entanglement_entropy(psi, all), ValidationError);
}

TEST(GroundState, SmallExamples) {
  const auto z = ground_state(pauli_op('Z'));
  EXPECT_NEAR(z.energy, -1.0, 1e-12);
  EXPECT_NEAR(std::abs(z.state[1]), 1.0, 1e-12);

  CMatrix det = CMatrix::Zero(2, 2);
  det(1, 1) = -10.0;
  const auto r = ground_state(HermitianOperator::from_dense(det));
  EXPECT_NEAR(r.energy, -10.0, 1e-12);
  EXPECT_NEAR(std::abs(r.state[1]), 1.0, 1e-12);
}

TEST(GroundState, XxzMatchesDenseOracle) {
  // XXZ builders need n >= 5, so the smallest chain here is 6 sites.
  const auto h = build_xxz({6, 0.01, 1.0, 0.2184});
  const auto gs = ground_state(h);
  const double ref = oracle::lowest_eigenvalue(oracle::dense_xxz(6, 0.01, 1.0, 0.2184));
  EXPECT_NEAR(gs.energy, ref, 1e-8);
  const CVector res = h.apply(gs.state.amplitudes()) - gs.energy * gs.state.amplitudes();
  EXPECT_LT(res.norm(), 1e-8 * h.norm_bound());
}

TEST(GroundState, LanczosAgreesWithDense) {
  const auto h = build_xxz({10, 0.8, 1.0, 0.5});
  GroundStateOptions sparse;
  sparse.dense_limit = 0;
  const auto lanczos = ground_state(h, sparse);
  const double ref = oracle::lowest_eigenvalue(oracle::dense_xxz(10, 0.8, 1.0, 0.5));
  EXPECT_NEAR(lanczos.energy, ref, 1e-8 * h.norm_bound());
  const CVector res = h.apply(lanczos.state.amplitudes()) - lanczos.energy * lanczos.state.amplitudes();
  EXPECT_LT(res.norm(), 1e-8 * h.norm_bound());
}

TEST(GroundState, VariationalBound) {
  const auto h = build_rydberg(rydberg_params(6, 1.5, 1.2));
  const double e0 = ground_state(h).energy;
  RngStream rng(11);
  for (int i = 0; i < 100; ++i) EXPECT_LE(e0, expectation(haar_random_state(6, rng), h) + 1e-12);
}

TEST(HaarState, NormalizedAndSecondMoment) {
  RngStream rng(12);
  const CMatrix v = random_unitary(4, rng);
  const cplx tr = v.trace();
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto psi = haar_random_state(2, rng);
    ASSERT_NEAR(psi.norm(), 1.0, 1e-12);
    sum += std::norm(psi.amplitudes().dot(v * psi.amplitudes()));
  }
  EXPECT_NEAR(sum / draws, (std::norm(tr) + 4.0) / 20.0, 0.005);
}

TEST(HermitianOperator, SpectralReconstructionAndValidation) {
  const auto h = build_rydberg(rydberg_params(5, 0.8, 0.87));
  const auto& sd = h.spectral();
  const CMatrix rebuilt = sd.eigenvectors * sd.eigenvalues.cast<cplx>().asDiagonal() * sd.eigenvectors.adjoint();
  EXPECT_LT((rebuilt - h.dense()).norm() / h.dense().norm(), 1e-8);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(HermitianOperator::from_dense(bad), ValidationError);
}

TEST(RngStream, SubstreamsAreReproducible) {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  auto c = RngStream(42, 3).substream(7);
  auto d = RngStream(42, 3).substream(7);
  auto e = RngStream(42, 3).substream(8);
  const double x = c.normal();
  EXPECT_EQ(x, d.normal());
  EXPECT_NE(x, e.normal());
}

#include <gtest/gtest.h>

#include <filesystem>

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "daql/phase.hpp"
#include "oracles.hpp"

using namespace daql;
using namespace daql::phase;
namespace fs = std::filesystem;

namespace {

QuantumState neel(int n) {
  std::uint64_t idx = 0;
  for (int q = 0; q < n; ++q) idx = (idx << 1) | static_cast<std::uint64_t>(q % 2);
  return QuantumState::basis(n, idx);
}

oracle::Mat spin_dot(int n, int i, int j) {
  i = ((i % n) + n) % n;
  j = ((j % n) + n) % n;
  oracle::Mat m = oracle::Mat::Zero(1L << n, 1L << n);
  for (char p : {'X', 'Y', 'Z'}) m += oracle::site_product(n, {{i, oracle::pauli(p)}, {j, oracle::pauli(p)}});
  return m;
}

cplx dense_expect(const oracle::Mat& op, const CVector& psi) { return psi.dot(op * psi); }

MeshSpec small_xxz(int nx, int ny) {
  MeshSpec s = xxz_mesh(8, nx, ny);
  return s;
}

std::vector<double> plane(int nx, int ny, double ax, double ay) {
  std::vector<double> v;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) v.push_back(ax * ix + ay * iy);
  return v;
}

}  // namespace

TEST(Correlators, ProductStateValues) {
  for (cplx c : correlators(QuantumState(8), CorrelatorKind::Z)) EXPECT_NEAR(std::abs(c - 1.0), 0.0, 1e-14);
  const auto cz = correlators(neel(8), CorrelatorKind::Z);
  ASSERT_EQ(cz.size(), 8u);
  for (int r = 1; r <= 8; ++r) EXPECT_NEAR(cz[r - 1].real(), r % 2 ? -1.0 : 1.0, 1e-14);
  const std::vector<std::array<cplx, 2>> plus(8, {cplx(std::sqrt(0.5)), cplx(std::sqrt(0.5))});
  const auto p = QuantumState::product(plus);
  for (cplx c : correlators(p, CorrelatorKind::X)) EXPECT_NEAR(c.real(), 1.0, 1e-14);
  const auto pz = correlators(p, CorrelatorKind::Z);
  for (int r = 1; r < 8; ++r) EXPECT_NEAR(std::abs(pz[r - 1]), 0.0, 1e-14);
  EXPECT_NEAR(pz[7].real(), 1.0, 1e-14);  // r = n is the reference site itself
  EXPECT_THROW(correlators(QuantumState(4), CorrelatorKind::Vbs), ValidationError);
}

TEST(Correlators, MatchDenseOperators) {
  const int n = 6;
  RngStream rng(11);
  const auto psi = haar_random_state(n, rng);
  const CVector v = psi.amplitudes();
  const auto cz = correlators(psi, CorrelatorKind::Z);
  const auto cx = correlators(psi, CorrelatorKind::X);
  const auto cd = correlators(psi, CorrelatorKind::Vbs);
  const int c = kCentralSite;
  const auto dimer = [&](int j) { return oracle::Mat(spin_dot(n, j + 1, j) - spin_dot(n, j, j - 1)); };
  for (int r = 1; r <= n; ++r) {
    const int s = (c + r) % n;
    const auto z = oracle::site_product(n, {{c, oracle::pauli('Z')}, {s, oracle::pauli('Z')}});
    const oracle::Mat x = s == c ? oracle::Mat::Identity(1L << n, 1L << n)
                                 : oracle::site_product(n, {{c, oracle::pauli('X')}, {s, oracle::pauli('X')}});
    EXPECT_NEAR(std::abs(cz[r - 1] - dense_expect(z, v)), 0.0, 1e-12) << r;
    EXPECT_NEAR(std::abs(cx[r - 1] - dense_expect(x, v)), 0.0, 1e-12) << r;
    EXPECT_NEAR(std::abs(cd[r - 1] - dense_expect(dimer(c) * dimer(c + r), v)), 0.0, 1e-11) << r;
  }
}

TEST(OrderParameters, TrivialValues) {
  EXPECT_NEAR(order_parameters(neel(8)).value[0], 8.0, 1e-12);
  EXPECT_NEAR(order_parameters(QuantumState(8)).value[0], 0.0, 1e-12);
}

TEST(OrderParameters, GroundStatesAreRealAndPhaseSelective) {
  const auto h_z = node_hamiltonian(xxz_mesh(), 0.01, 0.2184);
  const auto h_q = node_hamiltonian(xxz_mesh(), 0.01, 0.9479);
  const auto gz = ground_state(h_z);
  const auto gq = ground_state(h_q);
  const auto oz = order_parameters(gz.state);
  const auto oq = order_parameters(gq.state);
  for (int k = 0; k < 4; ++k) {
    EXPECT_LT(oz.imag_residue[k], 1e-8);
    EXPECT_LT(oq.imag_residue[k], 1e-8);
  }
  EXPECT_GT(std::abs(oq.value[1]), std::abs(oz.value[1]));
  EXPECT_GT(std::abs(oz.value[0]), std::abs(oq.value[0]));
}

TEST(OrderParameters, ZafmPeaksInsideItsContour) {
  const auto mesh = build_mesh(xxz_mesh(8, 8, 8));
  const auto ops = order_parameter_map(mesh);
  std::vector<double> z;
  for (const auto& o : ops) z.push_back(std::abs(o.value[0]));
  const auto mask = top_fraction_mask(z, kContourPercent[0]);
  const auto best = std::max_element(z.begin(), z.end()) - z.begin();
  EXPECT_TRUE(mask[static_cast<std::size_t>(best)]);
}

TEST(Mask, TopFractionCountsAndTies) {
  const std::vector<double> v{0.1, -5.0, 3.0, 0.2, 0.0};
  auto m = top_fraction_mask(v, 40.0);
  EXPECT_EQ(std::vector<bool>(m.begin(), m.end()), (std::vector<bool>{false, true, true, false, false}));
  m = top_fraction_mask(v, 1.0);
  EXPECT_EQ(std::count(m.begin(), m.end(), true), 1);
  EXPECT_TRUE(m[1]);
}

TEST(Entropy, ProductAndBellStates) {
  MeshSpec spec = rydberg_mesh(6, 1, 1);
  spec.x = {"Delta/Omega", -30.0, -30.0, 1};
  spec.y = {"Rb/a", 1.5, 1.5, 1};
  const auto mesh = build_mesh(spec);
  EXPECT_NEAR(entropy_map(mesh)[0], 0.0, 1e-3);

  PhaseMesh bell = mesh;
  CVector a = CVector::Zero(64);
  a[0] = a[(1 << 3) | (1 << 2)] = std::sqrt(0.5);  // qubits 2 and 3 share a pair
  bell.states[0] = QuantumState::from_amplitudes(6, a);
  EXPECT_NEAR(entropy_map(bell)[0], std::log(2.0), 1e-12);
}

TEST(Mesh, NodesAreEigenstatesAndCached) {
  const fs::path dir = fs::temp_directory_path() / "daql_phase_cache";
  fs::remove_all(dir);
  const auto spec = small_xxz(2, 2);
  const auto mesh = build_mesh(spec, dir / "m.gs");
  ASSERT_EQ(mesh.states.size(), 4u);
  EXPECT_EQ(mesh.eigensolves, 4u);
  for (int iy = 0; iy < 2; ++iy) {
    for (int ix = 0; ix < 2; ++ix) {
      const auto node = mesh.index(ix, iy);
      const auto h = node_hamiltonian(spec, spec.x.value(ix), spec.y.value(iy));
      const CVector& psi = mesh.states[node].amplitudes();
      const double res = (h.sparse() * psi - mesh.energy[node] * psi).norm();
      EXPECT_LT(res, 1e-8 * std::max(1.0, std::abs(mesh.energy[node])));
      EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    }
  }
  const auto again = build_mesh(spec, dir / "m.gs");
  EXPECT_EQ(again.eigensolves, 0u);
  EXPECT_EQ(again.energy, mesh.energy);
  EXPECT_EQ(serialize_mesh(again), serialize_mesh(mesh));
  const std::string blob = serialize_mesh(mesh);
  EXPECT_EQ(blob.substr(0, 8), "DAQLGS01");
  EXPECT_THROW(deserialize_mesh(blob.substr(0, blob.size() - 1)), FormatError);
  auto other = spec;
  other.tolerance = 1e-9;
  EXPECT_EQ(build_mesh(other, dir / "m.gs").eigensolves, 4u);
  fs::remove_all(dir);
}

TEST(Mesh, XxzNodeMatchesDenseOracle) {
  MeshSpec spec = xxz_mesh(8, 1, 1);
  spec.x = {"J3/J6", 0.01, 0.01, 1};
  spec.y = {"alpha", 0.2184, 0.2184, 1};
  const auto mesh = build_mesh(spec);
  EXPECT_NEAR(mesh.energy[0], oracle::lowest_eigenvalue(oracle::dense_xxz(8, 0.01, 1.0, 0.2184)), 1e-8);
}

TEST(Mesh, ValidatesAxesAndSize) {
  MeshSpec spec = xxz_mesh(8, 2, 2);
  spec.x.max = spec.x.min;
  EXPECT_THROW(spec.validate(), ValidationError);
  EXPECT_THROW(xxz_mesh(4).validate(), ValidationError);
  EXPECT_THROW(parse_model("ising"), ValidationError);
}

TEST(Sharpness, ZeroCasesAndStep) {
  const Axis x{"x", 0, 1, 5};
  const Axis y{"y", 0, 2, 4};
  EXPECT_EQ(sharpness(std::vector<double>(20, 0.3), x, y), 0.0);
  EXPECT_NEAR(sharpness(plane(5, 4, 0.7, 0.0), x, y), 0.0, 1e-12);
  EXPECT_NEAR(sharpness(plane(5, 4, 0.7, -0.4), x, y), 0.0, 1e-12);
  std::vector<double> step(20);
  for (int i = 0; i < 20; ++i) step[i] = (i % 5) >= 3 ? 1.0 : 0.0;
  const double s = sharpness(step, x, y);
  EXPECT_GT(s, 0.0);
  std::vector<double> shifted = step;
  for (double& v : shifted) v += 0.25;
  EXPECT_NEAR(sharpness(shifted, x, y), s, 1e-12);
  EXPECT_THROW(sharpness(std::vector<double>(10, 0.0), Axis{"x", 0, 1, 5}, Axis{"y", 0, 1, 2}), ValidationError);
}

TEST(Detector, ZeroLayersGiveUniformHalf) {
  const auto mesh = build_mesh(small_xxz(4, 4));
  DetectorConfig cfg;
  cfg.ansatz = DAHyperparams{8, 0};
  cfg.runs = 8;
  cfg.epochs = 20;
  const auto d = train_anomaly_detector(mesh, cfg);
  double mean = 0.0;
  for (double v : d.loss) mean += v / static_cast<double>(d.loss.size());
  double var = 0.0;
  for (double v : d.loss) var += (v - mean) * (v - mean) / static_cast<double>(d.loss.size() - 1);
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
  EXPECT_LT(std::sqrt(var), 0.05);
}

TEST(Detector, LearnsTrainingNodeDeterministically) {
  const auto mesh = build_mesh(small_xxz(4, 4));
  DetectorConfig cfg;
  cfg.ansatz = DAHyperparams{8, 2};
  cfg.runs = 3;
  cfg.epochs = 50;
  cfg.seed = 9;
  const auto d = train_anomaly_detector(mesh, cfg);
  ASSERT_EQ(d.loss.size(), mesh.states.size());
  for (double v : d.loss) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(d.train_node, mesh.nearest_node(cfg.train_x, cfg.train_y));
  EXPECT_EQ(d.records.size(), 3u);
  for (std::size_t r = 0; r < d.records.size(); ++r) EXPECT_EQ(d.records[r].epochs.size(), 50u);
  const double best = *std::min_element(d.train_node_loss.begin(), d.train_node_loss.end());
  EXPECT_LT(best, d.records[0].epochs.front().loss);
  const auto again = train_anomaly_detector(mesh, cfg);
  EXPECT_EQ(again.loss, d.loss);
}

TEST(Detector, SingleDepthSweepRepeatsDetector) {
  const auto mesh = build_mesh(small_xxz(3, 3));
  DetectorConfig cfg;
  cfg.runs = 2;
  cfg.epochs = 3;
  const std::vector<int> layers{1};
  const std::vector<SharpnessScheme> schemes{{"digital", DigitalHyperparams{8, 0, kPi / 8}}};
  const auto rows = sharpness_vs_depth(mesh, layers, schemes, cfg, 2);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].layers, 1);
  EXPECT_EQ(rows[0].repeats, 2);
  EXPECT_GE(rows[0].mean, 0.0);
}

TEST(Csv, GridOrderIsXFastest) {
  MeshSpec spec = small_xxz(2, 2);
  const std::string csv = grid_csv(spec, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(csv.substr(0, 12), "x,y,value\n0.");
  const auto t = io::parse_csv(csv);
  EXPECT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.number(1, 2), 2.0);
  EXPECT_EQ(t.number(1, 1), 0.0);
  EXPECT_EQ(t.number(2, 0), 0.01);
}

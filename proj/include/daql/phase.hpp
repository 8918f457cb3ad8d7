#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "daql/evolution.hpp"
#include "daql/noise.hpp"
#include "daql/training.hpp"

namespace daql::phase {

enum class Model { Rydberg, Xxz };
std::string model_name(Model m);
Model parse_model(const std::string& name);

struct Axis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int count = 2;

  double value(int i) const;
  double step() const { return count > 1 ? (max - min) / (count - 1) : 0.0; }
  /// Index of the node closest to `v`.
  int nearest(double v) const;
};

/// Rydberg: x = Delta/Omega, y = Rb/a (open chain). XXZ: x = J3/J6 with
/// J6 = 1, y = alpha (periodic chain).
struct MeshSpec {
  Model model = Model::Xxz;
  int n = 8;
  Axis x;
  Axis y;
  double omega = kTwoPi * 4.0;  // Rydberg only
  double tolerance = 1e-10;     // relative eigensolver residual

  void validate() const;
  std::size_t num_nodes() const { return static_cast<std::size_t>(x.count) * static_cast<std::size_t>(y.count); }
  /// Canonical JSON of every field; its SHA-256 keys the ground-state cache.
  std::string canonical() const;
};

/// J3/J6 in [0.01, 2], alpha in [0, 1].
MeshSpec xxz_mesh(int n = 8, int nx = 20, int ny = 20);
/// Delta/Omega in [0, 4], Rb/a in [1, 3].
MeshSpec rydberg_mesh(int n = 9, int nx = 21, int ny = 21);

HermitianOperator node_hamiltonian(const MeshSpec& spec, double x, double y);

/// Ground states on an nx x ny grid. Node (ix, iy) is stored at
/// iy * nx + ix. Failed nodes carry a NaN energy.
struct PhaseMesh {
  MeshSpec spec;
  std::vector<double> energy;
  std::vector<QuantumState> states;
  std::size_t eigensolves = 0;  // performed while building (0 on a cache hit)

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * spec.x.count + ix; }
  bool ok(std::size_t node) const { return energy[node] == energy[node]; }
  std::size_t nearest_node(double x, double y) const { return index(spec.x.nearest(x), spec.y.nearest(y)); }
};

/// Solves every node, or loads the mesh from `cache_file` when it exists
/// and its header matches `spec`. Writes the cache after solving when a
/// path is given.
PhaseMesh build_mesh(const MeshSpec& spec, const std::filesystem::path& cache_file = {});

/// "DAQLGS01", header (model, n, axes, tolerance, omega), then per node an
/// f64 energy and interleaved f64 re/im amplitudes.
std::string serialize_mesh(const PhaseMesh& mesh);
PhaseMesh deserialize_mesh(std::string_view bytes);

inline constexpr int kCentralSite = 2;

enum class CorrelatorKind { Z, X, Vbs };

/// C(r) for r = 1..n on a periodic chain with reference site 2:
/// Z: <Z_2 Z_{2+r}>, X: <X_2 X_{2+r}>, VBS: <D_2 D_{2+r}> with
/// D_j = s_{j+1}.s_j - s_j.s_{j-1} and s.s = XX + YY + ZZ. Site indices are
/// taken mod n. Throws ValidationError for n < 5.
std::vector<cplx> correlators(const QuantumState& state, CorrelatorKind kind);

struct OrderParameters {
  // zAFM, qzAFM, xAFM, VBS
  std::array<double, 4> value{};
  std::array<double, 4> imag_residue{};
};
inline constexpr std::array<const char*, 4> kOrderNames{"zAFM", "qzAFM", "xAFM", "VBS"};
/// Contour fractions (top-k percent of |O|) for each order parameter.
inline constexpr std::array<double, 4> kContourPercent{18.0, 3.0, 50.0, 9.0};

/// O = sum_{r=1}^{n} phase(r) C(r) with phases (-1)^r, e^{i pi r/2}, (-1)^r, (-1)^r.
OrderParameters order_parameters(const QuantumState& state);
std::vector<OrderParameters> order_parameter_map(const PhaseMesh& mesh);

/// Nodes whose |value| ranks in the top `percent` percent (at least one node).
std::vector<bool> top_fraction_mask(std::span<const double> values, double percent);

/// Half-chain entropy with subsystem = first floor(n/2) sites.
std::vector<double> entropy_map(const PhaseMesh& mesh);

struct DetectorConfig {
  AnsatzHyperparams ansatz = DAHyperparams{};  // n must match the mesh
  NoiseConfig noise;
  int runs = 20;
  int epochs = 50;
  double learning_rate = 0.1;
  double train_x = 0.01;
  double train_y = 0.2184;
  std::uint64_t seed = 0;

  void validate() const;
  std::string canonical() const;
};

struct LearnedPhaseDiagram {
  MeshSpec spec;
  std::vector<double> loss;  // mean over runs, per node
  int runs = 0;
  std::size_t train_node = 0;
  std::vector<double> train_node_loss;  // per run, after training
  std::vector<TrainRecord> records;
  bool warning = false;  // no run reached a training loss below 0.2
};

/// Trains `runs` circuits to minimize the mean Rydberg density of the
/// training node's ground state, then evaluates each at every mesh node.
/// With noise, each epoch and each node evaluation draws fresh noise.
LearnedPhaseDiagram train_anomaly_detector(const PhaseMesh& mesh, const DetectorConfig& cfg);

/// |grad L|^2 per node in axis units: central differences inside, one-sided
/// on edges. NaN where a neighbouring value is NaN. Throws ValidationError
/// for meshes smaller than 3 x 3.
std::vector<double> gradient_norm_squared(std::span<const double> values, const Axis& x, const Axis& y);

/// Sample standard deviation of the finite values of gradient_norm_squared.
double sharpness(std::span<const double> values, const Axis& x, const Axis& y);
double sharpness(const LearnedPhaseDiagram& diagram);

struct SharpnessScheme {
  std::string name;
  AnsatzHyperparams ansatz;  // layers are overwritten by the sweep
};

struct SharpnessRow {
  int layers = 0;
  std::string scheme;
  double mean = 0.0;
  double std = 0.0;
  int repeats = 0;
  int runs = 0;
};

/// Per (layers, scheme): `repeats` independent diagrams of `base.runs` runs
/// each, summarized by mean and sample standard deviation of sharpness.
std::vector<SharpnessRow> sharpness_vs_depth(const PhaseMesh& mesh, std::span<const int> layers,
                                             std::span<const SharpnessScheme> schemes, const DetectorConfig& base,
                                             int repeats);

/// x,y,value rows, x fastest.
std::string grid_csv(const MeshSpec& spec, std::span<const double> values);

}  // namespace daql::phase

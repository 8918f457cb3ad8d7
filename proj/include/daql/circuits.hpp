#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "daql/evolution.hpp"
#include "daql/hamiltonians.hpp"
#include "daql/rng.hpp"
#include "daql/state.hpp"

namespace daql {

/// Digital-analog ansatz hyperparameters. Defaults: Omega = 2pi x 4 MHz,
/// Delta/Omega = 0.8, Rb/a = 0.87, t = 2pi/Omega = 0.25 us.
struct DAHyperparams {
  int n = 8;
  int layers = 0;
  double omega = kTwoPi * 4.0;
  double delta_over_omega = 0.8;
  double rb_over_a = 0.87;
  double time = 0.25;

  void validate() const;
  RydbergParams rydberg() const { return rydberg_params(n, delta_over_omega, rb_over_a, omega); }
};

/// Digital ansatz: each entangling layer is the ascending chain
/// CX_{0->1}(phi), CX_{1->2}(phi), ..., CX_{n-2->n-1}(phi).
struct DigitalHyperparams {
  int n = 8;
  int layers = 0;
  double phi = kPi / 4.0;

  void validate() const;
};

using AnsatzHyperparams = std::variant<DAHyperparams, DigitalHyperparams>;

int ansatz_qubits(const AnsatzHyperparams& hp);
int ansatz_layers(const AnsatzHyperparams& hp);
/// "da" or "digital".
std::string ansatz_name(const AnsatzHyperparams& hp);

/// Trainable Euler angles, 3 n (layers + 1) values stored layer-major, then
/// qubit, then (alpha, beta, gamma). Each triple is Rz(alpha) Ry(beta) Rz(gamma).
class RotationParams {
 public:
  RotationParams(int n, int layers);
  RotationParams(int n, int layers, std::vector<double> flat);

  static std::size_t count(int n, int layers) { return 3u * static_cast<std::size_t>(n) * (layers + 1u); }
  /// i.i.d. Uniform(-pi, pi).
  static RotationParams random(int n, int layers, RngStream& rng);

  int num_qubits() const { return n_; }
  int num_layers() const { return layers_; }
  std::size_t size() const { return values_.size(); }

  double angle(int layer, int qubit, int k) const { return values_[index(layer, qubit, k)]; }
  double& angle(int layer, int qubit, int k) { return values_[index(layer, qubit, k)]; }
  std::size_t index(int layer, int qubit, int k) const {
    return (static_cast<std::size_t>(layer) * n_ + qubit) * 3 + k;
  }

  std::span<const double> flat() const { return values_; }
  std::span<double> flat() { return values_; }

 private:
  int n_;
  int layers_;
  std::vector<double> values_;
};

CMatrix rz(double theta);
CMatrix ry(double theta);
/// Rz(alpha) Ry(beta) Rz(gamma), with Rz(t) = diag(e^{-it/2}, e^{it/2}).
CMatrix euler_rotation(double alpha, double beta, double gamma);

/// exp(-i phi (I - Z_1)(I - X_2)) from the commuting factorization
/// e^{-i phi} e^{i phi Z_1} e^{i phi X_2} e^{-i phi Z_1 X_2}; equals CNOT at
/// phi = pi/4. Local basis |control target>.
CMatrix generalized_cnot(double phi);
CMatrix cnot_matrix();

/// One entangling block between rotation layers.
class Entangler {
 public:
  virtual ~Entangler() = default;
  virtual void apply(std::span<cplx> amps, bool adjoint = false) const = 0;
};

/// Global evolution exp(-i H t) under a Rydberg Hamiltonian instance.
class AnalogEntangler final : public Entangler {
 public:
  explicit AnalogEntangler(std::shared_ptr<const Propagator> propagator);
  void apply(std::span<cplx> amps, bool adjoint = false) const override;

 private:
  std::shared_ptr<const Propagator> propagator_;
};

/// Ascending chain of generalized CNOTs with one angle per gate.
class CxChainEntangler final : public Entangler {
 public:
  CxChainEntangler(int n, std::vector<double> angles);
  void apply(std::span<cplx> amps, bool adjoint = false) const override;
  const std::vector<double>& angles() const { return angles_; }

 private:
  int n_;
  std::vector<double> angles_;
};

using EntanglerList = std::vector<std::shared_ptr<const Entangler>>;

struct GateRecord {
  enum class Kind { Rotation, Analog, Cx };
  Kind kind;
  int layer;               // rotation layer index, or entangling layer index (1-based)
  std::vector<int> qubits;
};

/// R-layer 0, then for j = 1..layers: entangler j, R-layer j. Immutable.
class Circuit {
 public:
  Circuit(int n, RotationParams params, EntanglerList entanglers, bool analog);

  int num_qubits() const { return n_; }
  int num_layers() const { return static_cast<int>(entanglers_.size()); }
  int depth() const { return 2 * num_layers() + 1; }
  bool is_analog() const { return analog_; }

  const RotationParams& params() const { return params_; }
  const EntanglerList& entanglers() const { return entanglers_; }
  Circuit with_params(RotationParams params) const;

  /// Gate order as executed (for inspection and drawing).
  std::vector<GateRecord> gate_sequence() const;

  void run_inplace(QuantumState& state) const;

 private:
  int n_;
  RotationParams params_;
  EntanglerList entanglers_;
  bool analog_;
};

/// Applies one rotation layer of `params` in place.
void apply_rotation_layer(std::span<cplx> amps, const RotationParams& params, int layer);

/// Every entangling layer shares one propagator built from `h`.
Circuit build_da_circuit(const DAHyperparams& hp, RotationParams params, const HermitianOperator& h,
                         PropagatorKind kind = PropagatorKind::Auto);
/// One Hamiltonian instance per entangling layer (noisy draws).
Circuit build_da_circuit(const DAHyperparams& hp, RotationParams params, std::span<const HermitianOperator> layers,
                         PropagatorKind kind = PropagatorKind::Auto);
Circuit build_digital_circuit(const DigitalHyperparams& hp, RotationParams params);
/// Explicit per-gate angles: `angles[j][i]` is gate i of entangling layer j.
Circuit build_digital_circuit(const DigitalHyperparams& hp, RotationParams params,
                              const std::vector<std::vector<double>>& angles);

/// Throws ValidationError on dimension mismatch.
QuantumState run_circuit(const Circuit& circuit, const QuantumState& input);

/// Serialized trained parameters:
/// {n, layers, ansatz, hyperparams, params, seed, euler_convention, cx_order}.
std::string params_to_json(const AnsatzHyperparams& hp, const RotationParams& params, std::uint64_t seed);
struct LoadedParams {
  AnsatzHyperparams hyperparams;
  RotationParams params{1, 0};
  std::uint64_t seed = 0;
};
LoadedParams params_from_json(const std::string& text);

}  // namespace daql

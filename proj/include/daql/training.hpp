#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "daql/circuits.hpp"
#include "daql/errors.hpp"

namespace daql {

/// Binary cross-entropy -(1/m) sum [y ln q + (1 - y) ln(1 - q)] with q
/// clamped to [1e-10, 1 - 1e-10]. `two_term = false` keeps only the y ln q
/// term. Throws ValidationError on an empty or mismatched batch.
double cross_entropy_loss(std::span<const int> labels, std::span<const double> probs, bool two_term = true);

/// Mean Rydberg (|1>) density (1/n) sum_k <P1_k>.
double rydberg_density_loss(const QuantumState& state);

/// Diagonal observables in the computational basis.
RVector density_observable(int n);            // (1/n) sum_k P1_k
RVector qubit_one_observable(int n, int q);   // P1 on qubit q

/// Scalar loss L(q_1..q_m) of per-input expectations q_i = <psi_i|O|psi_i>.
/// Fills dL/dq_i when `grad` is nonempty.
using Reducer = std::function<double(std::span<const double> q, std::span<double> grad)>;

Reducer cross_entropy_reducer(std::vector<int> labels, bool two_term = true);
/// Mean of the q_i.
Reducer mean_reducer();

/// Loss over a set of circuit inputs measured with one diagonal observable.
struct Objective {
  std::vector<QuantumState> inputs;
  RVector observable;
  Reducer reduce;
  /// 0 = exact expectations; otherwise q_i is estimated from this many shots
  /// drawn from RngStream(shot_seed, i), identical for every evaluation.
  std::size_t shots = 0;
  std::uint64_t shot_seed = 0;
};

struct LossValue {
  double loss = 0.0;
  std::vector<double> expectations;
};

LossValue evaluate(const Objective& objective, const Circuit& circuit);

enum class GradientMode { Analytic, ParameterShift, FiniteDifference };

/// dL/d(rotation parameters) in canonical order. Analytic uses a reverse
/// sweep over the circuit; finite differences are central with step `fd_step`.
/// Analytic and parameter-shift modes require exact expectations.
std::vector<double> gradient(const Objective& objective, const Circuit& circuit, GradientMode mode,
                             double fd_step = 1e-5);

/// Loss and analytic gradient from one forward and one reverse pass.
LossValue loss_and_gradient(const Objective& objective, const Circuit& circuit, std::vector<double>& grad);

struct OptimizerState {
  double learning_rate = 0.1;
  double epsilon = 1e-8;
  std::vector<double> accumulator;
};

/// AdaGrad: acc += g^2; p -= lr g / (sqrt(acc) + eps). Throws NumericalError
/// on a non-finite gradient or a shape mismatch.
void adagrad_step(OptimizerState& state, std::span<double> params, std::span<const double> grad);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::uint64_t param_hash = 0;  // parameters the loss was evaluated at
  double wall_ms = 0.0;
};

struct TrainRecord {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
};

/// One JSON object per epoch: {"epoch", "loss", "grad_norm", "seed", "param_hash"}.
/// Wall-clock time is left out so equal runs serialize identically.
void write_train_record(std::ostream& out, const TrainRecord& record);

std::uint64_t params_hash(std::span<const double> params);

/// What one epoch trains on: the objective and the entangling layers
/// (carrying that epoch's noise draw).
struct EpochProblem {
  Objective objective;
  EntanglerList entanglers;
  bool analog = true;
};

using EpochBuilder = std::function<EpochProblem(int epoch, RngStream& rng)>;

struct TrainOptions {
  int epochs = 70;
  double learning_rate = 0.1;
  /// Finite differences for shot-based objectives; analytic otherwise.
  GradientMode mode = GradientMode::Analytic;
};

struct TrainResult {
  RotationParams params{1, 0};
  TrainRecord record;
};

/// Raised when the loss or gradient becomes non-finite; carries the epochs
/// completed so far.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, TrainRecord record)
      : NumericalError(what), record_(std::move(record)) {}
  const TrainRecord& record() const { return record_; }

 private:
  TrainRecord record_;
};

/// Epoch e calls build(e, rng.substream(e)), evaluates loss and gradient on
/// that single draw and takes one AdaGrad step.
TrainResult train(const TrainOptions& opts, RotationParams initial, const EpochBuilder& build, const RngStream& rng);

}  // namespace daql

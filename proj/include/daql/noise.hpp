#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "daql/circuits.hpp"

namespace daql {

/// Coherent errors of one analog layer: Delta + N(0, detuning_std),
/// Omega * N(1, rabi_rel_std), and each position coordinate + N(0, position_std).
struct AnalogNoiseModel {
  double detuning_std = kTwoPi * 0.1;  // rad/us
  double rabi_rel_std = 0.01;
  double position_std = 0.1;  // um, per coordinate

  /// Reads the 0.1 MHz detuning spread as 0.1 rad/us instead of 2pi x 0.1.
  static AnalogNoiseModel plain_frequency_units();
  static AnalogNoiseModel none() { return {0.0, 0.0, 0.0}; }
  void validate() const;
};

/// Generalized-CNOT angle drawn from N(phi, sigma^2).
struct DigitalNoiseModel {
  double sigma = 0.065;
  void validate() const;
};

struct NoiseConfig {
  bool enabled = false;
  AnalogNoiseModel analog;
  DigitalNoiseModel digital;
};

struct AnalogDraw {
  double delta = 0.0;
  double omega = 0.0;
  std::vector<Position> positions;
};

/// All error variables of one circuit instance: one analog draw per
/// entangling layer, or one angle per CX gate (`digital[layer][gate]`).
struct NoiseSample {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<AnalogDraw> analog;
  std::vector<std::vector<double>> digital;
};

/// Perturbed copy of `params`. Coincident perturbed positions are redrawn.
RydbergParams perturb_rydberg(const RydbergParams& params, const AnalogNoiseModel& model, RngStream& rng);
HermitianOperator sample_noisy_rydberg(const RydbergParams& params, const AnalogNoiseModel& model, RngStream& rng);

double sample_cx_angle(double phi, const DigitalNoiseModel& model, RngStream& rng);
CMatrix sample_noisy_cx(double phi, const DigitalNoiseModel& model, RngStream& rng);

/// Layer j draws from rng.substream(j), so a sample is a pure function of
/// the stream it was drawn from.
NoiseSample draw_noise(const AnsatzHyperparams& hp, const AnalogNoiseModel& analog, const DigitalNoiseModel& digital,
                       RngStream& rng);

/// Entangling layers for circuit instances of one ansatz. Without noise the
/// layers are built once and shared; with noise every call draws a fresh
/// NoiseSample.
class EntanglerFactory {
 public:
  EntanglerFactory(AnsatzHyperparams hp, NoiseConfig noise);

  const AnsatzHyperparams& hyperparams() const { return hp_; }
  const NoiseConfig& noise() const { return noise_; }
  bool noisy() const { return noise_.enabled; }

  /// `reuse` hints that the result will be applied to many states, which
  /// favours dense propagators for noisy analog layers.
  EntanglerList make(RngStream& rng, bool reuse = true, NoiseSample* sample = nullptr) const;
  EntanglerList from_sample(const NoiseSample& sample, bool reuse = true) const;
  Circuit circuit(RotationParams params, EntanglerList entanglers) const;

 private:
  AnsatzHyperparams hp_;
  NoiseConfig noise_;
  EntanglerList noiseless_;
};

struct FidelityEstimate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across noise draws
  std::size_t samples = 0;
};

/// Haar average of |<psi|U^dag V|psi>|^2 from the trace: (|tr|^2 + d) / (d (d + 1)).
double haar_average_fidelity(cplx trace, std::size_t dimension);
double haar_average_fidelity(const CMatrix& ideal, const CMatrix& noisy);

using UnitarySampler = std::function<CMatrix(RngStream&)>;

/// Mean and spread over `n_noise` draws of the noisy unitary. With
/// `n_states == 0` the Haar average of each draw is exact (closed form);
/// otherwise it is estimated from that many Haar-random states.
FidelityEstimate gate_fidelity(const CMatrix& ideal, const UnitarySampler& sampler, std::size_t n_noise,
                               std::size_t n_states, RngStream& rng);

/// Mean single-gate fidelity of CX(theta), theta ~ N(phi, sigma^2):
/// (14 + 6 exp(-8 sigma^2)) / 20, independent of phi.
double cx_mean_fidelity(double sigma);

/// sigma giving mean single-gate fidelity `target`. The fidelity does not
/// depend on phi; the argument is kept for the call signature. Throws
/// ValidationError when the target lies outside (0.7, 1].
double calibrate_digital_sigma(double phi, double target = 0.99);

/// One noisy analog layer exp(-i H t) against the noiseless one (hp.layers is ignored).
FidelityEstimate da_layer_fidelity(const DAHyperparams& hp, const AnalogNoiseModel& model, std::size_t n_noise,
                                   RngStream& rng);
/// Chain of n - 1 noisy CX(phi) against the noiseless chain.
FidelityEstimate digital_layer_fidelity(int n, double phi, const DigitalNoiseModel& model, std::size_t n_noise,
                                        RngStream& rng);

enum class SweepAxis { RbOverA, Qubits };

struct FidelitySweepConfig {
  DAHyperparams da;  // n and Rb/a are overridden by the swept axis
  double phi = kPi / 8.0;
  AnalogNoiseModel analog;
  DigitalNoiseModel digital;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double axis_value = 0.0;
  double mean_fidelity = 0.0;
  double std_fidelity = 0.0;
  std::string scheme;  // "da" | "digital"
  int n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// One DA row and one digital row per grid value. Each (value, scheme)
/// pair draws from its own substream.
std::vector<SweepRow> fidelity_sweep(SweepAxis axis, std::span<const double> values, const FidelitySweepConfig& cfg);

/// axis_value,mean_fidelity,std_fidelity,scheme,n,samples,seed
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace daql

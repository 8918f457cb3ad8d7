#include "daql/noise.hpp"

#include "daql/io.hpp"

#include <bit>
#include <cmath>
#include <iostream>
#include <ostream>
#include <string>

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "daql/kernels.hpp"
#include "parallel.hpp"

namespace daql {
namespace {

FidelityEstimate summarize(const std::vector<double>& values) {
  FidelityEstimate est;
  est.samples = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return est;
}

kernels::Mat4 cx_kernel(double phi) {
  const CMatrix g = generalized_cnot(phi);
  kernels::Mat4 out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[4 * r + c] = g(r, c);
  return out;
}

// Dense matrix of the ascending CX chain with per-gate angles.
CMatrix cx_chain_matrix(int n, std::span<const double> angles) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix m = CMatrix::Identity(d, d);
  std::vector<kernels::Mat4> gates;
  for (double a : angles) gates.push_back(cx_kernel(a));
  for (Eigen::Index c = 0; c < d; ++c) {
    std::span<cplx> col(m.col(c).data(), static_cast<std::size_t>(d));
    for (int i = 0; i + 1 < n; ++i) kernels::serial::apply_2q(col, n, i, i + 1, gates[i]);
  }
  return m;
}

}  // namespace

AnalogNoiseModel AnalogNoiseModel::plain_frequency_units() {
  AnalogNoiseModel m;
  m.detuning_std = 0.1;
  return m;
}

void AnalogNoiseModel::validate() const {
  if (!(detuning_std >= 0.0) || !(rabi_rel_std >= 0.0) || !(position_std >= 0.0)) {
    throw ValidationError("noise standard deviations must be >= 0");
  }
}

void DigitalNoiseModel::validate() const {
  if (!(sigma >= 0.0)) throw ValidationError("CX angle sigma must be >= 0");
}

RydbergParams perturb_rydberg(const RydbergParams& params, const AnalogNoiseModel& model, RngStream& rng) {
  params.validate();
  model.validate();
  RydbergParams out = params;
  out.delta = rng.normal(params.delta, model.detuning_std);
  out.omega = params.omega * rng.normal(1.0, model.rabi_rel_std);
  if (!(out.omega > 0.0)) out.omega = params.omega;
  for (int attempt = 0;; ++attempt) {
    for (std::size_t j = 0; j < params.positions.size(); ++j) {
      out.positions[j][0] = rng.normal(params.positions[j][0], model.position_std);
      out.positions[j][1] = rng.normal(params.positions[j][1], model.position_std);
    }
    try {
      out.validate();
      return out;
    } catch (const ValidationError& e) {
      if (attempt >= 100) throw;
      std::clog << "daql: redrawing perturbed positions (" << e.what() << ")\n";
    }
  }
}

HermitianOperator sample_noisy_rydberg(const RydbergParams& params, const AnalogNoiseModel& model, RngStream& rng) {
  return build_rydberg(perturb_rydberg(params, model, rng));
}

double sample_cx_angle(double phi, const DigitalNoiseModel& model, RngStream& rng) {
  model.validate();
  return rng.normal(phi, model.sigma);
}

CMatrix sample_noisy_cx(double phi, const DigitalNoiseModel& model, RngStream& rng) {
  return generalized_cnot(sample_cx_angle(phi, model, rng));
}

NoiseSample draw_noise(const AnsatzHyperparams& hp, const AnalogNoiseModel& analog, const DigitalNoiseModel& digital,
                       RngStream& rng) {
  NoiseSample s;
  s.seed = rng.seed();
  s.stream = rng.stream_id();
  const int layers = ansatz_layers(hp);
  if (const auto* da = std::get_if<DAHyperparams>(&hp)) {
    const RydbergParams base = da->rydberg();
    for (int j = 0; j < layers; ++j) {
      RngStream layer_rng = rng.substream(static_cast<std::uint64_t>(j));
      const RydbergParams p = perturb_rydberg(base, analog, layer_rng);
      s.analog.push_back({p.delta, p.omega, p.positions});
    }
  } else {
    const auto& dg = std::get<DigitalHyperparams>(hp);
    for (int j = 0; j < layers; ++j) {
      RngStream layer_rng = rng.substream(static_cast<std::uint64_t>(j));
      std::vector<double> angles(static_cast<std::size_t>(dg.n - 1));
      for (double& a : angles) a = sample_cx_angle(dg.phi, digital, layer_rng);
      s.digital.push_back(std::move(angles));
    }
  }
  return s;
}

EntanglerFactory::EntanglerFactory(AnsatzHyperparams hp, NoiseConfig noise) : hp_(std::move(hp)), noise_(noise) {
  std::visit([](const auto& h) { h.validate(); }, hp_);
  noise_.analog.validate();
  noise_.digital.validate();
  if (noise_.enabled) return;
  if (const auto* da = std::get_if<DAHyperparams>(&hp_)) {
    if (da->layers > 0) {
      auto shared = std::make_shared<AnalogEntangler>(make_propagator(build_rydberg(da->rydberg()), da->time));
      noiseless_.assign(static_cast<std::size_t>(da->layers), shared);
    }
  } else {
    const auto& dg = std::get<DigitalHyperparams>(hp_);
    if (dg.layers > 0) {
      auto shared = std::make_shared<CxChainEntangler>(dg.n, std::vector<double>(dg.n - 1, dg.phi));
      noiseless_.assign(static_cast<std::size_t>(dg.layers), shared);
    }
  }
}

EntanglerList EntanglerFactory::make(RngStream& rng, bool reuse, NoiseSample* sample) const {
  if (!noise_.enabled) return noiseless_;
  NoiseSample s = draw_noise(hp_, noise_.analog, noise_.digital, rng);
  EntanglerList out = from_sample(s, reuse);
  if (sample) *sample = std::move(s);
  return out;
}

EntanglerList EntanglerFactory::from_sample(const NoiseSample& sample, bool reuse) const {
  EntanglerList out;
  if (const auto* da = std::get_if<DAHyperparams>(&hp_)) {
    if (static_cast<int>(sample.analog.size()) != da->layers) throw ValidationError("noise sample layer count");
    RydbergParams p = da->rydberg();
    for (const AnalogDraw& d : sample.analog) {
      p.delta = d.delta;
      p.omega = d.omega;
      p.positions = d.positions;
      out.push_back(std::make_shared<AnalogEntangler>(
          make_propagator(build_rydberg(p), da->time, PropagatorKind::Auto, reuse)));
    }
  } else {
    const auto& dg = std::get<DigitalHyperparams>(hp_);
    if (static_cast<int>(sample.digital.size()) != dg.layers) throw ValidationError("noise sample layer count");
    for (const auto& angles : sample.digital) out.push_back(std::make_shared<CxChainEntangler>(dg.n, angles));
  }
  return out;
}

Circuit EntanglerFactory::circuit(RotationParams params, EntanglerList entanglers) const {
  return Circuit(ansatz_qubits(hp_), std::move(params), std::move(entanglers),
                 std::holds_alternative<DAHyperparams>(hp_));
}

double haar_average_fidelity(cplx trace, std::size_t dimension) {
  const double d = static_cast<double>(dimension);
  return (std::norm(trace) + d) / (d * (d + 1.0));
}

double haar_average_fidelity(const CMatrix& ideal, const CMatrix& noisy) {
  if (ideal.rows() != noisy.rows() || ideal.cols() != noisy.cols() || ideal.rows() != ideal.cols()) {
    throw ValidationError("fidelity: unitary dimension mismatch");
  }
  return haar_average_fidelity(ideal.cwiseProduct(noisy.conjugate()).sum(), static_cast<std::size_t>(ideal.rows()));
}

FidelityEstimate gate_fidelity(const CMatrix& ideal, const UnitarySampler& sampler, std::size_t n_noise,
                               std::size_t n_states, RngStream& rng) {
  if (n_noise < 1) throw ValidationError("gate_fidelity needs at least one noise draw");
  const Eigen::Index d = ideal.rows();
  const int n = std::countr_zero(static_cast<std::uint64_t>(d));
  std::vector<double> values(n_noise);
  detail::parallel_for(n_noise, [&](std::size_t k) {
    RngStream draw = rng.substream(k);
    const CMatrix noisy = sampler(draw);
    if (noisy.rows() != d || noisy.cols() != d) throw ValidationError("fidelity: unitary dimension mismatch");
    if (n_states == 0) {
      values[k] = haar_average_fidelity(ideal, noisy);
      return;
    }
    const CMatrix overlap = ideal.adjoint() * noisy;
    double acc = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      const QuantumState psi = haar_random_state(n, draw);
      acc += std::norm(psi.amplitudes().dot(overlap * psi.amplitudes()));
    }
    values[k] = acc / static_cast<double>(n_states);
  });
  return summarize(values);
}

double cx_mean_fidelity(double sigma) { return (14.0 + 6.0 * std::exp(-8.0 * sigma * sigma)) / 20.0; }

double calibrate_digital_sigma(double /*phi*/, double target) {
  if (!(target > 0.7 && target <= 1.0)) {
    throw ValidationError("target fidelity " + std::to_string(target) +
                          " is unattainable: single-gate fidelity lies in (0.7, 1]");
  }
  if (target == 1.0) return 0.0;
  return std::sqrt(-std::log((20.0 * target - 14.0) / 6.0) / 8.0);
}

FidelityEstimate da_layer_fidelity(const DAHyperparams& hp, const AnalogNoiseModel& model, std::size_t n_noise,
                                   RngStream& rng) {
  if (n_noise < 1) throw ValidationError("fidelity needs at least one noise draw");
  DAHyperparams h = hp;
  h.layers = 0;
  h.validate();
  const RydbergParams base = h.rydberg();
  const HermitianOperator ideal = build_rydberg(base);
  const SpectralDecomposition& sd = ideal.spectral();
  const RMatrix v = sd.eigenvectors.real();
  const Eigen::Index d = v.rows();
  // tr(U^dag U~) = sum_jk |W_jk|^2 exp(i (l_j - l~_k) t), W = V^T V~.
  CVector ideal_phase(d);
  for (Eigen::Index j = 0; j < d; ++j) ideal_phase[j] = std::exp(kI * sd.eigenvalues[j] * h.time);

  std::vector<double> values(n_noise);
  detail::parallel_for(n_noise, [&](std::size_t k) {
    RngStream draw = rng.substream(k);
    const HermitianOperator noisy = sample_noisy_rydberg(base, model, draw);
    const SpectralDecomposition& nd = noisy.spectral();
    const RMatrix w = v.transpose() * nd.eigenvectors.real();
    CVector noisy_phase(d);
    for (Eigen::Index j = 0; j < d; ++j) noisy_phase[j] = std::exp(-kI * nd.eigenvalues[j] * h.time);
    const cplx trace = ideal_phase.transpose() * (w.cwiseAbs2().cast<cplx>() * noisy_phase);
    values[k] = haar_average_fidelity(trace, static_cast<std::size_t>(d));
  });
  return summarize(values);
}

FidelityEstimate digital_layer_fidelity(int n, double phi, const DigitalNoiseModel& model, std::size_t n_noise,
                                        RngStream& rng) {
  if (n < 2) throw ValidationError("digital layer needs n >= 2");
  const std::vector<double> exact(static_cast<std::size_t>(n - 1), phi);
  const CMatrix ideal = cx_chain_matrix(n, exact);
  const UnitarySampler sampler = [&](RngStream& r) {
    std::vector<double> angles(static_cast<std::size_t>(n - 1));
    for (double& a : angles) a = sample_cx_angle(phi, model, r);
    return cx_chain_matrix(n, angles);
  };
  return gate_fidelity(ideal, sampler, n_noise, 0, rng);
}

std::vector<SweepRow> fidelity_sweep(SweepAxis axis, std::span<const double> values, const FidelitySweepConfig& cfg) {
  if (values.empty()) throw ValidationError("fidelity sweep needs a nonempty grid");
  std::vector<SweepRow> rows;
  const RngStream root(cfg.seed, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    DAHyperparams hp = cfg.da;
    if (axis == SweepAxis::RbOverA) {
      hp.rb_over_a = values[i];
    } else {
      if (values[i] != std::floor(values[i]) || values[i] < 2) throw ValidationError("qubit axis needs integers >= 2");
      hp.n = static_cast<int>(values[i]);
    }
    RngStream da_rng = root.substream(2 * i);
    RngStream dg_rng = root.substream(2 * i + 1);
    const FidelityEstimate da = da_layer_fidelity(hp, cfg.analog, cfg.samples, da_rng);
    const FidelityEstimate dg = digital_layer_fidelity(hp.n, cfg.phi, cfg.digital, cfg.samples, dg_rng);
    rows.push_back({values[i], da.mean, da.std, "da", hp.n, cfg.samples, cfg.seed});
    rows.push_back({values[i], dg.mean, dg.std, "digital", hp.n, cfg.samples, cfg.seed});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "axis_value,mean_fidelity,std_fidelity,scheme,n,samples,seed\n";
  for (const auto& r : rows) {
    out << io::format_double(r.axis_value) << ',' << io::format_double(r.mean_fidelity) << ','
        << io::format_double(r.std_fidelity) << ',' << r.scheme << ',' << r.n << ',' << r.samples << ',' << r.seed
        << '\n';
  }
}

}  // namespace daql

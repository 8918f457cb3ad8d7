#include "daql/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string_view>

#include "json.hpp"

#include "daql/kernels.hpp"
#include "parallel.hpp"

namespace daql {
namespace {

constexpr double kClamp = 1e-10;

const kernels::Mat2 kPauliY{cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0)};
const kernels::Mat2 kPauliZ{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(-1, 0)};

kernels::Mat2 mat2(const CMatrix& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }
kernels::Mat2 adjoint2(const CMatrix& m) { return mat2(m.adjoint()); }

void check_objective(const Objective& obj, const Circuit& circuit) {
  if (obj.inputs.empty()) throw ValidationError("objective has no inputs");
  if (!obj.reduce) throw ValidationError("objective has no reducer");
  const std::size_t d = std::size_t{1} << circuit.num_qubits();
  if (static_cast<std::size_t>(obj.observable.size()) != d) throw ValidationError("observable dimension mismatch");
  for (const auto& s : obj.inputs)
    if (s.dimension() != d) throw ValidationError("objective input dimension mismatch");
}

double exact_expectation(const QuantumState& psi, const RVector& obs) {
  return kernels::diagonal_expectation(psi.view(), {obs.data(), static_cast<std::size_t>(obs.size())});
}

double shot_expectation(const QuantumState& psi, const RVector& obs, std::size_t shots, std::uint64_t seed,
                        std::size_t index) {
  RngStream rng(seed, index);
  const auto outcomes = sample_bitstrings(psi, shots, rng);
  double acc = 0.0;
  for (auto o : outcomes) acc += obs[static_cast<Eigen::Index>(o)];
  return acc / static_cast<double>(shots);
}

std::vector<double> expectations(const Objective& obj, const Circuit& circuit) {
  std::vector<double> q(obj.inputs.size());
  detail::parallel_for(q.size(), [&](std::size_t i) {
    const QuantumState psi = run_circuit(circuit, obj.inputs[i]);
    q[i] = obj.shots ? shot_expectation(psi, obj.observable, obj.shots, obj.shot_seed, i)
                     : exact_expectation(psi, obj.observable);
  });
  return q;
}

// Reverse sweep for one input: accumulates weight * dq/dtheta into grad.
void backprop(const Circuit& circuit, QuantumState psi, const RVector& obs, double weight, std::vector<double>& grad) {
  const int n = circuit.num_qubits();
  const RotationParams& params = circuit.params();
  const std::size_t d = psi.dimension();
  CVector lambda = psi.amplitudes().cwiseProduct(obs.cast<cplx>()) * weight;
  CVector phi = psi.amplitudes();
  std::span<cplx> ls(lambda.data(), d);
  std::span<cplx> ps(phi.data(), d);

  const auto undo_layer = [&](int layer) {
    for (int q = 0; q < n; ++q) {
      const double a = params.angle(layer, q, 0);
      const double b = params.angle(layer, q, 1);
      const double c = params.angle(layer, q, 2);
      // d/dtheta exp(-i theta P / 2) contributes Im <lambda|P|phi>.
      grad[params.index(layer, q, 0)] += kernels::local_inner(ls, ps, n, q, kPauliZ).imag();
      const kernels::Mat2 ua = adjoint2(rz(a));
      kernels::apply_1q(ls, n, q, ua);
      kernels::apply_1q(ps, n, q, ua);
      grad[params.index(layer, q, 1)] += kernels::local_inner(ls, ps, n, q, kPauliY).imag();
      const kernels::Mat2 ub = adjoint2(ry(b));
      kernels::apply_1q(ls, n, q, ub);
      kernels::apply_1q(ps, n, q, ub);
      grad[params.index(layer, q, 2)] += kernels::local_inner(ls, ps, n, q, kPauliZ).imag();
      const kernels::Mat2 uc = adjoint2(rz(c));
      kernels::apply_1q(ls, n, q, uc);
      kernels::apply_1q(ps, n, q, uc);
    }
  };

  for (int j = circuit.num_layers(); j >= 1; --j) {
    undo_layer(j);
    circuit.entanglers()[j - 1]->apply(ls, true);
    circuit.entanglers()[j - 1]->apply(ps, true);
  }
  undo_layer(0);
}

}  // namespace

double cross_entropy_loss(std::span<const int> labels, std::span<const double> probs, bool two_term) {
  if (labels.empty()) throw ValidationError("cross-entropy of an empty batch");
  if (labels.size() != probs.size()) throw ValidationError("labels and probabilities differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    const double q = std::clamp(probs[i], kClamp, 1.0 - kClamp);
    acc += labels[i] ? std::log(q) : (two_term ? std::log(1.0 - q) : 0.0);
  }
  return -acc / static_cast<double>(labels.size());
}

double rydberg_density_loss(const QuantumState& state) {
  return exact_expectation(state, density_observable(state.num_qubits()));
}

RVector density_observable(int n) { return excitation_count_diagonal(n, 1.0 / n); }

RVector qubit_one_observable(int n, int q) {
  if (q < 0 || q >= n) throw IndexError("observable qubit out of range");
  RVector d(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = static_cast<double>((i >> qubit_bit(n, q)) & 1);
  return d;
}

Reducer cross_entropy_reducer(std::vector<int> labels, bool two_term) {
  return [labels = std::move(labels), two_term](std::span<const double> q, std::span<double> grad) {
    const double loss = cross_entropy_loss(labels, q, two_term);
    if (!grad.empty()) {
      const double m = static_cast<double>(labels.size());
      for (std::size_t i = 0; i < q.size(); ++i) {
        // The clamp is flat outside [eps, 1 - eps].
        if (q[i] < kClamp || q[i] > 1.0 - kClamp) {
          grad[i] = 0.0;
        } else if (labels[i]) {
          grad[i] = -1.0 / (m * q[i]);
        } else {
          grad[i] = two_term ? 1.0 / (m * (1.0 - q[i])) : 0.0;
        }
      }
    }
    return loss;
  };
}

Reducer mean_reducer() {
  return [](std::span<const double> q, std::span<double> grad) {
    double acc = 0.0;
    for (double v : q) acc += v;
    const double m = static_cast<double>(q.size());
    for (double& g : grad) g = 1.0 / m;
    return acc / m;
  };
}

LossValue evaluate(const Objective& objective, const Circuit& circuit) {
  check_objective(objective, circuit);
  LossValue out;
  out.expectations = expectations(objective, circuit);
  out.loss = objective.reduce(out.expectations, {});
  return out;
}

LossValue loss_and_gradient(const Objective& objective, const Circuit& circuit, std::vector<double>& grad) {
  check_objective(objective, circuit);
  if (objective.shots) {
    throw ValidationError("analytic gradients need exact expectations; use finite differences with a shared shot seed");
  }
  const std::size_t m = objective.inputs.size();
  std::vector<QuantumState> outputs(m, QuantumState(1));
  LossValue out;
  out.expectations.resize(m);
  detail::parallel_for(m, [&](std::size_t i) {
    outputs[i] = run_circuit(circuit, objective.inputs[i]);
    out.expectations[i] = exact_expectation(outputs[i], objective.observable);
  });
  std::vector<double> weights(m);
  out.loss = objective.reduce(out.expectations, weights);

  const std::size_t p = circuit.params().size();
  std::vector<std::vector<double>> partial(m, std::vector<double>(p, 0.0));
  detail::parallel_for(m, [&](std::size_t i) {
    if (weights[i] != 0.0) backprop(circuit, std::move(outputs[i]), objective.observable, weights[i], partial[i]);
  });
  grad.assign(p, 0.0);
  for (const auto& g : partial)
    for (std::size_t k = 0; k < p; ++k) grad[k] += g[k];
  return out;
}

std::vector<double> gradient(const Objective& objective, const Circuit& circuit, GradientMode mode, double fd_step) {
  check_objective(objective, circuit);
  const std::size_t p = circuit.params().size();
  std::vector<double> grad(p, 0.0);
  switch (mode) {
    case GradientMode::Analytic:
      loss_and_gradient(objective, circuit, grad);
      return grad;
    case GradientMode::ParameterShift: {
      if (objective.shots) {
        throw ValidationError("parameter shift needs exact expectations; use finite differences with a shared shot seed");
      }
      const auto q = expectations(objective, circuit);
      std::vector<double> weights(q.size());
      objective.reduce(q, weights);
      for (std::size_t k = 0; k < p; ++k) {
        RotationParams plus = circuit.params();
        RotationParams minus = circuit.params();
        plus.flat()[k] += kPi / 2;
        minus.flat()[k] -= kPi / 2;
        const auto qp = expectations(objective, circuit.with_params(std::move(plus)));
        const auto qm = expectations(objective, circuit.with_params(std::move(minus)));
        for (std::size_t i = 0; i < q.size(); ++i) grad[k] += weights[i] * 0.5 * (qp[i] - qm[i]);
      }
      return grad;
    }
    case GradientMode::FiniteDifference: {
      if (!(fd_step > 0.0)) throw ValidationError("finite-difference step must be > 0");
      for (std::size_t k = 0; k < p; ++k) {
        RotationParams plus = circuit.params();
        RotationParams minus = circuit.params();
        plus.flat()[k] += fd_step;
        minus.flat()[k] -= fd_step;
        const double lp = evaluate(objective, circuit.with_params(std::move(plus))).loss;
        const double lm = evaluate(objective, circuit.with_params(std::move(minus))).loss;
        grad[k] = (lp - lm) / (2.0 * fd_step);
      }
      return grad;
    }
  }
  return grad;
}

void adagrad_step(OptimizerState& state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw ValidationError("adagrad: parameter and gradient sizes differ");
  if (state.accumulator.empty()) state.accumulator.assign(params.size(), 0.0);
  if (state.accumulator.size() != params.size()) throw ValidationError("adagrad: accumulator size mismatch");
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericalError("adagrad: non-finite gradient component " + std::to_string(k) + " (" +
                           std::to_string(grad[k]) + ")");
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.accumulator[k] += grad[k] * grad[k];
    params[k] -= state.learning_rate * grad[k] / (std::sqrt(state.accumulator[k]) + state.epsilon);
  }
}

std::uint64_t params_hash(std::span<const double> params) {
  const std::string_view bytes(reinterpret_cast<const char*>(params.data()), params.size_bytes());
  return static_cast<std::uint64_t>(std::hash<std::string_view>{}(bytes));
}

void write_train_record(std::ostream& out, const TrainRecord& record) {
  for (const auto& e : record.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["grad_norm"] = e.grad_norm;
    j["seed"] = record.seed;
    j["param_hash"] = e.param_hash;
    out << j.dump() << '\n';
  }
}

TrainResult train(const TrainOptions& opts, RotationParams initial, const EpochBuilder& build, const RngStream& rng) {
  if (opts.epochs < 1) throw ValidationError("training needs at least one epoch");
  TrainResult result{std::move(initial), {}};
  result.record.seed = rng.seed();
  OptimizerState optimizer;
  optimizer.learning_rate = opts.learning_rate;
  std::vector<double> grad;
  const int n = result.params.num_qubits();

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    RngStream epoch_rng = rng.substream(static_cast<std::uint64_t>(epoch));
    EpochProblem problem = build(epoch, epoch_rng);
    const Circuit circuit(n, result.params, std::move(problem.entanglers), problem.analog);

    double loss = 0.0;
    if (opts.mode == GradientMode::Analytic && problem.objective.shots == 0) {
      loss = loss_and_gradient(problem.objective, circuit, grad).loss;
    } else {
      const GradientMode mode = problem.objective.shots ? GradientMode::FiniteDifference : opts.mode;
      loss = evaluate(problem.objective, circuit).loss;
      grad = gradient(problem.objective, circuit, mode);
    }

    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss;
    rec.grad_norm = std::sqrt(norm2);
    rec.param_hash = params_hash(result.params.flat());
    if (!std::isfinite(loss) || !std::isfinite(rec.grad_norm)) {
      result.record.epochs.push_back(rec);
      throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + " (loss " + std::to_string(loss) +
                                 ", |grad| " + std::to_string(rec.grad_norm) + ")",
                             result.record);
    }
    adagrad_step(optimizer, result.params.flat(), grad);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.record.epochs.push_back(rec);
  }
  return result;
}

}  // namespace daql

#include "daql/circuits.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

#include "daql/errors.hpp"
#include "daql/kernels.hpp"

namespace daql {
namespace {

kernels::Mat2 to_mat2(const CMatrix& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

kernels::Mat4 to_mat4(const CMatrix& m) {
  kernels::Mat4 g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g[4 * r + c] = m(r, c);
  return g;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_count(int n, int layers, const RotationParams& params) {
  if (params.num_qubits() != n || params.num_layers() != layers) {
    throw ValidationError("rotation parameter layout (" + std::to_string(params.num_qubits()) + " qubits, " +
                          std::to_string(params.num_layers()) + " layers) does not match the ansatz (" +
                          std::to_string(n) + ", " + std::to_string(layers) + ")");
  }
}

}  // namespace

void DAHyperparams::validate() const {
  if (n < 1) throw ValidationError("DA ansatz needs n >= 1");
  if (layers < 0) throw ValidationError("layer count must be >= 0");
  if (!(omega > 0.0)) throw ValidationError("Omega must be > 0");
  if (!(rb_over_a > 0.0)) throw ValidationError("Rb/a must be > 0");
  if (!(time >= 0.0)) throw ValidationError("quench time must be >= 0");
}

void DigitalHyperparams::validate() const {
  if (n < 2) throw ValidationError("digital ansatz needs n >= 2");
  if (layers < 0) throw ValidationError("layer count must be >= 0");
  if (!std::isfinite(phi)) throw ValidationError("phi must be finite");
}

int ansatz_qubits(const AnsatzHyperparams& hp) {
  return std::visit([](const auto& h) { return h.n; }, hp);
}

int ansatz_layers(const AnsatzHyperparams& hp) {
  return std::visit([](const auto& h) { return h.layers; }, hp);
}

std::string ansatz_name(const AnsatzHyperparams& hp) {
  return std::holds_alternative<DAHyperparams>(hp) ? "da" : "digital";
}

RotationParams::RotationParams(int n, int layers) : n_(n), layers_(layers) {
  if (n < 1 || layers < 0) throw ValidationError("rotation parameters need n >= 1 and layers >= 0");
  values_.assign(count(n, layers), 0.0);
}

RotationParams::RotationParams(int n, int layers, std::vector<double> flat) : n_(n), layers_(layers) {
  if (n < 1 || layers < 0) throw ValidationError("rotation parameters need n >= 1 and layers >= 0");
  if (flat.size() != count(n, layers)) {
    throw ValidationError("expected " + std::to_string(count(n, layers)) + " rotation parameters (3n(l+1)), got " +
                          std::to_string(flat.size()));
  }
  for (double v : flat)
    if (!std::isfinite(v)) throw ValidationError("rotation parameters must be finite");
  values_ = std::move(flat);
}

RotationParams RotationParams::random(int n, int layers, RngStream& rng) {
  RotationParams p(n, layers);
  for (double& v : p.values_) v = rng.uniform(-kPi, kPi);
  return p;
}

CMatrix rz(double theta) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::exp(-kI * (theta / 2));
  m(1, 1) = std::exp(kI * (theta / 2));
  return m;
}

CMatrix ry(double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  CMatrix m(2, 2);
  m << c, -s, s, c;
  return m;
}

CMatrix euler_rotation(double alpha, double beta, double gamma) { return rz(alpha) * ry(beta) * rz(gamma); }

CMatrix generalized_cnot(double phi) {
  CMatrix id = CMatrix::Identity(2, 2);
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const CMatrix i4 = CMatrix::Identity(4, 4);
  const CMatrix z1 = kron(z, id);
  const CMatrix x2 = kron(id, x);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  // e^{i phi A} = cos(phi) I + i sin(phi) A for A^2 = I.
  return std::exp(-kI * phi) * (c * i4 + kI * s * z1) * (c * i4 + kI * s * x2) * (c * i4 - kI * s * z1 * x2);
}

CMatrix cnot_matrix() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

AnalogEntangler::AnalogEntangler(std::shared_ptr<const Propagator> propagator) : propagator_(std::move(propagator)) {
  if (!propagator_) throw ValidationError("analog entangler needs a propagator");
}

void AnalogEntangler::apply(std::span<cplx> amps, bool adjoint) const { propagator_->apply(amps, adjoint); }

CxChainEntangler::CxChainEntangler(int n, std::vector<double> angles) : n_(n), angles_(std::move(angles)) {
  if (n < 2 || static_cast<int>(angles_.size()) != n - 1) {
    throw ValidationError("CX chain on n qubits needs n - 1 angles");
  }
}

void CxChainEntangler::apply(std::span<cplx> amps, bool adjoint) const {
  // CX(phi)^dag = CX(-phi); the adjoint chain runs in reverse order.
  if (!adjoint) {
    for (int i = 0; i < n_ - 1; ++i) kernels::apply_2q(amps, n_, i, i + 1, to_mat4(generalized_cnot(angles_[i])));
  } else {
    for (int i = n_ - 2; i >= 0; --i) kernels::apply_2q(amps, n_, i, i + 1, to_mat4(generalized_cnot(-angles_[i])));
  }
}

Circuit::Circuit(int n, RotationParams params, EntanglerList entanglers, bool analog)
    : n_(n), params_(std::move(params)), entanglers_(std::move(entanglers)), analog_(analog) {
  check_count(n_, static_cast<int>(entanglers_.size()), params_);
  for (const auto& e : entanglers_)
    if (!e) throw ValidationError("null entangler");
}

Circuit Circuit::with_params(RotationParams params) const { return Circuit(n_, std::move(params), entanglers_, analog_); }

std::vector<GateRecord> Circuit::gate_sequence() const {
  std::vector<GateRecord> out;
  const auto rotations = [&](int layer) {
    for (int q = 0; q < n_; ++q) out.push_back({GateRecord::Kind::Rotation, layer, {q}});
  };
  rotations(0);
  for (int j = 1; j <= num_layers(); ++j) {
    if (analog_) {
      std::vector<int> all(static_cast<std::size_t>(n_));
      for (int q = 0; q < n_; ++q) all[q] = q;
      out.push_back({GateRecord::Kind::Analog, j, all});
    } else {
      for (int i = 0; i + 1 < n_; ++i) out.push_back({GateRecord::Kind::Cx, j, {i, i + 1}});
    }
    rotations(j);
  }
  return out;
}

void apply_rotation_layer(std::span<cplx> amps, const RotationParams& params, int layer) {
  const int n = params.num_qubits();
  for (int q = 0; q < n; ++q) {
    kernels::apply_1q(amps, n, q,
                      to_mat2(euler_rotation(params.angle(layer, q, 0), params.angle(layer, q, 1),
                                             params.angle(layer, q, 2))));
  }
}

void Circuit::run_inplace(QuantumState& state) const {
  if (state.num_qubits() != n_) {
    throw ValidationError("circuit on " + std::to_string(n_) + " qubits applied to a " +
                          std::to_string(state.num_qubits()) + "-qubit state");
  }
  auto amps = state.mutable_view();
  apply_rotation_layer(amps, params_, 0);
  for (int j = 1; j <= num_layers(); ++j) {
    entanglers_[j - 1]->apply(amps);
    apply_rotation_layer(amps, params_, j);
  }
}

QuantumState run_circuit(const Circuit& circuit, const QuantumState& input) {
  QuantumState out = input;
  circuit.run_inplace(out);
  return out;
}

Circuit build_da_circuit(const DAHyperparams& hp, RotationParams params, const HermitianOperator& h,
                         PropagatorKind kind) {
  hp.validate();
  check_count(hp.n, hp.layers, params);
  if (h.dimension() != (std::size_t{1} << hp.n)) throw ValidationError("Hamiltonian dimension does not match n");
  EntanglerList ents;
  if (hp.layers > 0) {
    auto shared = std::make_shared<AnalogEntangler>(make_propagator(h, hp.time, kind, true));
    ents.assign(static_cast<std::size_t>(hp.layers), shared);
  }
  return Circuit(hp.n, std::move(params), std::move(ents), true);
}

Circuit build_da_circuit(const DAHyperparams& hp, RotationParams params, std::span<const HermitianOperator> layers,
                         PropagatorKind kind) {
  hp.validate();
  check_count(hp.n, hp.layers, params);
  if (static_cast<int>(layers.size()) != hp.layers) throw ValidationError("need one Hamiltonian per layer");
  EntanglerList ents;
  for (const auto& h : layers) {
    if (h.dimension() != (std::size_t{1} << hp.n)) throw ValidationError("Hamiltonian dimension does not match n");
    ents.push_back(std::make_shared<AnalogEntangler>(make_propagator(h, hp.time, kind, false)));
  }
  return Circuit(hp.n, std::move(params), std::move(ents), true);
}

Circuit build_digital_circuit(const DigitalHyperparams& hp, RotationParams params) {
  hp.validate();
  std::vector<std::vector<double>> angles(static_cast<std::size_t>(hp.layers),
                                          std::vector<double>(static_cast<std::size_t>(hp.n - 1), hp.phi));
  return build_digital_circuit(hp, std::move(params), angles);
}

Circuit build_digital_circuit(const DigitalHyperparams& hp, RotationParams params,
                              const std::vector<std::vector<double>>& angles) {
  hp.validate();
  check_count(hp.n, hp.layers, params);
  if (static_cast<int>(angles.size()) != hp.layers) throw ValidationError("need one angle list per layer");
  EntanglerList ents;
  for (const auto& a : angles) ents.push_back(std::make_shared<CxChainEntangler>(hp.n, a));
  return Circuit(hp.n, std::move(params), std::move(ents), false);
}

std::string params_to_json(const AnsatzHyperparams& hp, const RotationParams& params, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["n"] = ansatz_qubits(hp);
  j["layers"] = ansatz_layers(hp);
  j["ansatz"] = ansatz_name(hp);
  if (const auto* da = std::get_if<DAHyperparams>(&hp)) {
    j["hyperparams"] = {{"omega", da->omega},
                        {"delta_over_omega", da->delta_over_omega},
                        {"rb_over_a", da->rb_over_a},
                        {"time", da->time}};
  } else {
    j["hyperparams"] = {{"phi", std::get<DigitalHyperparams>(hp).phi}};
  }
  j["params"] = std::vector<double>(params.flat().begin(), params.flat().end());
  j["seed"] = seed;
  j["euler_convention"] = "ZYZ";
  j["cx_order"] = "ascending";
  j["bit_order"] = "qubit0_msb";
  return j.dump(2);
}

LoadedParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("parameter JSON: ") + e.what());
  }
  try {
    const int n = j.at("n").get<int>();
    const int layers = j.at("layers").get<int>();
    const std::string kind = j.at("ansatz").get<std::string>();
    const auto& h = j.at("hyperparams");
    LoadedParams out;
    if (kind == "da") {
      DAHyperparams da;
      da.n = n;
      da.layers = layers;
      da.omega = h.at("omega").get<double>();
      da.delta_over_omega = h.at("delta_over_omega").get<double>();
      da.rb_over_a = h.at("rb_over_a").get<double>();
      da.time = h.at("time").get<double>();
      out.hyperparams = da;
    } else if (kind == "digital") {
      out.hyperparams = DigitalHyperparams{n, layers, h.at("phi").get<double>()};
    } else {
      throw FormatError("unknown ansatz '" + kind + "'");
    }
    out.params = RotationParams(n, layers, j.at("params").get<std::vector<double>>());
    out.seed = j.at("seed").get<std::uint64_t>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("parameter JSON: ") + e.what());
  }
}

}  // namespace daql

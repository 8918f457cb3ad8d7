#include "daql/phase.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "daql/errors.hpp"
#include "daql/hamiltonians.hpp"
#include "daql/io.hpp"
#include "daql/kernels.hpp"
#include "parallel.hpp"

namespace daql::phase {
namespace {

constexpr char kMeshMagic[8] = {'D', 'A', 'Q', 'L', 'G', 'S', '0', '1'};

std::size_t site_bit(int n, int site) { return std::size_t{1} << qubit_bit(n, ((site % n) + n) % n); }

// s_i . s_j = 2 SWAP_ij - I.
CVector dot_spins(const CVector& psi, int n, int i, int j) {
  const std::size_t bi = site_bit(n, i);
  const std::size_t bj = site_bit(n, j);
  CVector out(psi.size());
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const bool differ = ((idx & bi) != 0) != ((idx & bj) != 0);
    const std::size_t swapped = differ ? idx ^ bi ^ bj : idx;
    out[k] = 2.0 * psi[static_cast<Eigen::Index>(swapped)] - psi[k];
  }
  return out;
}

CVector dimer(const CVector& psi, int n, int j) { return dot_spins(psi, n, j + 1, j) - dot_spins(psi, n, j, j - 1); }

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

void set_layers(AnsatzHyperparams& hp, int layers) {
  std::visit([layers](auto& h) { h.layers = layers; }, hp);
}

}  // namespace

std::string model_name(Model m) { return m == Model::Rydberg ? "rydberg" : "xxz"; }

Model parse_model(const std::string& name) {
  if (name == "rydberg") return Model::Rydberg;
  if (name == "xxz") return Model::Xxz;
  throw ValidationError("unknown model '" + name + "' (expected rydberg or xxz)");
}

double Axis::value(int i) const {
  if (i < 0 || i >= count) throw IndexError("axis index out of range");
  if (count == 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

int Axis::nearest(double v) const {
  if (count == 1) return 0;
  const double pos = (v - min) / (max - min) * (count - 1);
  return std::clamp(static_cast<int>(std::lround(pos)), 0, count - 1);
}

void MeshSpec::validate() const {
  for (const Axis* a : {&x, &y}) {
    if (a->count < 1) throw ValidationError("axis '" + a->name + "' needs at least one node");
    if (a->count > 1 && !(a->max > a->min)) throw ValidationError("axis '" + a->name + "' needs max > min");
  }
  if (model == Model::Xxz) {
    XXZParams{n, x.min, 1.0, y.min}.validate();
    XXZParams{n, x.max, 1.0, y.max}.validate();
  } else {
    if (n < 1 || n > 20) throw ValidationError("Rydberg mesh needs 1 <= n <= 20");
    if (!(y.min > 0.0)) throw ValidationError("Rb/a axis must be positive");
    if (!(omega > 0.0)) throw ValidationError("Omega must be > 0");
  }
  if (!(tolerance > 0.0)) throw ValidationError("solver tolerance must be > 0");
}

std::string MeshSpec::canonical() const {
  nlohmann::ordered_json j;
  j["model"] = model_name(model);
  j["n"] = n;
  for (const Axis* a : {&x, &y}) {
    j[a == &x ? "x" : "y"] = {{"name", a->name}, {"min", a->min}, {"max", a->max}, {"count", a->count}};
  }
  j["omega"] = omega;
  j["tolerance"] = tolerance;
  j["boundary"] = model == Model::Xxz ? "periodic" : "open";
  j["bit_order"] = "qubit0_msb";
  return j.dump();
}

MeshSpec xxz_mesh(int n, int nx, int ny) {
  MeshSpec s;
  s.model = Model::Xxz;
  s.n = n;
  s.x = {"J3/J6", 0.01, 2.0, nx};
  s.y = {"alpha", 0.0, 1.0, ny};
  return s;
}

MeshSpec rydberg_mesh(int n, int nx, int ny) {
  MeshSpec s;
  s.model = Model::Rydberg;
  s.n = n;
  s.x = {"Delta/Omega", 0.0, 4.0, nx};
  s.y = {"Rb/a", 1.0, 3.0, ny};
  return s;
}

HermitianOperator node_hamiltonian(const MeshSpec& spec, double x, double y) {
  if (spec.model == Model::Xxz) return build_xxz(XXZParams{spec.n, x, 1.0, y});
  return build_rydberg(rydberg_params(spec.n, x, y, spec.omega));
}

PhaseMesh build_mesh(const MeshSpec& spec, const std::filesystem::path& cache_file) {
  spec.validate();
  if (!cache_file.empty() && std::filesystem::exists(cache_file)) {
    try {
      PhaseMesh cached = deserialize_mesh(io::read_file(cache_file));
      if (cached.spec.canonical() == spec.canonical()) {
        cached.spec = spec;
        return cached;
      }
      std::clog << "daql: ground-state cache " << cache_file << " does not match the mesh; rebuilding\n";
    } catch (const FormatError& e) {
      std::clog << "daql: ignoring unreadable ground-state cache " << cache_file << ": " << e.what() << '\n';
    }
  }
  PhaseMesh mesh;
  mesh.spec = spec;
  const std::size_t nodes = spec.num_nodes();
  mesh.energy.assign(nodes, 0.0);
  mesh.states.assign(nodes, QuantumState(spec.n));
  GroundStateOptions opts;
  opts.relative_tolerance = spec.tolerance;
  detail::parallel_for(nodes, [&](std::size_t k) {
    const int ix = static_cast<int>(k % static_cast<std::size_t>(spec.x.count));
    const int iy = static_cast<int>(k / static_cast<std::size_t>(spec.x.count));
    try {
      GroundState gs = ground_state(node_hamiltonian(spec, spec.x.value(ix), spec.y.value(iy)), opts);
      mesh.energy[k] = gs.energy;
      mesh.states[k] = std::move(gs.state);
    } catch (const NumericalError& e) {
      mesh.energy[k] = std::numeric_limits<double>::quiet_NaN();
      std::clog << "daql: node (" << ix << ", " << iy << ") failed: " << e.what() << '\n';
    }
  });
  mesh.eigensolves = nodes;
  if (!cache_file.empty()) io::write_file(cache_file, serialize_mesh(mesh));
  return mesh;
}

std::string serialize_mesh(const PhaseMesh& mesh) {
  const MeshSpec& s = mesh.spec;
  std::string out(kMeshMagic, sizeof kMeshMagic);
  io::append_le<std::uint32_t>(out, s.model == Model::Rydberg ? 0u : 1u);
  io::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.n));
  for (const Axis* a : {&s.x, &s.y}) {
    io::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(a->name.size()));
    out += a->name;
    io::append_le(out, a->min);
    io::append_le(out, a->max);
    io::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(a->count));
  }
  io::append_le(out, s.tolerance);
  io::append_le(out, s.omega);
  for (std::size_t k = 0; k < mesh.energy.size(); ++k) {
    io::append_le(out, mesh.energy[k]);
    for (std::size_t i = 0; i < mesh.states[k].dimension(); ++i) {
      io::append_le(out, mesh.states[k][i].real());
      io::append_le(out, mesh.states[k][i].imag());
    }
  }
  return out;
}

PhaseMesh deserialize_mesh(std::string_view bytes) {
  if (bytes.size() < sizeof kMeshMagic || std::memcmp(bytes.data(), kMeshMagic, sizeof kMeshMagic) != 0) {
    throw FormatError("not a ground-state cache (bad magic)");
  }
  io::ByteReader in(bytes, sizeof kMeshMagic);
  PhaseMesh mesh;
  MeshSpec& s = mesh.spec;
  const auto model = in.get<std::uint32_t>();
  if (model > 1) throw FormatError("ground-state cache: unknown model id " + std::to_string(model));
  s.model = model == 0 ? Model::Rydberg : Model::Xxz;
  s.n = static_cast<int>(in.get<std::uint32_t>());
  if (s.n < 1 || s.n > 20) throw FormatError("ground-state cache: bad qubit count");
  for (Axis* a : {&s.x, &s.y}) {
    const auto len = in.get<std::uint32_t>();
    if (len > 256) throw FormatError("ground-state cache: bad axis name");
    a->name.clear();
    for (std::uint32_t i = 0; i < len; ++i) a->name.push_back(in.get<char>());
    a->min = in.get<double>();
    a->max = in.get<double>();
    a->count = static_cast<int>(in.get<std::uint32_t>());
  }
  s.tolerance = in.get<double>();
  s.omega = in.get<double>();
  const std::size_t nodes = s.num_nodes();
  const std::size_t dim = std::size_t{1} << s.n;
  if (in.remaining() != nodes * (8 + 16 * dim)) {
    throw FormatError("ground-state cache: payload length mismatch (expected " + std::to_string(nodes * (8 + 16 * dim)) +
                      " bytes, got " + std::to_string(in.remaining()) + ")");
  }
  for (std::size_t k = 0; k < nodes; ++k) {
    const double e = in.get<double>();
    CVector amps(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      const double re = in.get<double>();
      const double im = in.get<double>();
      amps[static_cast<Eigen::Index>(i)] = cplx(re, im);
    }
    mesh.energy.push_back(e);
    mesh.states.push_back(e == e ? QuantumState::from_amplitudes(s.n, std::move(amps)) : QuantumState(s.n));
  }
  return mesh;
}

std::vector<cplx> correlators(const QuantumState& state, CorrelatorKind kind) {
  const int n = state.num_qubits();
  if (n < 5) throw ValidationError("correlators need a periodic chain of n >= 5");
  const int c = kCentralSite;
  const CVector& psi = state.amplitudes();
  std::vector<cplx> out;
  if (kind == CorrelatorKind::Vbs) {
    const CVector ref = dimer(psi, n, c);
    for (int r = 1; r <= n; ++r) out.push_back(ref.dot(dimer(psi, n, c + r)));
    return out;
  }
  const std::size_t bc = site_bit(n, c);
  for (int r = 1; r <= n; ++r) {
    const std::size_t br = site_bit(n, c + r);
    cplx acc = 0.0;
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
      const auto idx = static_cast<std::size_t>(k);
      if (kind == CorrelatorKind::Z) {
        const double zc = (idx & bc) ? -1.0 : 1.0;
        const double zr = (idx & br) ? -1.0 : 1.0;
        acc += std::norm(psi[k]) * zc * zr;
      } else {
        acc += std::conj(psi[k]) * psi[static_cast<Eigen::Index>(idx ^ bc ^ br)];
      }
    }
    out.push_back(acc);
  }
  return out;
}

OrderParameters order_parameters(const QuantumState& state) {
  const auto cz = correlators(state, CorrelatorKind::Z);
  const auto cx = correlators(state, CorrelatorKind::X);
  const auto cv = correlators(state, CorrelatorKind::Vbs);
  std::array<cplx, 4> o{};
  for (std::size_t i = 0; i < cz.size(); ++i) {
    const int r = static_cast<int>(i) + 1;
    const double sign = (r % 2) ? -1.0 : 1.0;
    o[0] += sign * cz[i];
    o[1] += std::polar(1.0, kPi * r / 2.0) * cz[i];
    o[2] += sign * cx[i];
    o[3] += sign * cv[i];
  }
  OrderParameters p;
  for (int k = 0; k < 4; ++k) {
    p.value[k] = o[k].real();
    p.imag_residue[k] = std::abs(o[k].imag());
  }
  return p;
}

std::vector<OrderParameters> order_parameter_map(const PhaseMesh& mesh) {
  std::vector<OrderParameters> out(mesh.states.size());
  detail::parallel_for(out.size(), [&](std::size_t k) {
    if (mesh.ok(k)) {
      out[k] = order_parameters(mesh.states[k]);
    } else {
      out[k].value.fill(std::numeric_limits<double>::quiet_NaN());
    }
  });
  return out;
}

std::vector<bool> top_fraction_mask(std::span<const double> values, double percent) {
  if (values.empty()) return {};
  if (!(percent > 0.0 && percent <= 100.0)) throw ValidationError("contour percent must be in (0, 100]");
  std::vector<double> mags;
  for (double v : values)
    if (v == v) mags.push_back(std::abs(v));
  std::vector<bool> mask(values.size(), false);
  if (mags.empty()) return mask;
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(mags.size()) - 1e-9)));
  const double threshold = mags[std::min(keep, mags.size()) - 1];
  for (std::size_t i = 0; i < values.size(); ++i) mask[i] = values[i] == values[i] && std::abs(values[i]) >= threshold;
  return mask;
}

std::vector<double> entropy_map(const PhaseMesh& mesh) {
  const int n = mesh.spec.n;
  if (n < 2) throw ValidationError("entropy map needs n >= 2");
  std::vector<int> half(static_cast<std::size_t>(n / 2));
  std::iota(half.begin(), half.end(), 0);
  std::vector<double> out(mesh.states.size());
  detail::parallel_for(out.size(), [&](std::size_t k) {
    out[k] = mesh.ok(k) ? entanglement_entropy(mesh.states[k], half) : std::numeric_limits<double>::quiet_NaN();
  });
  return out;
}

void DetectorConfig::validate() const {
  std::visit([](const auto& h) { h.validate(); }, ansatz);
  if (runs < 1) throw ValidationError("runs must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

std::string DetectorConfig::canonical() const {
  nlohmann::ordered_json j;
  j["ansatz"] = nlohmann::json::parse(params_to_json(ansatz, RotationParams(ansatz_qubits(ansatz), 0), 0))
                    .at("hyperparams");
  j["ansatz_name"] = ansatz_name(ansatz);
  j["n"] = ansatz_qubits(ansatz);
  j["layers"] = ansatz_layers(ansatz);
  j["noise"] = {{"enabled", noise.enabled},
                {"detuning_std", noise.analog.detuning_std},
                {"rabi_rel_std", noise.analog.rabi_rel_std},
                {"position_std", noise.analog.position_std},
                {"cx_sigma", noise.digital.sigma}};
  j["runs"] = runs;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["train_point"] = {train_x, train_y};
  j["seed"] = seed;
  j["euler_convention"] = "ZYZ";
  j["cx_order"] = "ascending";
  return j.dump();
}

LearnedPhaseDiagram train_anomaly_detector(const PhaseMesh& mesh, const DetectorConfig& cfg) {
  cfg.validate();
  const int n = mesh.spec.n;
  if (ansatz_qubits(cfg.ansatz) != n) throw ValidationError("ansatz size does not match the mesh");
  const EntanglerFactory factory(cfg.ansatz, cfg.noise);
  const bool analog = std::holds_alternative<DAHyperparams>(cfg.ansatz);
  const RVector observable = density_observable(n);

  LearnedPhaseDiagram out;
  out.spec = mesh.spec;
  out.runs = cfg.runs;
  out.train_node = mesh.nearest_node(cfg.train_x, cfg.train_y);
  if (!mesh.ok(out.train_node)) throw NumericalError("training node has no ground state");
  const std::size_t nodes = mesh.states.size();
  std::vector<double> sum(nodes, 0.0);
  const RngStream root(cfg.seed, 0);

  for (int r = 0; r < cfg.runs; ++r) {
    const RngStream run = root.substream(static_cast<std::uint64_t>(r));
    RngStream init = run.substream(0);
    RotationParams params = RotationParams::random(n, ansatz_layers(cfg.ansatz), init);
    const EpochBuilder build = [&](int, RngStream& rng) {
      EpochProblem p;
      p.objective.inputs = {mesh.states[out.train_node]};
      p.objective.observable = observable;
      p.objective.reduce = mean_reducer();
      RngStream noise = rng.substream(1);
      p.entanglers = factory.make(noise, false);
      p.analog = analog;
      return p;
    };
    TrainOptions opts;
    opts.epochs = cfg.epochs;
    opts.learning_rate = cfg.learning_rate;
    TrainResult tr = train(opts, std::move(params), build, run.substream(1));

    const RngStream eval = run.substream(2);
    std::vector<double> loss(nodes);
    detail::parallel_for(nodes, [&](std::size_t k) {
      if (!mesh.ok(k)) {
        loss[k] = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      RngStream noise = eval.substream(k);
      const Circuit circuit = factory.circuit(tr.params, factory.make(noise, false));
      const QuantumState outp = run_circuit(circuit, mesh.states[k]);
      loss[k] = kernels::diagonal_expectation(outp.view(), {observable.data(), static_cast<std::size_t>(observable.size())});
    });
    for (std::size_t k = 0; k < nodes; ++k) sum[k] += loss[k];
    out.train_node_loss.push_back(loss[out.train_node]);
    out.records.push_back(std::move(tr.record));
  }
  out.loss.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) out.loss[k] = sum[k] / cfg.runs;
  out.warning = *std::min_element(out.train_node_loss.begin(), out.train_node_loss.end()) >= 0.2;
  if (out.warning) std::clog << "daql: no run reached a training-node loss below 0.2\n";
  return out;
}

std::vector<double> gradient_norm_squared(std::span<const double> values, const Axis& x, const Axis& y) {
  if (x.count < 3 || y.count < 3) throw ValidationError("sharpness needs a mesh of at least 3 x 3");
  if (values.size() != static_cast<std::size_t>(x.count) * y.count) throw ValidationError("sharpness: value count");
  const auto at = [&](int ix, int iy) { return values[static_cast<std::size_t>(iy) * x.count + ix]; };
  const auto diff = [](double lo, double hi, double span) { return (hi - lo) / span; };
  std::vector<double> g2;
  g2.reserve(values.size());
  for (int iy = 0; iy < y.count; ++iy) {
    for (int ix = 0; ix < x.count; ++ix) {
      const int x0 = std::max(ix - 1, 0), x1 = std::min(ix + 1, x.count - 1);
      const int y0 = std::max(iy - 1, 0), y1 = std::min(iy + 1, y.count - 1);
      const double gx = diff(at(x0, iy), at(x1, iy), (x1 - x0) * x.step());
      const double gy = diff(at(ix, y0), at(ix, y1), (y1 - y0) * y.step());
      g2.push_back(gx * gx + gy * gy);
    }
  }
  return g2;
}

double sharpness(std::span<const double> values, const Axis& x, const Axis& y) {
  std::vector<double> g2 = gradient_norm_squared(values, x, y);
  std::erase_if(g2, [](double v) { return v != v; });
  if (g2.size() < 2) throw ValidationError("sharpness: too few finite gradients");
  return mean_std(g2).second;
}

double sharpness(const LearnedPhaseDiagram& diagram) { return sharpness(diagram.loss, diagram.spec.x, diagram.spec.y); }

std::vector<SharpnessRow> sharpness_vs_depth(const PhaseMesh& mesh, std::span<const int> layers,
                                             std::span<const SharpnessScheme> schemes, const DetectorConfig& base,
                                             int repeats) {
  if (layers.empty() || schemes.empty()) throw ValidationError("sharpness sweep needs layers and schemes");
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  const RngStream root(base.seed, 0x5348);
  std::vector<SharpnessRow> rows;
  for (int l : layers) {
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      std::vector<double> values;
      for (int rep = 0; rep < repeats; ++rep) {
        DetectorConfig cfg = base;
        cfg.ansatz = schemes[s].ansatz;
        set_layers(cfg.ansatz, l);
        cfg.seed = root.substream(static_cast<std::uint64_t>(l)).substream(s).substream(rep).engine()();
        values.push_back(sharpness(train_anomaly_detector(mesh, cfg)));
      }
      const auto [mean, sd] = mean_std(values);
      rows.push_back({l, schemes[s].name, mean, sd, repeats, base.runs});
    }
  }
  return rows;
}

std::string grid_csv(const MeshSpec& spec, std::span<const double> values) {
  if (values.size() != spec.num_nodes()) throw ValidationError("grid_csv: value count does not match the mesh");
  std::string out = "x,y,value\n";
  for (int iy = 0; iy < spec.y.count; ++iy) {
    for (int ix = 0; ix < spec.x.count; ++ix) {
      out += io::format_double(spec.x.value(ix)) + ',' + io::format_double(spec.y.value(iy)) + ',' +
             io::format_double(values[static_cast<std::size_t>(iy) * spec.x.count + ix]) + '\n';
    }
  }
  return out;
}

}  // namespace daql::phase

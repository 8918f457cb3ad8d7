#include "daql/mnist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "parallel.hpp"

namespace daql::mnist {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr char kPcaMagic[8] = {'D', 'A', 'Q', 'L', 'P', 'C', 'A', '1'};

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  return v;
}

void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::string hex32(std::uint32_t v) {
  std::ostringstream ss;
  ss << "0x" << std::hex;
  ss.width(8);
  ss.fill('0');
  ss << v;
  return ss.str();
}

void check_header(std::string_view bytes, std::size_t header, std::uint32_t magic, const char* what) {
  if (bytes.size() < 4) throw FormatError(std::string(what) + ": file shorter than the IDX magic");
  const std::uint32_t got = read_be32(bytes, 0);
  if (got != magic) {
    throw FormatError(std::string(what) + ": bad IDX magic " + hex32(got) + " (expected " + hex32(magic) + ")");
  }
  if (bytes.size() < header) {
    throw FormatError(std::string(what) + ": truncated header (expected " + std::to_string(header) +
                      " bytes, got " + std::to_string(bytes.size()) + ")");
  }
}

void check_payload(std::string_view bytes, std::size_t expected, const char* what) {
  if (bytes.size() != expected) {
    throw FormatError(std::string(what) + ": payload length mismatch (expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()) + ")");
  }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

nlohmann::ordered_json ansatz_json(const AnsatzHyperparams& hp) {
  nlohmann::ordered_json j;
  j["ansatz"] = ansatz_name(hp);
  j["n"] = ansatz_qubits(hp);
  j["layers"] = ansatz_layers(hp);
  if (const auto* da = std::get_if<DAHyperparams>(&hp)) {
    j["omega"] = da->omega;
    j["delta_over_omega"] = da->delta_over_omega;
    j["rb_over_a"] = da->rb_over_a;
    j["time"] = da->time;
  } else {
    j["phi"] = std::get<DigitalHyperparams>(hp).phi;
  }
  return j;
}

}  // namespace

IdxImages parse_idx_images(std::string_view bytes) {
  check_header(bytes, 16, kImageMagic, "IDX images");
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t expected = 16 + static_cast<std::size_t>(img.count) * img.rows * img.cols;
  check_payload(bytes, expected, "IDX images");
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::string_view bytes) {
  check_header(bytes, 8, kLabelMagic, "IDX labels");
  const std::uint32_t count = read_be32(bytes, 4);
  check_payload(bytes, 8 + static_cast<std::size_t>(count), "IDX labels");
  return {bytes.begin() + 8, bytes.end()};
}

std::string serialize_idx_images(const IdxImages& images) {
  std::string out;
  put_be32(out, kImageMagic);
  put_be32(out, images.count);
  put_be32(out, images.rows);
  put_be32(out, images.cols);
  out.append(images.pixels.begin(), images.pixels.end());
  return out;
}

std::string serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::string out;
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.append(labels.begin(), labels.end());
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  for (const auto& p : {images, labels}) {
    if (!std::filesystem::exists(p)) throw std::runtime_error("MNIST file not found: " + p.string());
  }
  IdxImages img = parse_idx_images(io::read_file(images));
  std::vector<std::uint8_t> lab = parse_idx_labels(io::read_file(labels));
  if (img.count != lab.size()) {
    throw FormatError("image count " + std::to_string(img.count) + " differs from label count " +
                      std::to_string(lab.size()));
  }
  for (auto l : lab)
    if (l > 9) throw FormatError("label " + std::to_string(l) + " is not a digit");
  Dataset d;
  d.rows = static_cast<int>(img.rows);
  d.cols = static_cast<int>(img.cols);
  d.pixels = std::move(img.pixels);
  d.labels = std::move(lab);
  return d;
}

RVector PCAModel::project(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != mean.size()) throw ValidationError("PCA input has the wrong length");
  const Eigen::Map<const RVector> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return components * (v - mean);
}

RVector PCAModel::reconstruct(const RVector& projection) const {
  return mean + components.transpose() * projection;
}

PCAModel fit_pca(const RMatrix& data, int n_components) {
  if (n_components < 1 || n_components > data.cols()) {
    throw ValidationError("PCA needs 1 <= components <= features (" + std::to_string(data.cols()) + ")");
  }
  if (data.rows() < n_components) {
    throw ValidationError("PCA needs at least " + std::to_string(n_components) + " samples");
  }
  PCAModel pca;
  pca.mean = data.colwise().mean().transpose();
  const RMatrix centered = data.rowwise() - pca.mean.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(data.rows() - 1));
  const RMatrix cov = (centered.transpose() * centered) / denom;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigensolver failed");

  const Eigen::Index f = data.cols();
  pca.components.resize(n_components, f);
  pca.explained_variance.resize(n_components);
  for (int k = 0; k < n_components; ++k) {
    RVector c = es.eigenvectors().col(f - 1 - k);
    // Deterministic sign: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    c.cwiseAbs().maxCoeff(&arg);
    if (c[arg] < 0) c = -c;
    pca.components.row(k) = c.transpose();
    pca.explained_variance[k] = std::max(0.0, es.eigenvalues()[f - 1 - k]);
  }
  const RMatrix proj = centered * pca.components.transpose();
  pca.proj_min = proj.colwise().minCoeff().transpose();
  pca.proj_max = proj.colwise().maxCoeff().transpose();
  return pca;
}

double reconstruction_error(const PCAModel& pca, const RMatrix& data) {
  const RMatrix centered = data.rowwise() - pca.mean.transpose();
  const RMatrix recon = centered * pca.components.transpose() * pca.components;
  return (centered - recon).squaredNorm() / static_cast<double>(data.size());
}

std::string serialize_pca(const PCAModel& pca) {
  std::string out(kPcaMagic, sizeof kPcaMagic);
  const auto f = static_cast<std::uint64_t>(pca.mean.size());
  const auto k = static_cast<std::uint64_t>(pca.components.rows());
  io::append_le(out, f);
  io::append_le(out, k);
  for (Eigen::Index i = 0; i < pca.mean.size(); ++i) io::append_le(out, pca.mean[i]);
  for (Eigen::Index r = 0; r < pca.components.rows(); ++r)
    for (Eigen::Index c = 0; c < pca.components.cols(); ++c) io::append_le(out, pca.components(r, c));
  for (const RVector* v : {&pca.explained_variance, &pca.proj_min, &pca.proj_max})
    for (Eigen::Index i = 0; i < v->size(); ++i) io::append_le(out, (*v)[i]);
  return out;
}

PCAModel deserialize_pca(std::string_view bytes) {
  if (bytes.size() < sizeof kPcaMagic || std::memcmp(bytes.data(), kPcaMagic, sizeof kPcaMagic) != 0) {
    throw FormatError("not a PCA blob (bad magic)");
  }
  io::ByteReader in(bytes, sizeof kPcaMagic);
  const auto f = in.get<std::uint64_t>();
  const auto k = in.get<std::uint64_t>();
  const std::size_t expected = in.offset() + 8 * (f + k * f + 3 * k);
  if (f == 0 || k > f || bytes.size() != expected) {
    throw FormatError("PCA blob length mismatch (expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(bytes.size()) + ")");
  }
  PCAModel pca;
  pca.mean.resize(static_cast<Eigen::Index>(f));
  for (Eigen::Index i = 0; i < pca.mean.size(); ++i) pca.mean[i] = in.get<double>();
  pca.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
  for (Eigen::Index r = 0; r < pca.components.rows(); ++r)
    for (Eigen::Index c = 0; c < pca.components.cols(); ++c) pca.components(r, c) = in.get<double>();
  for (RVector* v : {&pca.explained_variance, &pca.proj_min, &pca.proj_max}) {
    v->resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = in.get<double>();
  }
  return pca;
}

EncodedSample encode(std::span<const double> image, const PCAModel& pca, int label) {
  const int k = pca.num_components();
  if (k % 2 != 0) throw ValidationError("encoding needs an even number of PCA components");
  const int n = k / 2;
  const RVector z = pca.project(image);
  const auto unit = [&](int c) {
    const double span = pca.proj_max[c] - pca.proj_min[c];
    if (!(span > 1e-12)) return 0.0;  // degenerate component
    return std::clamp((z[c] - pca.proj_min[c]) / span, 0.0, 1.0);
  };
  EncodedSample s;
  s.label = label;
  s.theta.resize(static_cast<std::size_t>(n));
  s.phi.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    s.theta[j] = kPi * unit(j);
    s.phi[j] = std::fmod(kTwoPi * unit(n + j), kTwoPi);
  }
  return s;
}

QuantumState encoded_state(const EncodedSample& sample) {
  if (sample.theta.size() != sample.phi.size() || sample.theta.empty()) {
    throw ValidationError("encoded sample needs matching nonempty theta and phi");
  }
  std::vector<std::array<cplx, 2>> qubits(sample.theta.size());
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    qubits[j] = {std::cos(sample.theta[j] / 2), std::exp(kI * sample.phi[j]) * std::sin(sample.theta[j] / 2)};
  }
  return QuantumState::product(qubits);
}

Classification classify(const QuantumState& output) {
  const double q = probability_one(output, 0);
  return {q, q >= 0.5};
}

Classification classify_shots(const QuantumState& output, std::size_t shots, RngStream& rng) {
  const auto outcomes = sample_bitstrings(output, shots, rng);
  const std::uint64_t mask = std::uint64_t{1} << qubit_bit(output.num_qubits(), 0);
  std::size_t ones = 0;
  for (auto o : outcomes) ones += (o & mask) ? 1 : 0;
  const double q = static_cast<double>(ones) / static_cast<double>(shots);
  return {q, q >= 0.5};
}

PairSplit select_pair(const Dataset& data, int digit_a, int digit_b, std::size_t limit) {
  if (digit_a == digit_b) throw ValidationError("digit pair must be distinct");
  if (digit_a < 0 || digit_a > 9 || digit_b < 0 || digit_b > 9) throw ValidationError("digits must be in 0..9");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == digit_a || data.labels[i] == digit_b) idx.push_back(i);
  }
  if (limit && idx.size() > limit) idx.resize(limit);
  PairSplit out;
  out.images.resize(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(data.pixels_per_image()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto img = data.image(idx[r]);
    for (std::size_t c = 0; c < img.size(); ++c) out.images(r, c) = img[c] / 255.0;
    out.labels.push_back(data.labels[idx[r]] == digit_b ? 1 : 0);
  }
  const auto ones = std::count(out.labels.begin(), out.labels.end(), 1);
  if (ones == 0 || ones == static_cast<long>(out.labels.size())) {
    throw ValidationError("digit pair " + std::to_string(digit_a) + "/" + std::to_string(digit_b) +
                          " has an empty class");
  }
  return out;
}

PairData prepare_pair(const Dataset& train, const Dataset& test, int digit_a, int digit_b, int n,
                      std::size_t test_limit) {
  const PairSplit tr = select_pair(train, digit_a, digit_b);
  const PairSplit te = select_pair(test, digit_a, digit_b, test_limit);
  PairData out;
  out.pca = fit_pca(tr.images, 2 * n);
  const auto encode_all = [&](const PairSplit& split, std::vector<QuantumState>& states) {
    states.assign(split.labels.size(), QuantumState(1));
    detail::parallel_for(split.labels.size(), [&](std::size_t r) {
      const RVector row = split.images.row(static_cast<Eigen::Index>(r)).transpose();
      states[r] = encoded_state(encode({row.data(), static_cast<std::size_t>(row.size())}, out.pca, split.labels[r]));
    });
  };
  encode_all(tr, out.train_states);
  encode_all(te, out.test_states);
  out.train_labels = tr.labels;
  out.test_labels = te.labels;
  return out;
}

void ClassifierConfig::validate() const {
  if (digit_a == digit_b) throw ValidationError("digit pair must be distinct");
  std::visit([](const auto& h) { h.validate(); }, ansatz);
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch < 1) throw ValidationError("batch must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  if (test_limit < 1) throw ValidationError("test limit must be >= 1");
}

double accuracy(const EntanglerFactory& factory, const RotationParams& params, std::span<const QuantumState> states,
                std::span<const int> labels, int batch, std::size_t shots, const RngStream& rng) {
  if (states.size() != labels.size() || states.empty()) throw ValidationError("accuracy: states and labels differ");
  const std::size_t block = factory.noisy() ? static_cast<std::size_t>(batch) : states.size();
  std::size_t correct = 0;
  for (std::size_t start = 0, b = 0; start < states.size(); start += block, ++b) {
    const std::size_t end = std::min(states.size(), start + block);
    RngStream noise_rng = rng.substream(2 * b);
    const Circuit circuit = factory.circuit(params, factory.make(noise_rng));
    std::vector<char> hit(end - start, 0);
    detail::parallel_for(end - start, [&](std::size_t i) {
      const QuantumState out = run_circuit(circuit, states[start + i]);
      Classification c;
      if (shots) {
        RngStream shot_rng = rng.substream(2 * b + 1).substream(i);
        c = classify_shots(out, shots, shot_rng);
      } else {
        c = classify(out);
      }
      hit[i] = (c.is_b == (labels[start + i] == 1)) ? 1 : 0;
    });
    correct += static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  }
  return static_cast<double>(correct) / static_cast<double>(states.size());
}

ClassifierResult train_classifier(const ClassifierConfig& cfg, const PairData& data) {
  cfg.validate();
  const int n = ansatz_qubits(cfg.ansatz);
  if (data.train_states.empty() || data.test_states.empty()) throw ValidationError("empty train or test split");
  if (data.train_states.front().num_qubits() != n) throw ValidationError("encoded states do not match the ansatz size");

  const EntanglerFactory factory(cfg.ansatz, cfg.noise);
  const RVector observable = qubit_one_observable(n, 0);
  const RngStream root(cfg.seed, 0);
  const bool analog = std::holds_alternative<DAHyperparams>(cfg.ansatz);
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), data.train_states.size());

  ClassifierResult result;
  result.runs.resize(static_cast<std::size_t>(cfg.restarts));
  for (int r = 0; r < cfg.restarts; ++r) {
    const RngStream run = root.substream(static_cast<std::uint64_t>(r));
    RngStream init = run.substream(0);
    RotationParams initial = RotationParams::random(n, ansatz_layers(cfg.ansatz), init);

    const EpochBuilder build = [&](int /*epoch*/, RngStream& rng) {
      RngStream pick = rng.substream(0);
      std::vector<std::size_t> all(data.train_states.size());
      std::iota(all.begin(), all.end(), 0);
      std::vector<std::size_t> chosen;
      std::sample(all.begin(), all.end(), std::back_inserter(chosen), batch, pick.engine());
      EpochProblem p;
      std::vector<int> labels;
      for (auto i : chosen) {
        p.objective.inputs.push_back(data.train_states[i]);
        labels.push_back(data.train_labels[i]);
      }
      p.objective.observable = observable;
      p.objective.reduce = cross_entropy_reducer(std::move(labels), cfg.two_term_loss);
      p.objective.shots = cfg.shots;
      p.objective.shot_seed = rng.substream(2).engine()();
      RngStream noise = rng.substream(1);
      p.entanglers = factory.make(noise);
      p.analog = analog;
      return p;
    };

    TrainOptions opts;
    opts.epochs = cfg.epochs;
    opts.learning_rate = cfg.learning_rate;
    opts.mode = cfg.shots ? GradientMode::FiniteDifference : GradientMode::Analytic;
    TrainResult tr = train(opts, std::move(initial), build, run.substream(1));

    ClassifierRun& out = result.runs[static_cast<std::size_t>(r)];
    out.train_accuracy =
        accuracy(factory, tr.params, data.train_states, data.train_labels, cfg.batch, cfg.shots, run.substream(2));
    out.test_accuracy =
        accuracy(factory, tr.params, data.test_states, data.test_labels, cfg.batch, cfg.shots, run.substream(3));
    out.params = std::move(tr.params);
    out.record = std::move(tr.record);
  }
  std::vector<double> test;
  std::vector<double> train_acc;
  for (const auto& run : result.runs) {
    test.push_back(run.test_accuracy);
    train_acc.push_back(run.train_accuracy);
  }
  std::tie(result.test_mean, result.test_std) = mean_std(test);
  result.train_mean = mean_std(train_acc).first;
  return result;
}

ClassifierResult train_classifier(const ClassifierConfig& cfg, const Dataset& train, const Dataset& test) {
  cfg.validate();
  const PairData data =
      prepare_pair(train, test, cfg.digit_a, cfg.digit_b, ansatz_qubits(cfg.ansatz), cfg.test_limit);
  return train_classifier(cfg, data);
}

std::string config_json(const ClassifierConfig& cfg) {
  nlohmann::ordered_json j;
  j["task"] = "mnist";
  j["digits"] = {cfg.digit_a, cfg.digit_b};
  j["ansatz"] = ansatz_json(cfg.ansatz);
  j["noise"] = {{"enabled", cfg.noise.enabled},
                {"detuning_std", cfg.noise.analog.detuning_std},
                {"rabi_rel_std", cfg.noise.analog.rabi_rel_std},
                {"position_std", cfg.noise.analog.position_std},
                {"cx_sigma", cfg.noise.digital.sigma}};
  j["epochs"] = cfg.epochs;
  j["batch"] = cfg.batch;
  j["restarts"] = cfg.restarts;
  j["test_limit"] = cfg.test_limit;
  j["two_term_loss"] = cfg.two_term_loss;
  j["shots"] = cfg.shots;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["euler_convention"] = "ZYZ";
  j["cx_order"] = "ascending";
  return j.dump();
}

std::vector<GridRow> accuracy_grid(std::span<const GridCell> cells, const Dataset& train, const Dataset& test,
                                   const std::filesystem::path& cache_dir) {
  std::string data_bytes;
  for (const Dataset* d : {&train, &test}) {
    data_bytes.append(reinterpret_cast<const char*>(d->pixels.data()), d->pixels.size());
    data_bytes.append(reinterpret_cast<const char*>(d->labels.data()), d->labels.size());
  }
  const std::string data_digest = io::sha256_hex(data_bytes);
  std::vector<GridRow> rows;
  for (const auto& cell : cells) {
    GridRow row;
    row.label = cell.label;
    row.digit_a = cell.config.digit_a;
    row.digit_b = cell.config.digit_b;
    const std::string cfg = config_json(cell.config);
    row.config_hash = io::sha256_hex(cfg + data_digest);
    const std::filesystem::path cached = cache_dir.empty() ? std::filesystem::path{}
                                                           : cache_dir / "mnist" / (row.config_hash + ".json");
    if (!cached.empty() && std::filesystem::exists(cached)) {
      const auto j = nlohmann::json::parse(io::read_file(cached));
      row.accuracy_mean = j.at("accuracy_mean").get<double>();
      row.accuracy_std = j.at("accuracy_std").get<double>();
      row.cached = true;
      std::clog << "daql: cache hit for cell '" << cell.label << "' (" << row.config_hash.substr(0, 12) << ")\n";
    } else {
      const ClassifierResult res = train_classifier(cell.config, train, test);
      row.accuracy_mean = res.test_mean;
      row.accuracy_std = res.test_std;
      if (!cached.empty()) {
        nlohmann::ordered_json j;
        j["config"] = nlohmann::json::parse(cfg);
        j["data_sha256"] = data_digest;
        j["accuracy_mean"] = res.test_mean;
        j["accuracy_std"] = res.test_std;
        j["train_accuracy_mean"] = res.train_mean;
        std::vector<double> per_run;
        for (const auto& r : res.runs) per_run.push_back(r.test_accuracy);
        j["test_accuracy_runs"] = per_run;
        io::write_file(cached, j.dump(2));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string grid_csv(std::span<const GridRow> rows) {
  std::string out = "cell,pair,accuracy_mean,accuracy_std,config_hash\n";
  for (const auto& r : rows) {
    std::string label = r.label;
    std::replace(label.begin(), label.end(), ',', ';');
    out += label + ',' + std::to_string(r.digit_a) + "v" + std::to_string(r.digit_b) + ',' +
           io::format_double(r.accuracy_mean) + ',' + io::format_double(r.accuracy_std) + ',' + r.config_hash + '\n';
  }
  return out;
}

}  // namespace daql::mnist

// daql: fidelity sweeps, MNIST classification, phase learning and heatmaps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "daql/mnist.hpp"
#include "daql/noise.hpp"
#include "daql/phase.hpp"
#include "daql/render.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace daql;

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- parsing

double parse_number(std::string s) {
  std::erase(s, ' ');
  if (s.empty()) throw UsageError("empty number");
  const auto pos = s.find("pi");
  if (pos == std::string::npos) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw UsageError("'" + s + "' is not a number");
    return v;
  }
  std::string head = s.substr(0, pos);
  std::string tail = s.substr(pos + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double v = kPi * (head.empty() ? 1.0 : parse_number(head));
  if (!tail.empty()) {
    if (tail.front() != '/') throw UsageError("'" + s + "' is not a number");
    v /= parse_number(tail.substr(1));
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

// "a:b:k" (k evenly spaced values) or a comma list.
std::vector<double> parse_values(const std::string& s) {
  const auto range = split(s, ':');
  if (range.size() == 3 && s.find(',') == std::string::npos) {
    const double a = parse_number(range[0]);
    const double b = parse_number(range[1]);
    const int k = static_cast<int>(parse_number(range[2]));
    if (k < 1) throw UsageError("range '" + s + "' needs at least one value");
    std::vector<double> out;
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_number(p));
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_values(s)) {
    if (v != std::floor(v)) throw UsageError("'" + s + "' must list integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::pair<double, double> parse_point(const std::string& s) {
  const auto v = split(s, ',');
  if (v.size() != 2) throw UsageError("point must be x,y");
  return {parse_number(v[0]), parse_number(v[1])};
}

std::pair<int, int> parse_pair(const std::string& s, char sep) {
  const auto v = split(s, sep);
  if (v.size() != 2) throw UsageError("digit pair must look like 3" + std::string(1, sep) + "8");
  const int a = std::stoi(v[0]);
  const int b = std::stoi(v[1]);
  if (a < 0 || a > 9 || b < 0 || b > 9 || a == b) throw UsageError("digits must be distinct and in 0..9");
  return {a, b};
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  if (s == "all") {
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b) out.emplace_back(a, b);
    return out;
  }
  for (const auto& p : split(s, ',')) out.push_back(parse_pair(p, '-'));
  return out;
}

// --------------------------------------------------------------- config

// Turns a JSON config document into flag tokens placed right after the
// subcommand path, so that flags given on the command line win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (std::next(it) == args.end()) throw UsageError("--config needs a file");
  const fs::path file = *std::next(it);
  args.erase(it, std::next(it, 2));
  json doc;
  try {
    doc = json::parse(io::read_file(file));
  } catch (const json::exception& e) {
    throw FormatError("config " + file.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError("config " + file.string() + " must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      tokens.insert(tokens.end(), {flag, joined});
    } else {
      tokens.insert(tokens.end(), {flag, value.is_string() ? value.get<std::string>() : value.dump()});
    }
  }
  auto first_flag = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) { return a.starts_with("-"); });
  args.insert(first_flag, tokens.begin(), tokens.end());
  return args;
}

json resolved_options(const CLI::App* app) {
  std::map<std::string, json> sorted;
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->get_items_expected_max() == 0) {
      sorted[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      sorted[name] = opt->results().back();
    } else {
      sorted[name] = opt->get_default_str();
    }
  }
  json out = json::object();
  for (auto& [k, v] : sorted) out[k] = std::move(v);
  return out;
}

struct Context {
  std::string command;
  json options;
  fs::path cache_dir;
};

fs::path cache_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DAQL_CACHE_DIR"); env && *env) return env;
  return ".daql-cache";
}

void write_meta(const fs::path& output, const Context& ctx, json extra = json::object()) {
  json meta;
  meta["command"] = ctx.command;
  meta["version"] = kVersion;
  meta["config"] = ctx.options;
  meta["config_sha256"] = io::sha256_hex(ctx.options.dump());
  for (auto& [k, v] : extra.items()) meta[k] = v;
  fs::path side = output;
  side += ".meta.json";
  io::write_file(side, meta.dump(2) + "\n");
}

void announce(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

// --------------------------------------------------------------- ansatz

struct AnsatzFlags {
  std::string ansatz = "da";
  std::string layers = "12";
  int n = 8;
  double time = 0.25;
  double rba = 0.87;
  double dto = 0.8;
  double omega_mhz = 4.0;
  std::string phi = "pi/8";
  std::string noise = "off";
  double sigma = 0.065;
  double detuning_std = kTwoPi * 0.1;
  double rabi_std = 0.01;
  double position_std = 0.1;

  void add(CLI::App* app, bool with_n = true) {
    app->add_option("--ansatz", ansatz, "Entangling scheme")->check(CLI::IsMember({"da", "digital"}));
    app->add_option("--layers", layers, "Entangling layers (a list for sweeps)");
    if (with_n) app->add_option("--n", n, "Qubits")->check(CLI::Range(2, 20));
    app->add_option("--time", time, "Analog quench time (us)");
    app->add_option("--rba", rba, "Blockade radius over lattice spacing");
    app->add_option("--dto", dto, "Detuning over Rabi frequency");
    app->add_option("--omega-mhz", omega_mhz, "Rabi frequency / 2pi (MHz)");
    app->add_option("--phi", phi, "Generalized-CNOT angle, e.g. pi/8");
    app->add_option("--noise", noise, "Coherent noise")->check(CLI::IsMember({"on", "off"}));
    app->add_option("--sigma", sigma, "CX angle spread");
    app->add_option("--detuning-std", detuning_std, "Detuning spread (rad/us)");
    app->add_option("--rabi-std", rabi_std, "Relative Rabi spread");
    app->add_option("--position-std", position_std, "Position spread per coordinate (um)");
  }

  std::vector<int> layer_list() const {
    auto v = parse_ints(layers);
    for (int l : v)
      if (l < 0) throw UsageError("--layers must be >= 0");
    return v;
  }

  AnsatzHyperparams hyperparams() const {
    const auto v = layer_list();
    if (v.size() != 1) throw UsageError("--layers takes a single depth here");
    if (ansatz == "digital") return DigitalHyperparams{n, v.front(), parse_number(phi)};
    return DAHyperparams{n, v.front(), kTwoPi * omega_mhz, dto, rba, time};
  }

  NoiseConfig noise_config() const {
    NoiseConfig c;
    c.enabled = noise == "on";
    c.analog = {detuning_std, rabi_std, position_std};
    c.digital.sigma = sigma;
    c.analog.validate();
    c.digital.validate();
    return c;
  }
};

// -------------------------------------------------------------- fidelity

struct FidelityFlags {
  std::string axis;
  int n = 8;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  std::string values;
  std::string phi = "pi/8";
  double dto = 0.8;
  double rba = 0.87;
  double time = 0.25;
  double omega_mhz = 4.0;
  double sigma = 0.065;
  bool calibrate = false;
  double target = 0.99;
  std::string out = "fidelity.csv";
};

int cmd_fidelity(const FidelityFlags& f, const Context& ctx) {
  if (f.calibrate) {
    const double sigma = calibrate_digital_sigma(parse_number(f.phi), f.target);
    std::cout << "sigma = " << io::format_double(sigma) << " (mean CX fidelity " << io::format_double(f.target) << ")\n";
    return 0;
  }
  if (f.axis.empty()) throw UsageError("fidelity needs --axis rba|n (or --calibrate-sigma)");
  const SweepAxis axis = f.axis == "rba" ? SweepAxis::RbOverA : SweepAxis::Qubits;
  const std::string values = !f.values.empty() ? f.values : (axis == SweepAxis::RbOverA ? "0.7:1.0:16" : "4,6,8,10");
  const auto grid = parse_values(values);
  FidelitySweepConfig cfg;
  cfg.da = DAHyperparams{f.n, 0, kTwoPi * f.omega_mhz, f.dto, f.rba, f.time};
  cfg.phi = parse_number(f.phi);
  cfg.digital.sigma = f.sigma;
  cfg.samples = f.samples;
  cfg.seed = f.seed;
  const auto rows = fidelity_sweep(axis, grid, cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  io::write_file(f.out, csv.str());
  write_meta(f.out, ctx);
  announce(f.out);
  return 0;
}

// ----------------------------------------------------------------- mnist

struct MnistFlags {
  AnsatzFlags ansatz;
  std::string digits = "3,8";
  int epochs = 70;
  int batch = 100;
  int restarts = 1;
  std::size_t test_limit = 2000;
  std::size_t shots = 0;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::string loss = "two-term";
  std::string data_dir = "data/mnist5k";
  std::string train_images, train_labels, test_images, test_labels;
  std::string cache_dir;
  std::string out;
  // grid
  std::string sweep = "t";
  std::string values;
  std::string pairs;

  void add(CLI::App* app) {
    ansatz.add(app);
    app->add_option("--digits", digits, "Digit pair a,b (a is label 0)");
    app->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    app->add_option("--batch", batch)->check(CLI::PositiveNumber);
    app->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
    app->add_option("--test-limit", test_limit);
    app->add_option("--shots", shots, "Measurement shots (0 = exact)");
    app->add_option("--lr", lr, "AdaGrad learning rate");
    app->add_option("--seed", seed);
    app->add_option("--loss", loss)->check(CLI::IsMember({"two-term", "one-term"}));
    app->add_option("--data", data_dir, "Directory holding the four IDX files");
    app->add_option("--train-images", train_images);
    app->add_option("--train-labels", train_labels);
    app->add_option("--test-images", test_images);
    app->add_option("--test-labels", test_labels);
    app->add_option("--cache-dir", cache_dir, "Overrides DAQL_CACHE_DIR");
  }

  std::pair<mnist::Dataset, mnist::Dataset> load() const {
    const fs::path dir = data_dir;
    const auto pick = [&](const std::string& flag, const char* name) { return flag.empty() ? dir / name : fs::path(flag); };
    for (const auto& p : {pick(train_images, "train-images-idx3-ubyte"), pick(train_labels, "train-labels-idx1-ubyte"),
                          pick(test_images, "t10k-images-idx3-ubyte"), pick(test_labels, "t10k-labels-idx1-ubyte")}) {
      if (!fs::exists(p)) throw std::runtime_error("MNIST file not found: " + p.string());
    }
    return {mnist::load_idx(pick(train_images, "train-images-idx3-ubyte"), pick(train_labels, "train-labels-idx1-ubyte")),
            mnist::load_idx(pick(test_images, "t10k-images-idx3-ubyte"), pick(test_labels, "t10k-labels-idx1-ubyte"))};
  }

  mnist::ClassifierConfig config() const {
    mnist::ClassifierConfig c;
    std::tie(c.digit_a, c.digit_b) = parse_pair(digits, ',');
    c.ansatz = ansatz.hyperparams();
    c.noise = ansatz.noise_config();
    c.epochs = epochs;
    c.batch = batch;
    c.restarts = restarts;
    c.test_limit = test_limit;
    c.two_term_loss = loss == "two-term";
    c.shots = shots;
    c.learning_rate = lr;
    c.seed = seed;
    c.validate();
    return c;
  }
};

int cmd_mnist_train(const MnistFlags& f, const Context& ctx) {
  const auto cfg = f.config();
  const auto [train, test] = f.load();
  const auto res = mnist::train_classifier(cfg, train, test);
  json out;
  out["config"] = json::parse(mnist::config_json(cfg));
  out["test_accuracy_mean"] = res.test_mean;
  out["test_accuracy_std"] = res.test_std;
  out["train_accuracy_mean"] = res.train_mean;
  out["runs"] = json::array();
  const fs::path path = f.out.empty() ? "mnist_train.json" : f.out;
  fs::path records = path;
  records += ".records.jsonl";
  std::ostringstream rec;
  for (const auto& run : res.runs) {
    out["runs"].push_back({{"test_accuracy", run.test_accuracy},
                           {"train_accuracy", run.train_accuracy},
                           {"params", json::parse(params_to_json(cfg.ansatz, run.params, run.record.seed))}});
    write_train_record(rec, run.record);
  }
  io::write_file(path, out.dump(2) + "\n");
  io::write_file(records, rec.str());
  write_meta(path, ctx);
  std::cout << "test accuracy " << io::format_double(res.test_mean) << " +- " << io::format_double(res.test_std)
            << " over " << res.runs.size() << " restart(s)\n";
  announce(path);
  return 0;
}

int cmd_mnist_grid(const MnistFlags& f, const Context& ctx) {
  const auto layers = f.ansatz.layer_list();
  MnistFlags single = f;
  single.ansatz.layers = std::to_string(layers.front());
  const auto base = single.config();
  std::vector<mnist::GridCell> cells;
  const auto cell = [&](std::string label, const std::function<void(mnist::ClassifierConfig&)>& edit) {
    mnist::ClassifierConfig c = base;
    edit(c);
    c.validate();
    cells.push_back({std::move(label), std::move(c)});
  };
  const auto set_layers = [](mnist::ClassifierConfig& c, int l) { std::visit([l](auto& h) { h.layers = l; }, c.ansatz); };
  if (f.sweep == "t") {
    if (!std::holds_alternative<DAHyperparams>(base.ansatz)) throw UsageError("--sweep t needs --ansatz da");
    const auto ts = parse_values(f.values.empty() ? "0.05:0.45:9" : f.values);
    for (int l : layers)
      for (double t : ts)
        cell("t=" + io::format_double(t) + ";layers=" + std::to_string(l), [&](auto& c) {
          set_layers(c, l);
          std::get<DAHyperparams>(c.ansatz).time = t;
        });
  } else if (f.sweep == "phi") {
    if (!std::holds_alternative<DigitalHyperparams>(base.ansatz)) throw UsageError("--sweep phi needs --ansatz digital");
    const auto phis = parse_values(f.values.empty() ? "pi/8,pi/4" : f.values);
    for (const auto& [a, b] : parse_pairs(f.pairs.empty() ? "3-8,1-9,2-7" : f.pairs))
      for (int l : layers)
        for (double phi : phis)
          cell("phi=" + io::format_double(phi) + ";layers=" + std::to_string(l), [&](auto& c) {
            c.digit_a = a;
            c.digit_b = b;
            set_layers(c, l);
            std::get<DigitalHyperparams>(c.ansatz).phi = phi;
          });
  } else {
    for (const auto& [a, b] : parse_pairs(f.pairs.empty() ? "all" : f.pairs))
      for (int l : layers)
        cell("layers=" + std::to_string(l), [&](auto& c) {
          c.digit_a = a;
          c.digit_b = b;
          set_layers(c, l);
        });
  }
  const auto [train, test] = f.load();
  const auto rows = mnist::accuracy_grid(cells, train, test, cache_root(f.cache_dir));
  const fs::path path = f.out.empty() ? "mnist_grid.csv" : f.out;
  io::write_file(path, mnist::grid_csv(rows));
  write_meta(path, ctx);
  announce(path);
  return 0;
}

// ----------------------------------------------------------------- phase

struct PhaseFlags {
  AnsatzFlags ansatz;
  std::string model = "xxz";
  int n = 0;
  std::string nodes;
  double tolerance = 1e-10;
  std::string cache_dir;
  std::string out;
  std::string quantity = "entropy";
  std::string point;
  int runs = 20;
  int epochs = 50;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::string in;
  std::string schemes = "da:0.87,da:0.98,digital:pi/8";
  int repeats = 5;

  void add_mesh(CLI::App* app) {
    app->add_option("--model", model)->check(CLI::IsMember({"xxz", "rydberg"}));
    app->add_option("--n", n, "Chain length (default 8 for xxz, 9 for rydberg)");
    app->add_option("--nodes", nodes, "Mesh size NxM (default 20x20 for xxz, 21x21 for rydberg)");
    app->add_option("--tolerance", tolerance, "Relative eigensolver residual");
    app->add_option("--cache-dir", cache_dir, "Overrides DAQL_CACHE_DIR");
  }

  void add_training(CLI::App* app) {
    ansatz.layers = "2";
    ansatz.add(app, false);
    app->add_option("--runs", runs)->check(CLI::PositiveNumber);
    app->add_option("--epochs", epochs, "Default 50, or 70 with noise")->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "AdaGrad learning rate");
    app->add_option("--seed", seed);
  }

  phase::MeshSpec mesh_spec() const {
    const phase::Model m = phase::parse_model(model);
    phase::MeshSpec s = m == phase::Model::Xxz ? phase::xxz_mesh() : phase::rydberg_mesh();
    if (n > 0) s.n = n;
    if (!nodes.empty()) {
      const auto dims = split(nodes, 'x');
      if (dims.size() != 2) throw UsageError("--nodes must look like 20x20");
      s.x.count = std::stoi(dims[0]);
      s.y.count = std::stoi(dims[1]);
    }
    s.tolerance = tolerance;
    s.validate();
    return s;
  }

  fs::path mesh_cache(const phase::MeshSpec& s) const {
    return cache_root(cache_dir) / "phase" / (io::sha256_hex(s.canonical()) + ".gs");
  }

  phase::PhaseMesh load_mesh() const {
    const auto spec = mesh_spec();
    const fs::path file = mesh_cache(spec);
    if (!fs::exists(file)) {
      throw std::runtime_error("no ground-state cache at " + file.string() + "; run `daql phase mesh --model " + model +
                               "` with the same mesh flags first");
    }
    return phase::build_mesh(spec, file);
  }

  phase::DetectorConfig detector(const phase::PhaseMesh& mesh, bool epochs_given) const {
    AnsatzFlags a = ansatz;
    a.n = mesh.spec.n;
    phase::DetectorConfig c;
    c.ansatz = a.hyperparams();
    c.noise = a.noise_config();
    c.runs = runs;
    c.epochs = epochs_given ? epochs : (c.noise.enabled ? 70 : 50);
    c.learning_rate = lr;
    c.seed = seed;
    if (!point.empty()) {
      std::tie(c.train_x, c.train_y) = parse_point(point);
    } else if (mesh.spec.model == phase::Model::Rydberg) {
      c.train_x = 0.6;
      c.train_y = 1.3;
    }
    c.validate();
    return c;
  }
};

std::vector<double> quantity_map(const phase::PhaseMesh& mesh, const std::string& q) {
  if (q == "energy") return mesh.energy;
  if (q == "entropy") return phase::entropy_map(mesh);
  const auto op = phase::order_parameter_map(mesh);
  for (std::size_t k = 0; k < phase::kOrderNames.size(); ++k) {
    if (q == phase::kOrderNames[k]) {
      std::vector<double> out;
      for (const auto& o : op) out.push_back(o.value[k]);
      return out;
    }
  }
  throw UsageError("unknown quantity '" + q + "'");
}

int cmd_phase_mesh(const PhaseFlags& f, const Context& ctx) {
  const auto spec = f.mesh_spec();
  const fs::path file = f.mesh_cache(spec);
  const auto mesh = phase::build_mesh(spec, file);
  write_meta(file, ctx, {{"mesh", json::parse(spec.canonical())}, {"eigensolves", mesh.eigensolves}});
  std::size_t failed = 0;
  for (std::size_t k = 0; k < mesh.energy.size(); ++k) failed += mesh.ok(k) ? 0 : 1;
  std::cout << "ground states for " << spec.num_nodes() << " nodes (" << mesh.eigensolves << " solved, " << failed
            << " failed)\n";
  announce(file);
  if (!f.out.empty()) {
    io::write_file(f.out, phase::grid_csv(spec, mesh.energy));
    write_meta(f.out, ctx);
    announce(f.out);
  }
  return failed == 0 ? 0 : 1;
}

int cmd_phase_orderparams(const PhaseFlags& f, const Context& ctx) {
  const auto mesh = f.load_mesh();
  const auto& s = mesh.spec;
  const bool xxz = s.model == phase::Model::Xxz;
  const auto entropy = phase::entropy_map(mesh);
  const auto op = xxz ? phase::order_parameter_map(mesh) : std::vector<phase::OrderParameters>{};
  std::string csv = "x,y";
  if (xxz)
    for (const char* name : phase::kOrderNames) csv += std::string(",") + name;
  csv += ",entropy\n";
  for (int iy = 0; iy < s.y.count; ++iy) {
    for (int ix = 0; ix < s.x.count; ++ix) {
      const std::size_t k = mesh.index(ix, iy);
      csv += io::format_double(s.x.value(ix)) + ',' + io::format_double(s.y.value(iy));
      if (xxz)
        for (double v : op[k].value) csv += ',' + io::format_double(v);
      csv += ',' + io::format_double(entropy[k]) + '\n';
    }
  }
  const fs::path path = f.out.empty() ? "orderparams.csv" : f.out;
  io::write_file(path, csv);
  json extra;
  if (xxz) extra["contour_percent"] = {{"zAFM", 18}, {"qzAFM", 3}, {"xAFM", 50}, {"VBS", 9}};
  write_meta(path, ctx, extra);
  announce(path);
  return 0;
}

int cmd_phase_map(const PhaseFlags& f, const Context& ctx) {
  const auto mesh = f.load_mesh();
  const auto values = quantity_map(mesh, f.quantity);
  const fs::path path = f.out.empty() ? f.quantity + ".csv" : f.out;
  io::write_file(path, phase::grid_csv(mesh.spec, values));
  write_meta(path, ctx, {{"quantity", f.quantity}});
  announce(path);
  return 0;
}

int cmd_phase_train(const PhaseFlags& f, const Context& ctx, bool epochs_given) {
  const auto mesh = f.load_mesh();
  const auto cfg = f.detector(mesh, epochs_given);
  const auto diagram = phase::train_anomaly_detector(mesh, cfg);
  const fs::path path = f.out.empty() ? "diagram.csv" : f.out;
  io::write_file(path, phase::grid_csv(mesh.spec, diagram.loss));
  fs::path records = path;
  records += ".records.jsonl";
  std::ostringstream rec;
  for (const auto& r : diagram.records) write_train_record(rec, r);
  io::write_file(records, rec.str());
  const auto [lo, hi] = std::minmax_element(diagram.loss.begin(), diagram.loss.end());
  write_meta(path, ctx,
             {{"detector", json::parse(cfg.canonical())},
              {"mesh", json::parse(mesh.spec.canonical())},
              {"train_node", diagram.train_node},
              {"train_node_loss", diagram.train_node_loss},
              {"warning", diagram.warning}});
  std::cout << "loss range [" << io::format_double(*lo) << ", " << io::format_double(*hi) << "] over "
            << diagram.loss.size() << " nodes";
  if (diagram.loss.size() >= 9 && mesh.spec.x.count >= 3 && mesh.spec.y.count >= 3)
    std::cout << ", sharpness " << io::format_double(phase::sharpness(diagram));
  std::cout << '\n';
  announce(path);
  return 0;
}

phase::Axis axis_from(const std::vector<double>& v, const std::string& name) {
  phase::Axis a{name, v.front(), v.back(), static_cast<int>(v.size())};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(a.value(static_cast<int>(i)) - v[i]) > 1e-9 * std::max(1.0, std::abs(a.max - a.min)))
      throw FormatError("axis " + name + " is not uniformly spaced");
  }
  return a;
}

int cmd_phase_sharpness(const PhaseFlags& f, const Context& ctx, bool epochs_given) {
  if (!f.in.empty()) {
    const auto grid = render::grid_from_csv(io::read_csv(f.in));
    const double s = phase::sharpness(grid.values, axis_from(grid.xs, "x"), axis_from(grid.ys, "y"));
    std::cout << io::format_double(s) << '\n';
    const fs::path path = f.out.empty() ? "sharpness.csv" : f.out;
    std::string csv = fs::exists(path) ? io::read_file(path) : "input,sharpness\n";
    csv += f.in + ',' + io::format_double(s) + '\n';
    io::write_file(path, csv);
    return 0;
  }
  const auto mesh = f.load_mesh();
  std::vector<phase::SharpnessScheme> schemes;
  for (const auto& spec : split(f.schemes, ',')) {
    const auto parts = split(spec, ':');
    if (parts.size() != 2) throw UsageError("schemes look like da:0.87,digital:pi/8");
    AnsatzFlags a = f.ansatz;
    a.n = mesh.spec.n;
    a.layers = "0";
    a.ansatz = parts[0];
    if (a.ansatz == "da") {
      a.rba = parse_number(parts[1]);
    } else if (a.ansatz == "digital") {
      a.phi = parts[1];
    } else {
      throw UsageError("unknown scheme '" + parts[0] + "'");
    }
    schemes.push_back({spec, a.hyperparams()});
  }
  PhaseFlags single = f;
  single.ansatz.layers = "0";  // the sweep sets the depth
  const auto base = single.detector(mesh, epochs_given);
  const auto layers = f.ansatz.layer_list();
  const auto rows = phase::sharpness_vs_depth(mesh, layers, schemes, base, f.repeats);
  std::string csv = "layers,scheme,sharpness_mean,sharpness_std,repeats,runs\n";
  for (const auto& r : rows) {
    std::string scheme = r.scheme;
    std::replace(scheme.begin(), scheme.end(), ',', ';');
    csv += std::to_string(r.layers) + ',' + scheme + ',' + io::format_double(r.mean) + ',' + io::format_double(r.std) +
           ',' + std::to_string(r.repeats) + ',' + std::to_string(r.runs) + '\n';
  }
  const fs::path path = f.out.empty() ? "sharpness_depth.csv" : f.out;
  io::write_file(path, csv);
  write_meta(path, ctx, {{"detector", json::parse(base.canonical())}});
  announce(path);
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderFlags {
  std::string in;
  std::string out;
  std::string column = "value";
  int block = 2;
};

int cmd_render(const RenderFlags& f) {
  const std::string text = io::read_file(f.in);
  const auto grid = render::grid_from_csv(io::parse_csv(text), f.column);
  const auto img = render::heatmap(grid, f.block);
  const fs::path path = f.out.empty() ? fs::path(f.in).replace_extension(".ppm") : fs::path(f.out);
  io::write_file(path, img.ppm);
  json side;
  side["input"] = f.in;
  side["input_sha256"] = io::sha256_hex(text);
  side["column"] = f.column;
  side["min"] = img.min;
  side["max"] = img.max;
  side["width"] = img.width;
  side["height"] = img.height;
  side["block"] = f.block;
  side["colormap"] = "linear: min (0,0,255) to max (255,0,0)";
  side["orientation"] = "x left to right, y bottom to top";
  fs::path sidecar = path;
  sidecar += ".json";
  io::write_file(sidecar, side.dump(2) + "\n");
  announce(path);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Digital-analog quantum learning experiments", "daql"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "JSON document mirroring the flags; flags override it");

  FidelityFlags fid;
  auto* fidelity = app.add_subcommand("fidelity", "Layer fidelity sweeps and CX noise calibration");
  fidelity->add_option("--axis", fid.axis, "Swept axis")->check(CLI::IsMember({"rba", "n"}));
  fidelity->add_option("--n", fid.n, "Qubits for the Rb/a sweep")->check(CLI::Range(2, 12));
  fidelity->add_option("--samples", fid.samples, "Noise draws per point")->check(CLI::PositiveNumber);
  fidelity->add_option("--seed", fid.seed);
  fidelity->add_option("--values", fid.values, "Grid: a:b:k or a comma list");
  fidelity->add_option("--phi", fid.phi, "Generalized-CNOT angle");
  fidelity->add_option("--dto", fid.dto, "Detuning over Rabi frequency");
  fidelity->add_option("--rba", fid.rba, "Rb/a for the qubit-count sweep");
  fidelity->add_option("--time", fid.time, "Quench time (us)");
  fidelity->add_option("--omega-mhz", fid.omega_mhz);
  fidelity->add_option("--sigma", fid.sigma, "CX angle spread");
  fidelity->add_flag("--calibrate-sigma", fid.calibrate, "Print the CX spread reaching --target");
  fidelity->add_option("--target", fid.target, "Mean single-CX fidelity");
  fidelity->add_option("--out", fid.out);

  MnistFlags mn;
  auto* mnist_cmd = app.add_subcommand("mnist", "Binary digit classification");
  mnist_cmd->require_subcommand(1);
  auto* mtrain = mnist_cmd->add_subcommand("train", "Train one classifier");
  mn.add(mtrain);
  mtrain->add_option("--out", mn.out, "Result JSON (default mnist_train.json)");
  auto* mgrid = mnist_cmd->add_subcommand("grid", "Accuracy grid over a sweep");
  mn.add(mgrid);
  mgrid->add_option("--sweep", mn.sweep)->check(CLI::IsMember({"t", "pairs", "phi"}));
  mgrid->add_option("--values", mn.values, "Swept t or phi values: a:b:k or a comma list");
  mgrid->add_option("--pairs", mn.pairs, "Digit pairs like 3-8,1-9, or 'all'");
  mgrid->add_option("--out", mn.out, "Grid CSV (default mnist_grid.csv)");

  PhaseFlags ph;
  auto* phase_cmd = app.add_subcommand("phase", "Ground-state meshes and learned phase diagrams");
  phase_cmd->require_subcommand(1);
  auto* pmesh = phase_cmd->add_subcommand("mesh", "Solve and cache ground states");
  auto* porder = phase_cmd->add_subcommand("orderparams", "Order parameters and entropy per node");
  auto* pmap = phase_cmd->add_subcommand("map", "One per-node quantity as x,y,value");
  auto* ptrain = phase_cmd->add_subcommand("train", "Anomaly-detection phase diagram");
  auto* psharp = phase_cmd->add_subcommand("sharpness", "Sharpness of a diagram, or sharpness versus depth");
  for (auto* c : {pmesh, porder, pmap, ptrain, psharp}) {
    ph.add_mesh(c);
    c->add_option("--out", ph.out);
  }
  pmap->add_option("--quantity", ph.quantity)
      ->check(CLI::IsMember({"energy", "entropy", "zAFM", "qzAFM", "xAFM", "VBS"}));
  for (auto* c : {ptrain, psharp}) ph.add_training(c);
  ptrain->add_option("--point", ph.point, "Training point x,y");
  psharp->add_option("--point", ph.point, "Training point x,y");
  psharp->add_option("--in", ph.in, "Diagram CSV (x,y,value)");
  psharp->add_option("--schemes", ph.schemes, "e.g. da:0.87,da:0.98,digital:pi/8");
  psharp->add_option("--repeats", ph.repeats)->check(CLI::PositiveNumber);

  RenderFlags rf;
  auto* render_cmd = app.add_subcommand("render", "PPM heatmap of an x,y,value CSV");
  render_cmd->add_option("--in", rf.in)->required();
  render_cmd->add_option("--out", rf.out, "Image path (default: input with .ppm)");
  render_cmd->add_option("--column", rf.column);
  render_cmd->add_option("--block", rf.block, "Pixels per node side")->check(CLI::PositiveNumber);

  std::vector<std::string> args(argv, argv + argc);
  args = merge_config(std::move(args));
  std::vector<std::string> reversed(args.rbegin(), std::prev(args.rend()));
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* leaf = &app;
  std::string command;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }
  const Context ctx{command, resolved_options(leaf), {}};

  if (fidelity->parsed()) return cmd_fidelity(fid, ctx);
  if (mtrain->parsed()) return cmd_mnist_train(mn, ctx);
  if (mgrid->parsed()) return cmd_mnist_grid(mn, ctx);
  if (pmesh->parsed()) return cmd_phase_mesh(ph, ctx);
  if (porder->parsed()) return cmd_phase_orderparams(ph, ctx);
  if (pmap->parsed()) return cmd_phase_map(ph, ctx);
  if (ptrain->parsed()) return cmd_phase_train(ph, ctx, ptrain->count("--epochs") > 0);
  if (psharp->parsed()) return cmd_phase_sharpness(ph, ctx, psharp->count("--epochs") > 0);
  return cmd_render(rf);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "daql: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "daql: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "daql: " << e.what() << '\n';
    return 1;
  }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "daql/noise.hpp"
#include "daql/training.hpp"

namespace daql::mnist {

/// Grayscale images (row-major, one byte per pixel) with digit labels.
struct Dataset {
  int rows = 28;
  int cols = 28;
  std::vector<std::uint8_t> pixels;  // size() * rows * cols
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t pixels_per_image() const { return static_cast<std::size_t>(rows) * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * pixels_per_image(), pixels_per_image()};
  }
};

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

/// Big-endian IDX containers: magic 0x00000803 (images) and 0x00000801
/// (labels). Throws FormatError on a bad magic or a payload whose length
/// disagrees with the header.
IdxImages parse_idx_images(std::string_view bytes);
std::vector<std::uint8_t> parse_idx_labels(std::string_view bytes);
std::string serialize_idx_images(const IdxImages& images);
std::string serialize_idx_labels(std::span<const std::uint8_t> labels);

/// Reads both files; throws FormatError when the counts differ.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Principal components of the rows of a data matrix.
struct PCAModel {
  RVector mean;
  RMatrix components;  // one orthonormal component per row, decreasing variance
  RVector explained_variance;
  RVector proj_min;  // per component, over the fitting data
  RVector proj_max;

  int num_components() const { return static_cast<int>(components.rows()); }
  RVector project(std::span<const double> x) const;
  RVector reconstruct(const RVector& projection) const;
};

/// Fits on the rows of `data`. Throws ValidationError when there are fewer
/// than `n_components` rows or more components than features.
PCAModel fit_pca(const RMatrix& data, int n_components);
/// Mean squared reconstruction error over the rows of `data`.
double reconstruction_error(const PCAModel& pca, const RMatrix& data);

/// "DAQLPCA1", then little-endian u64 feature and component counts, then
/// f64 mean, components (row-major), variances, minima and maxima.
std::string serialize_pca(const PCAModel& pca);
PCAModel deserialize_pca(std::string_view bytes);

struct EncodedSample {
  std::vector<double> theta;  // [0, pi]
  std::vector<double> phi;    // [0, 2pi)
  int label = 0;
};

/// The first n projections map min-max onto theta in [0, pi], the last n
/// onto phi in [0, 2pi) (the maximum wraps to 0). Projections outside the
/// fitted range are clamped.
EncodedSample encode(std::span<const double> image, const PCAModel& pca, int label = 0);
/// prod_j [cos(theta_j/2)|0> + e^{i phi_j} sin(theta_j/2)|1>].
QuantumState encoded_state(const EncodedSample& sample);

struct Classification {
  double q = 0.0;   // probability of reading 1 on qubit 0
  bool is_b = false;  // q >= 0.5
};
Classification classify(const QuantumState& output);
Classification classify_shots(const QuantumState& output, std::size_t shots, RngStream& rng);

/// Images of digits a (label 0) and b (label 1) from one split.
struct PairSplit {
  RMatrix images;  // one image per row, pixel values in [0, 1]
  std::vector<int> labels;
};
PairSplit select_pair(const Dataset& data, int digit_a, int digit_b, std::size_t limit = 0);

struct ClassifierConfig {
  int digit_a = 3;
  int digit_b = 8;
  AnsatzHyperparams ansatz = DAHyperparams{};
  NoiseConfig noise;
  int epochs = 70;
  int batch = 100;
  int restarts = 1;
  std::size_t test_limit = 2000;
  bool two_term_loss = true;
  std::size_t shots = 0;  // 0 = exact expectations
  double learning_rate = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ClassifierRun {
  RotationParams params{1, 0};
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  TrainRecord record;
};

struct ClassifierResult {
  std::vector<ClassifierRun> runs;
  double test_mean = 0.0;
  double test_std = 0.0;  // sample standard deviation over restarts
  double train_mean = 0.0;
};

/// Encoded train and test states for one digit pair (PCA fit on the train
/// images of the pair only).
struct PairData {
  PCAModel pca;
  std::vector<QuantumState> train_states;
  std::vector<int> train_labels;
  std::vector<QuantumState> test_states;
  std::vector<int> test_labels;
};
PairData prepare_pair(const Dataset& train, const Dataset& test, int digit_a, int digit_b, int n,
                      std::size_t test_limit);

/// Accuracy of a trained circuit. With noise, a fresh noise draw is made for
/// every block of `batch` consecutive samples.
double accuracy(const EntanglerFactory& factory, const RotationParams& params, std::span<const QuantumState> states,
                std::span<const int> labels, int batch, std::size_t shots, const RngStream& rng);

ClassifierResult train_classifier(const ClassifierConfig& cfg, const PairData& data);
ClassifierResult train_classifier(const ClassifierConfig& cfg, const Dataset& train, const Dataset& test);

/// Canonical JSON of every field that affects the result.
std::string config_json(const ClassifierConfig& cfg);

struct GridCell {
  std::string label;  // free-form cell description, e.g. "t=0.25;layers=12"
  ClassifierConfig config;
};

struct GridRow {
  std::string label;
  int digit_a = 0;
  int digit_b = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  std::string config_hash;
  bool cached = false;
};

/// Evaluates every cell, reusing results stored under `cache_dir` (keyed by
/// the SHA-256 of the cell config). An empty path disables caching.
std::vector<GridRow> accuracy_grid(std::span<const GridCell> cells, const Dataset& train, const Dataset& test,
                                   const std::filesystem::path& cache_dir);

/// cell,pair,accuracy_mean,accuracy_std,config_hash
std::string grid_csv(std::span<const GridRow> rows);

}  // namespace daql::mnist

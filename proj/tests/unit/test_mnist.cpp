#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "daql/mnist.hpp"

using namespace daql;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DAQL_DATA_DIR;

const std::pair<mnist::Dataset, mnist::Dataset>& subset() {
  static const auto data = std::pair{
      mnist::load_idx(kData / "train-images-idx3-ubyte", kData / "train-labels-idx1-ubyte"),
      mnist::load_idx(kData / "t10k-images-idx3-ubyte", kData / "t10k-labels-idx1-ubyte")};
  return data;
}

// Two constant images per class with a little pixel noise.
mnist::Dataset synthetic(int count, std::uint64_t seed) {
  mnist::Dataset d;
  d.rows = d.cols = 4;
  RngStream rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::uint8_t label = i % 2 ? 7 : 2;
    for (int p = 0; p < 16; ++p) {
      const int base = label == 7 ? (p < 8 ? 220 : 20) : (p < 8 ? 20 : 220);
      d.pixels.push_back(static_cast<std::uint8_t>(base + static_cast<int>(rng.below(10))));
    }
    d.labels.push_back(label);
  }
  return d;
}

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("daql_mnist_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Idx, RoundTripIsByteExact) {
  const std::string bytes = io::read_file(kData / "t10k-images-idx3-ubyte");
  const auto img = mnist::parse_idx_images(bytes);
  EXPECT_EQ(img.rows, 28u);
  EXPECT_EQ(mnist::serialize_idx_images(img), bytes);
  const std::string lab = io::read_file(kData / "t10k-labels-idx1-ubyte");
  EXPECT_EQ(mnist::serialize_idx_labels(mnist::parse_idx_labels(lab)), lab);
}

TEST(Idx, LoadsSubsetWithHeaderCount) {
  const auto& [train, test] = subset();
  const auto header = io::read_file(kData / "train-images-idx3-ubyte");
  EXPECT_EQ(train.size(), (static_cast<std::size_t>(static_cast<unsigned char>(header[6])) << 8) |
                              static_cast<unsigned char>(header[7]));
  EXPECT_EQ(train.pixels.size(), train.size() * 784);
  EXPECT_GT(test.size(), 0u);
}

TEST(Idx, RejectsBadMagicAndTruncation) {
  std::string bytes = io::read_file(kData / "t10k-images-idx3-ubyte");
  std::string bad = bytes;
  bad[3] = 0x02;
  EXPECT_THROW(mnist::parse_idx_images(bad), FormatError);
  try {
    mnist::parse_idx_images(bytes.substr(0, bytes.size() - 5));
    FAIL();
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(std::to_string(bytes.size())), std::string::npos) << msg;
    EXPECT_NE(msg.find(std::to_string(bytes.size() - 5)), std::string::npos) << msg;
  }
}

TEST(Idx, CountMismatchAndMissingFile) {
  const fs::path dir = temp_dir();
  mnist::IdxImages img{2, 2, 2, std::vector<std::uint8_t>(8, 1)};
  io::write_file(dir / "img", mnist::serialize_idx_images(img));
  const std::vector<std::uint8_t> labels{1, 2, 3};
  io::write_file(dir / "lab", mnist::serialize_idx_labels(labels));
  EXPECT_THROW(mnist::load_idx(dir / "img", dir / "lab"), FormatError);
  try {
    mnist::load_idx(dir / "nope", dir / "lab");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Pca, SingleAxisData) {
  RMatrix data = RMatrix::Zero(20, 5);
  for (int i = 0; i < 20; ++i) data(i, 2) = i * 0.5 - 3.0;
  const auto pca = mnist::fit_pca(data, 2);
  EXPECT_NEAR(std::abs(pca.components(0, 2)), 1.0, 1e-12);
  EXPECT_NEAR(pca.explained_variance[0] / pca.explained_variance.sum(), 1.0, 1e-12);
  EXPECT_THROW(mnist::fit_pca(data, 6), ValidationError);
  EXPECT_THROW(mnist::fit_pca(data.topRows(1), 2), ValidationError);
}

TEST(Pca, OrthonormalOrderedAndSerializable) {
  const auto& [train, test] = subset();
  const auto pair = mnist::select_pair(train, 3, 8);
  const auto pca = mnist::fit_pca(pair.images, 16);
  const RMatrix gram = pca.components * pca.components.transpose();
  EXPECT_LT((gram - RMatrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-8);
  for (int k = 0; k + 1 < 16; ++k) EXPECT_GE(pca.explained_variance[k], pca.explained_variance[k + 1]);
  const std::string blob = mnist::serialize_pca(pca);
  EXPECT_EQ(blob.substr(0, 8), "DAQLPCA1");
  const auto back = mnist::deserialize_pca(blob);
  EXPECT_EQ(back.components, pca.components);
  EXPECT_EQ(back.proj_max, pca.proj_max);
  EXPECT_THROW(mnist::deserialize_pca(blob.substr(0, blob.size() - 3)), FormatError);
  double last = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 8; ++n) {
    const double err = mnist::reconstruction_error(mnist::fit_pca(pair.images, 2 * n), pair.images);
    EXPECT_LE(err, last + 1e-12);
    last = err;
  }
}

TEST(Encode, AnglesAndProductState) {
  const auto& [train, test] = subset();
  const auto pair = mnist::select_pair(train, 1, 9);
  const auto pca = mnist::fit_pca(pair.images, 8);
  const RMatrix proj = (pair.images.rowwise() - pca.mean.transpose()) * pca.components.transpose();
  Eigen::Index argmin = 0;
  proj.col(0).minCoeff(&argmin);
  const RVector row = pair.images.row(argmin).transpose();
  const auto s = mnist::encode({row.data(), static_cast<std::size_t>(row.size())}, pca);
  EXPECT_NEAR(s.theta[0], 0.0, 1e-12);
  const auto state = mnist::encoded_state(s);
  EXPECT_NEAR(probability_one(state, 0), 0.0, 1e-12);
  for (int cut = 1; cut < 4; ++cut) {
    std::vector<int> a(cut);
    std::iota(a.begin(), a.end(), 0);
    EXPECT_NEAR(entanglement_entropy(state, a), 0.0, 1e-10);
  }
  for (double t : s.theta) EXPECT_TRUE(t >= 0 && t <= kPi);
  for (double p : s.phi) EXPECT_TRUE(p >= 0 && p < kTwoPi);
  const auto again = mnist::encode({row.data(), static_cast<std::size_t>(row.size())}, pca);
  EXPECT_EQ(again.theta, s.theta);
  EXPECT_EQ(again.phi, s.phi);
  // Far outside the fitted range: clamped.
  const RVector wild = row * 50.0;
  const auto c = mnist::encode({wild.data(), static_cast<std::size_t>(wild.size())}, pca);
  for (double t : c.theta) EXPECT_TRUE(t >= 0 && t <= kPi);
  mnist::EncodedSample one{{kPi}, {0.3}, 0};
  EXPECT_NEAR(probability_one(mnist::encoded_state(one), 0), 1.0, 1e-15);
}

TEST(Classify, ThresholdTiesToB) {
  const auto one = mnist::classify(QuantumState::basis(3, 0b100));
  EXPECT_NEAR(one.q, 1.0, 1e-15);
  EXPECT_TRUE(one.is_b);
  EXPECT_FALSE(mnist::classify(QuantumState(3)).is_b);
  const std::vector<std::array<cplx, 2>> plus(3, {cplx(std::sqrt(0.5)), cplx(std::sqrt(0.5))});
  const auto half = mnist::classify(QuantumState::product(plus));
  EXPECT_NEAR(half.q, 0.5, 1e-15);
  EXPECT_EQ(half.is_b, half.q >= 0.5);
}

TEST(Classifier, SeparableSyntheticPairIsLearned) {
  const auto train = synthetic(200, 1);
  const auto test = synthetic(60, 2);
  mnist::ClassifierConfig cfg;
  cfg.digit_a = 2;
  cfg.digit_b = 7;
  cfg.ansatz = DAHyperparams{4, 1};
  cfg.epochs = 40;
  cfg.batch = 20;
  cfg.seed = 3;
  const auto res = mnist::train_classifier(cfg, train, test);
  EXPECT_EQ(res.test_mean, 1.0);
  EXPECT_THROW(mnist::select_pair(train, 2, 5), ValidationError);
}

TEST(Classifier, UntrainedAccuracyIsChance) {
  const auto& [train, test] = subset();
  const auto data = mnist::prepare_pair(train, test, 3, 8, 8, 2000);
  const EntanglerFactory factory(DAHyperparams{8, 2}, {});
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    const auto p = RotationParams::random(8, 2, rng);
    sum += mnist::accuracy(factory, p, data.test_states, data.test_labels, 100, 0, RngStream(seed));
  }
  EXPECT_NEAR(sum / 20, 0.5, 0.05);
}

TEST(Classifier, SwappingDigitsMirrorsPredictions) {
  const auto& [train, test] = subset();
  const auto ab = mnist::prepare_pair(train, test, 1, 9, 6, 2000);
  const auto ba = mnist::prepare_pair(train, test, 9, 1, 6, 2000);
  const EntanglerFactory factory(DAHyperparams{6, 2}, {});
  RngStream rng(4);
  const auto p = RotationParams::random(6, 2, rng);
  const double acc_ab = mnist::accuracy(factory, p, ab.test_states, ab.test_labels, 100, 0, RngStream(1));
  const double acc_ba = mnist::accuracy(factory, p, ba.test_states, ba.test_labels, 100, 0, RngStream(1));
  // Same images and PCA; labels swap, so relabeled predictions score 1 - acc.
  EXPECT_NEAR(acc_ab, 1.0 - acc_ba, 1.0 / ab.test_states.size() + 1e-12);
}

TEST(Grid, SingleCellMatchesDirectRunAndCaches) {
  const auto train = synthetic(120, 5);
  const auto test = synthetic(40, 6);
  mnist::ClassifierConfig cfg;
  cfg.digit_a = 2;
  cfg.digit_b = 7;
  cfg.ansatz = DigitalHyperparams{4, 1, kPi / 8};
  cfg.epochs = 5;
  cfg.batch = 10;
  cfg.restarts = 2;
  const fs::path dir = temp_dir();
  const std::vector<mnist::GridCell> cells{{"only", cfg}};
  const auto first = mnist::accuracy_grid(cells, train, test, dir);
  const auto direct = mnist::train_classifier(cfg, train, test);
  EXPECT_EQ(first[0].accuracy_mean, direct.test_mean);
  EXPECT_EQ(first[0].accuracy_std, direct.test_std);
  EXPECT_FALSE(first[0].cached);
  const auto second = mnist::accuracy_grid(cells, train, test, dir);
  EXPECT_TRUE(second[0].cached);
  EXPECT_EQ(mnist::grid_csv(first), mnist::grid_csv(second));
  EXPECT_EQ(mnist::grid_csv(first).substr(0, 57), "cell,pair,accuracy_mean,accuracy_std,config_hash\nonly,2v7");
  fs::remove_all(dir);
}

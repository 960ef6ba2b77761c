#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lmol/error.hpp"
#include "lmol/model/transformer.hpp"
#include "lmol/numcore/tape.hpp"
#include "lmol/train/batch.hpp"
#include "lmol/train/checkpoint.hpp"
#include "lmol/train/dataset.hpp"
#include "lmol/train/trainer.hpp"
#include "support/corpus.hpp"
#include "support/tiny_model.hpp"
#include "synthetic.hpp"

namespace lmol {
namespace {

namespace fs = std::filesystem;
using testing::tiny_config;
using testing::tiny_params;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("lmol_train_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

bool bit_equal(std::span<const real> a, std::span<const real> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(real)) == 0;
}

std::vector<Example> random_examples(std::size_t n, std::size_t d_voc, std::size_t n_props, std::uint64_t seed,
                                     std::size_t min_len = 3, std::size_t max_len = 12) {
  std::mt19937_64 rng(seed);
  std::vector<Example> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = min_len + rng() % (max_len - min_len + 1);
    for (std::size_t k = 0; k < len; ++k) {
      rows[i].ids.push_back(static_cast<int>(smiles::kReservedCount + rng() % (d_voc - smiles::kReservedCount)));
    }
    rows[i].smiles = "row" + std::to_string(i);
    for (std::size_t p = 0; p < n_props; ++p) rows[i].properties.push_back(static_cast<real>(rng() % 100) / 50);
  }
  return rows;
}

TrainConfig small_train_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.grad_accum = 2;
  c.learning_rate = real(3e-3);
  c.max_steps = 6;
  c.eval_interval = 2;
  c.eval_rows = 8;
  c.seed = 11;
  return c;
}

TEST(SplitDataset, NinetyTen) {
  const auto rows = random_examples(100, 12, 1, 1);
  const auto [train, test] = split_dataset(rows, 0.9, 5);
  EXPECT_EQ(train.size(), 90u);
  EXPECT_EQ(test.size(), 10u);
  std::multiset<std::string> seen;
  for (const auto& e : train) seen.insert(e.smiles);
  for (const auto& e : test) seen.insert(e.smiles);
  std::multiset<std::string> all;
  for (const auto& e : rows) all.insert(e.smiles);
  EXPECT_EQ(seen, all);  // disjoint and exhaustive

  const auto again = split_dataset(rows, 0.9, 5);
  for (std::size_t i = 0; i < train.size(); ++i) EXPECT_EQ(again.first[i].smiles, train[i].smiles);
  const auto other = split_dataset(rows, 0.9, 6);
  bool differs = false;
  for (std::size_t i = 0; i < train.size(); ++i) differs |= other.first[i].smiles != train[i].smiles;
  EXPECT_TRUE(differs);
}

TEST(SplitDataset, Extremes) {
  EXPECT_THROW(split_dataset({}, 0.9, 0), DataError);
  EXPECT_THROW(split_dataset(random_examples(1, 12, 0, 1), 0.9, 0), DataError);
  const auto [train, test] = split_dataset(random_examples(2, 12, 0, 1), 0.99, 0);
  EXPECT_EQ(train.size(), 1u);
  EXPECT_EQ(test.size(), 1u);
}

TEST(DatasetFile, RoundTripAndTruncation) {
  TempDir dir;
  Dataset d;
  d.property_names = {"a", "b"};
  d.rows = random_examples(20, 30, 2, 3);
  save_dataset(d, dir / "d.bin");
  const Dataset back = load_dataset(dir / "d.bin");
  EXPECT_EQ(back.property_names, d.property_names);
  ASSERT_EQ(back.rows.size(), d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].smiles, d.rows[i].smiles);
    EXPECT_EQ(back.rows[i].ids, d.rows[i].ids);
    EXPECT_TRUE(bit_equal(back.rows[i].properties, d.rows[i].properties));
  }
  const auto size = fs::file_size(dir / "d.bin");
  fs::resize_file(dir / "d.bin", size - 3);
  EXPECT_THROW(load_dataset(dir / "d.bin"), FormatError);
  EXPECT_THROW(load_dataset(dir / "missing.bin"), IoError);
}

TEST(MakeBatch, FramingPaddingAndMask) {
  std::mt19937_64 rng(4);
  const auto rows = random_examples(50, 20, 2, 4, 1, 15);
  const BatchOptions opts{real(0.5), true, 6};
  const auto batches = make_batches(rows, 8, 2, opts, rng);
  std::size_t seen = 0;
  for (const Batch& b : batches) {
    seen += b.size;
    std::size_t longest = 0;
    for (std::size_t i = 0; i < b.size; ++i) {
      const auto r = b.row(i);
      const std::size_t len = b.lengths[i];
      longest = std::max(longest, len);
      EXPECT_EQ(r[0], smiles::kClsId);
      EXPECT_EQ(r[len - 1], smiles::kSepId);
      for (std::size_t j = 1; j + 1 < len; ++j) EXPECT_GE(r[j], smiles::kReservedCount);
      for (std::size_t j = len; j < b.max_len; ++j) EXPECT_EQ(r[j], smiles::kPadId);
      for (std::size_t j = 0; j < b.max_len; ++j) {
        const bool trained = b.loss_mask[i * b.max_len + j];
        const bool next_real = j + 1 < len;
        EXPECT_EQ(trained, next_real);
      }
      // Every row carries exactly the surviving conditions.
      EXPECT_EQ(b.contexts[i].numeric.size(),
                static_cast<std::size_t>(std::count(b.present.numeric.begin(), b.present.numeric.end(), true)));
      EXPECT_EQ(b.contexts[i].fragment.has_value(), b.present.fragment);
    }
    EXPECT_EQ(b.max_len, longest);
  }
  EXPECT_EQ(seen, rows.size());
}

TEST(MakeBatch, EqualLengthsNeedNoPadding) {
  std::mt19937_64 rng(5);
  const auto rows = random_examples(16, 20, 1, 5, 7, 7);
  for (const Batch& b : make_batches(rows, 4, 1, BatchOptions{}, rng)) {
    EXPECT_EQ(std::count(b.tokens.begin(), b.tokens.end(), smiles::kPadId), 0);
  }
}

TEST(Training, InitialLossNearUniform) {
  ModelConfig c = ModelConfig::desk();
  c.d_voc = 591;
  c.dropout = 0;
  c.n_numeric = 1;
  const ModelParams p = init_params(c, {"w"}, 3);
  std::mt19937_64 rng(6);
  const auto rows = random_examples(64, c.d_voc, 1, 6, 10, 30);
  const auto batches = make_batches(rows, 16, 1, BatchOptions{real(0.15), true, 50}, rng);
  EXPECT_NEAR(evaluate_loss(p, batches), std::log(591.0), 0.3);
}

TEST(Training, SameSeedSameCurve) {
  const ModelConfig c = tiny_config(20);
  const auto rows = random_examples(40, 20, 2, 7);
  std::vector<real> curves[2];
  for (auto& curve : curves) {
    ModelParams p = init_params(c, testing::condition_names(2), 1);
    Trainer t(p, small_train_config(), rows, {});
    for (int s = 0; s < 5; ++s) curve.push_back(t.step());
  }
  EXPECT_TRUE(bit_equal(curves[0], curves[1]));
  EXPECT_LT(curves[0].back(), curves[0].front());
}

TEST(Training, GradientAccumulationMatchesLargeBatch) {
  const ModelConfig c = tiny_config(20);
  const auto rows = random_examples(32, 20, 2, 8);
  TrainConfig big = small_train_config();
  big.p_del = 0;
  big.use_fragments = false;
  big.batch_size = 8;
  big.grad_accum = 1;
  TrainConfig split = big;
  split.batch_size = 4;
  split.grad_accum = 2;

  std::vector<std::vector<real>> grads[2];
  int k = 0;
  for (const TrainConfig& cfg : {big, split}) {
    ModelParams p = tiny_params(c, 2, 0.05);
    Trainer t(p, cfg, rows, {});
    const auto batches = t.micro_batches(0);
    {
      Tape tape;
      TapeScope scope(tape);
      accumulate_gradients(p, batches, false, {});
    }
    for (const Tensor& w : p.tensors()) grads[k].emplace_back(w.grad().begin(), w.grad().end());
    ++k;
  }
  double worst = 0;
  for (std::size_t i = 0; i < grads[0].size(); ++i) {
    for (std::size_t j = 0; j < grads[0][i].size(); ++j) {
      worst = std::max(worst, std::abs(static_cast<double>(grads[0][i][j] - grads[1][i][j])));
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Training, TestLossIgnoresDropout) {
  ModelConfig c = tiny_config(20);
  c.dropout = real(0.5);
  const auto rows = random_examples(20, 20, 2, 9);
  ModelParams p = init_params(c, testing::condition_names(2), 1);
  Trainer t(p, small_train_config(), rows, rows);
  const real a = t.test_loss();
  EXPECT_EQ(a, t.test_loss());
  t.step();
  EXPECT_NE(a, t.test_loss());
}

TEST(Training, DivergenceReportsStep) {
  const ModelConfig c = tiny_config(20);
  const auto rows = random_examples(20, 20, 2, 10);
  ModelParams p = init_params(c, testing::condition_names(2), 1);
  p.output.mutable_data()[0] = std::numeric_limits<real>::quiet_NaN();
  Trainer t(p, small_train_config(), rows, {});
  try {
    t.step();
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST(TrainLoop, MetricsRowsPerInterval) {
  TempDir dir;
  const ModelConfig c = tiny_config(20);
  const auto rows = random_examples(30, 20, 2, 11);
  ModelParams p = init_params(c, testing::condition_names(2), 1);
  LoopOptions opts;
  opts.metrics = dir / "m.csv";
  opts.checkpoint = dir / "ck.bin";
  const auto metrics = train_loop(p, small_train_config(), rows, rows, opts);
  ASSERT_EQ(metrics.size(), 3u);  // 6 steps / interval 2
  EXPECT_EQ(metrics[2].step, 6u);
  std::ifstream in(*opts.metrics);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,train_loss,test_loss");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 3u);
  EXPECT_EQ(load_checkpoint(*opts.checkpoint).step, 6u);
}

TEST(TrainLoop, ResumeReproducesTrajectory) {
  TempDir dir;
  const ModelConfig c = tiny_config(20);
  const auto rows = random_examples(30, 20, 2, 12);
  TrainConfig cfg = small_train_config();

  ModelParams straight = init_params(c, testing::condition_names(2), 1);
  const auto full = train_loop(straight, cfg, rows, rows);

  ModelParams resumed = init_params(c, testing::condition_names(2), 1);
  LoopOptions opts;
  opts.checkpoint = dir / "ck.bin";
  opts.metrics = dir / "m.csv";
  TrainConfig first = cfg;
  first.max_steps = 4;
  train_loop(resumed, first, rows, rows, opts);
  ModelParams fresh = init_params(c, testing::condition_names(2), 1);  // as a restarted process would
  opts.resume = true;
  const auto tail = train_loop(fresh, cfg, rows, rows, opts);

  ASSERT_EQ(tail.size(), full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    EXPECT_EQ(tail[i].step, full[i].step);
    EXPECT_EQ(tail[i].train_loss, full[i].train_loss);
    EXPECT_EQ(*tail[i].test_loss, *full[i].test_loss);
  }
  const auto a = straight.tensors(), b = fresh.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(bit_equal(a[i].data(), b[i].data()));

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  ModelParams q = init_params(c, testing::condition_names(2), 1);
  EXPECT_THROW(train_loop(q, other, rows, rows, opts), ConfigError);
}

TEST(TrainLoop, HeldOutLossBeatsUniform) {
  synth::CorpusOptions co;
  co.count = 300;
  co.seed = 3;
  const auto corpus = synth::make_corpus(co);
  const auto vocab = smiles::Vocabulary::from_corpus(corpus);
  Dataset d = testing::weight_dataset(corpus, vocab);
  auto [train, test] = split_dataset(d.rows, 0.9, 1);
  ModelConfig c = ModelConfig::desk();
  c.d_voc = vocab.size();
  c.n_numeric = 1;
  ModelParams p = init_params(c, d.property_names, 2);
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.grad_accum = 1;
  cfg.learning_rate = real(1e-3);
  cfg.max_steps = 40;
  cfg.eval_interval = 40;
  const auto metrics = train_loop(p, cfg, train, test);
  EXPECT_LT(*metrics.back().test_loss, std::log(static_cast<double>(c.d_voc)));
}

class CheckpointTest : public ::testing::Test {
 protected:
  TempDir dir;
  ModelConfig config = tiny_config(20);
  ModelParams params = tiny_params(config, 3);
};

TEST_F(CheckpointTest, ForwardIsBitIdenticalAfterRoundTrip) {
  save_checkpoint(dir / "ck.bin", params, 17, 99);
  const Checkpoint ck = load_checkpoint(dir / "ck.bin", config);
  EXPECT_EQ(ck.step, 17u);
  EXPECT_EQ(ck.seed, 99u);
  EXPECT_FALSE(ck.optimizer);
  EXPECT_EQ(ck.params.config, config);
  EXPECT_EQ(ck.params.conditions.names, params.conditions.names);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Tensor x = Tensor::from({5, config.d_emb}, [&] {
      std::vector<real> v(5 * config.d_emb);
      std::normal_distribution<double> n;
      for (auto& e : v) e = static_cast<real>(n(rng));
      return v;
    }());
    EXPECT_TRUE(bit_equal(forward(params, x).data(), forward(ck.params, x).data()));
  }
}

TEST_F(CheckpointTest, OptimizerStateRoundTrips) {
  Adam adam(params.tensors(), AdamOptions{});
  for (Tensor t : params.tensors()) {
    for (real& g : t.mutable_grad()) g = real(0.25);
  }
  adam.step();
  save_checkpoint(dir / "ck.bin", params, 1, 0, &adam);
  const Checkpoint ck = load_checkpoint(dir / "ck.bin");
  ASSERT_TRUE(ck.optimizer);
  Adam other(ck.params.tensors(), AdamOptions{});
  restore_optimizer(*ck.optimizer, other);
  EXPECT_EQ(other.steps(), 1u);
  for (std::size_t i = 0; i < adam.first_moments().size(); ++i) {
    EXPECT_TRUE(bit_equal(adam.first_moments()[i], other.first_moments()[i]));
    EXPECT_TRUE(bit_equal(adam.second_moments()[i], other.second_moments()[i]));
  }
}

TEST_F(CheckpointTest, TruncationIsAFormatError) {
  save_checkpoint(dir / "ck.bin", params, 1, 0);
  const auto size = fs::file_size(dir / "ck.bin");
  for (std::uintmax_t cut : {std::uintmax_t{0}, std::uintmax_t{3}, std::uintmax_t{20}, size / 2, size - 1}) {
    fs::copy_file(dir / "ck.bin", dir / "cut.bin", fs::copy_options::overwrite_existing);
    fs::resize_file(dir / "cut.bin", cut);
    EXPECT_THROW(load_checkpoint(dir / "cut.bin"), FormatError) << cut;
  }
}

TEST_F(CheckpointTest, BadHeaderAndMismatch) {
  save_checkpoint(dir / "ck.bin", params, 1, 0);
  {
    std::fstream f(dir / "ck.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XMOL", 4);
  }
  EXPECT_THROW(load_checkpoint(dir / "ck.bin"), FormatError);
  save_checkpoint(dir / "ck.bin", params, 1, 0);
  ModelConfig wider = config;
  wider.d_emb = 32;
  EXPECT_THROW(load_checkpoint(dir / "ck.bin", wider), ShapeError);
  EXPECT_THROW(load_checkpoint(dir / "absent.bin"), IoError);
}

}  // namespace
}  // namespace lmol

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lmol/error.hpp"
#include "lmol/model/transformer.hpp"
#include "lmol/numcore/ops.hpp"
#include "lmol/sample/sampler.hpp"
#include "lmol/train/trainer.hpp"
#include "support/corpus.hpp"
#include "support/tiny_model.hpp"

namespace lmol {
namespace {

using testing::tiny_config;
using testing::tiny_params;

std::vector<real> random_logits(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 3.0);
  std::vector<real> v(n);
  for (auto& x : v) x = static_cast<real>(d(rng));
  return v;
}

double entropy(const std::vector<real>& p) {
  double h = 0;
  for (real x : p) {
    if (x > 0) h -= static_cast<double>(x) * std::log(static_cast<double>(x));
  }
  return h;
}

smiles::Vocabulary tiny_vocab(std::size_t size) {
  static const char* kTokens[] = {"C", "c", "O", "N", "1", "(", ")", "=", "F", "S", "n", "2", "#", "Cl", "Br", "s"};
  std::vector<std::string> tokens(kTokens, kTokens + (size - smiles::kReservedCount));
  return smiles::Vocabulary::from_tokens(tokens);
}

TEST(Temperature, UnitTemperatureIsPlainSoftmax) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto logits = random_logits(rng, 1 + rng() % 60);
    const auto p = sampling_distribution(logits, 1);
    const Tensor s = softmax_rows(Tensor::from({1, logits.size()}, logits));
    ASSERT_EQ(std::memcmp(p.data(), s.data().data(), p.size() * sizeof(real)), 0);
  }
}

TEST(Temperature, ArgmaxInvariantAndEntropyMonotone) {
  std::mt19937_64 rng(2);
  const real grid[] = {real(0.05), real(0.1), real(0.3), real(0.5), real(0.8), 1, real(1.5), 2, 5};
  for (int i = 0; i < 200; ++i) {
    const auto logits = random_logits(rng, 2 + rng() % 60);
    const std::size_t best = argmax(logits);
    double previous = -1;
    for (real t : grid) {
      const auto p = sampling_distribution(logits, t);
      EXPECT_EQ(argmax(p), best);
      const double h = entropy(p);
      EXPECT_GE(h, previous - 1e-6);
      previous = h;
    }
  }
}

TEST(Temperature, ExtremeValuesStayFinite) {
  const std::vector<real> logits{real(1e4), real(-1e4), 0};
  const auto p = sampling_distribution(logits, real(1e-6));
  EXPECT_EQ(p[0], 1);
  EXPECT_EQ(p[1], 0);
  EXPECT_THROW(sampling_distribution(logits, 0), ConfigError);
  std::mt19937_64 rng(1);
  EXPECT_EQ(choose_token(logits, 0, rng), 0);
}

TEST(Temperature, DrawFrequenciesFollowDistribution) {
  const std::vector<real> logits{0, real(std::log(3.0)), real(-40)};
  std::mt19937_64 rng(3);
  int counts[3] = {0, 0, 0};
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[choose_token(logits, 1, rng)];
  EXPECT_NEAR(counts[0] / double(n), 0.25, 0.015);
  EXPECT_NEAR(counts[1] / double(n), 0.75, 0.015);
  EXPECT_EQ(counts[2], 0);
}

class GenerateTest : public ::testing::Test {
 protected:
  ModelConfig config = tiny_config(20);
  ModelParams params = tiny_params(config, 5, 0.1);
  smiles::Vocabulary vocab = tiny_vocab(20);
};

TEST_F(GenerateTest, GreedyMatchesFullReforward) {
  std::mt19937_64 spec_rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const ContextSpec spec = testing::random_spec(spec_rng, config);
    SamplerConfig sc;
    sc.temperature = 0;
    sc.max_new_tokens = 12;
    std::mt19937_64 rng(0);
    const Generation g = generate(params, vocab, spec, sc, rng);
    EXPECT_LE(g.ids.size(), sc.max_new_tokens);
    std::vector<int> ids{smiles::kClsId};
    for (std::size_t step = 0; step <= g.ids.size(); ++step) {
      const AssembledInput in = assemble_input(spec, ids, params);
      const Tensor logits = forward(params, in.embedded);
      const std::size_t last = logits.dim(0) - 1;
      const int next = static_cast<int>(argmax(logits.data().subspan(last * config.d_voc, config.d_voc)));
      if (step == g.ids.size()) {
        if (g.stop == StopReason::kSep) {
          EXPECT_EQ(next, smiles::kSepId);
        }
      } else {
        ASSERT_EQ(next, g.ids[step]) << "step " << step;
        ids.push_back(next);
      }
    }
  }
}

TEST_F(GenerateTest, LimitsAndStopReasons) {
  SamplerConfig sc;
  sc.temperature = real(1.5);
  sc.max_new_tokens = 3;
  sc.seed = 4;
  const auto out = generate_batch(params, vocab, ContextSpec{}, sc, 50);
  ASSERT_EQ(out.size(), 50u);
  bool limited = false;
  for (const Generation& g : out) {
    EXPECT_LE(g.ids.size(), 3u);
    if (g.stop == StopReason::kLimit) {
      EXPECT_EQ(g.ids.size(), 3u);
      limited = true;
    }
    for (int id : g.ids) EXPECT_NE(id, smiles::kSepId);
    EXPECT_EQ(g.smiles, smiles::detokenize(g.ids, vocab));
  }
  EXPECT_TRUE(limited);
  // The model window caps generation even for a huge token budget.
  sc.max_new_tokens = 100000;
  for (const Generation& g : generate_batch(params, vocab, ContextSpec{}, sc, 5)) {
    EXPECT_LE(g.ids.size() + 2, config.max_total_len());
  }
}

TEST_F(GenerateTest, BatchIsDeterministicAndMatchesSingleDraw) {
  SamplerConfig sc;
  sc.seed = 21;
  sc.max_new_tokens = 10;
  ContextSpec spec;
  spec.numeric.push_back({1, real(0.7)});
  const auto a = generate_batch(params, vocab, spec, sc, 8);
  const auto b = generate_batch(params, vocab, spec, sc, 8);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].ids, b[i].ids);
  std::mt19937_64 rng(sc.seed);
  EXPECT_EQ(generate_batch(params, vocab, spec, sc, 1)[0].ids, generate(params, vocab, spec, sc, rng).ids);
  bool varied = false;
  for (const auto& g : a) varied |= g.ids != a[0].ids;
  EXPECT_TRUE(varied);
}

TEST_F(GenerateTest, RejectsBadConfigs) {
  SamplerConfig sc;
  std::mt19937_64 rng;
  sc.temperature = -1;
  EXPECT_THROW(generate(params, vocab, {}, sc, rng), ConfigError);
  sc.temperature = 1;
  sc.max_new_tokens = 0;
  EXPECT_THROW(generate(params, vocab, {}, sc, rng), ConfigError);
  sc.max_new_tokens = 5;
  EXPECT_THROW(generate(params, tiny_vocab(19), {}, sc, rng), ConfigError);
  ContextSpec unknown;
  unknown.numeric.push_back({7, 1});
  EXPECT_THROW(generate(params, vocab, unknown, sc, rng), ConfigError);
  EXPECT_THROW(generate_batch(params, vocab, ContextSpec{}, sc, 0), ConfigError);
}

TEST(Memorized, SingleMoleculeComesBackAtLowTemperature) {
  const std::string target = "CC(=O)Nc1ccc(O)cc1";
  const auto vocab = smiles::Vocabulary::from_corpus(std::vector<std::string>{target, "CCN", "c1ccsc1"});
  const Dataset d = testing::weight_dataset({target}, vocab);
  ModelConfig c = ModelConfig::desk();
  c.d_voc = vocab.size();
  c.n_numeric = 1;
  c.dropout = 0;
  ModelParams p = init_params(c, d.property_names, 1);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.grad_accum = 1;
  tc.learning_rate = real(3e-3);
  tc.p_del = real(0.5);
  Trainer trainer(p, tc, d.rows, {});
  for (int s = 0; s < 60; ++s) trainer.step();
  SamplerConfig sc;
  sc.temperature = real(0.1);
  sc.seed = 2;
  for (const Generation& g : generate_batch(p, vocab, ContextSpec{}, sc, 20)) EXPECT_EQ(g.smiles, target);
}

}  // namespace
}  // namespace lmol

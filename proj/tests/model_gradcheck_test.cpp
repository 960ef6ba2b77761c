// Built against the double-precision library.
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lmol/context/context.hpp"
#include "lmol/model/transformer.hpp"
#include "lmol/numcore/gradcheck.hpp"
#include "lmol/numcore/ops.hpp"
#include "support/tiny_model.hpp"

namespace lmol {
namespace {

static_assert(kDoublePrecision, "gradient checks run in 64-bit mode");

// Full pipeline: condition encoding, assembly of two packed sequences,
// decoder stack and masked cross-entropy.
GradcheckReport check_seed(std::uint64_t seed) {
  const ModelConfig c = testing::tiny_config();
  ModelParams p = testing::tiny_params(c, seed);
  std::mt19937_64 rng(seed);
  const std::vector<ContextSpec> specs{testing::random_spec(rng, c), testing::random_spec(rng, c)};
  const std::vector<std::vector<int>> ids{testing::random_framed(rng, 3 + rng() % 3, c.d_voc),
                                          testing::random_framed(rng, 2 + rng() % 3, c.d_voc)};
  const std::vector<Sequence> seqs{{&specs[0], ids[0]}, {&specs[1], ids[1]}};
  auto loss = [&] {
    const AssembledInput in = assemble_input(seqs, p);
    return cross_entropy(forward(p, in.embedded, in.offsets), in.targets, kIgnoreTarget);
  };
  std::vector<Tensor> params = p.tensors();
  return gradcheck_report(loss, params, real(1e-5));
}

TEST(ModelGradcheck, TinyDecoderTwentySeeds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GradcheckReport r = check_seed(seed);
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed << " param " << r.worst_param << " index "
                                     << r.worst_index << " analytic " << r.analytic << " numeric "
                                     << r.numeric;
    EXPECT_GT(r.checked, 1000u);
  }
}

}  // namespace
}  // namespace lmol

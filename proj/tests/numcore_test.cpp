#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lmol/error.hpp"
#include "lmol/numcore/adam.hpp"
#include "lmol/numcore/ops.hpp"
#include "lmol/numcore/tape.hpp"

namespace lmol {
namespace {

std::vector<real> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<real> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<real>(dist(rng));
  return Tensor::from(std::move(shape), std::move(v));
}

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor::zeros({0, 3}), ShapeError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  const Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(values(matmul(eye, m)), (std::vector<real>{1, 2, 3, 4}));
}

TEST(Matmul, MatrixTimesColumn) {
  const Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor c = Tensor::from({2, 1}, {0, 1});
  const Tensor r = matmul(m, c);
  EXPECT_EQ(r.shape(), (Shape{2, 1}));
  EXPECT_EQ(values(r), (std::vector<real>{2, 4}));
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 5})), ShapeError);
  EXPECT_THROW(matmul(Tensor::zeros({2, 2, 3}), Tensor::zeros({3, 3, 5})), ShapeError);
}

TEST(Matmul, BatchedMatchesPerSlice) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor({3, 4, 5}, rng);
  const Tensor b = random_tensor({3, 5, 2}, rng);
  const Tensor c = matmul(a, b);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        double ref = 0;
        for (std::size_t p = 0; p < 5; ++p) ref += double(a[s * 20 + i * 5 + p]) * b[s * 10 + p * 2 + j];
        EXPECT_NEAR(c[s * 8 + i * 2 + j], ref, 1e-5);
      }
    }
  }
}

TEST(Matmul, AssociativeOnRandomInstances) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = dim(rng), k = dim(rng), l = dim(rng), n = dim(rng);
    const Tensor a = random_tensor({m, k}, rng);
    const Tensor b = random_tensor({k, l}, rng);
    const Tensor c = random_tensor({l, n}, rng);
    const Tensor left = matmul(matmul(a, b), c);
    const Tensor right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.numel(); ++i) EXPECT_NEAR(left[i], right[i], 1e-4);
  }
}

TEST(Softmax, UniformRow) {
  const Tensor p = softmax_rows(Tensor::from({1, 4}, {0, 0, 0, 0}));
  for (real v : p.data()) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Softmax, MaskedPositionGetsZero) {
  const real inf = std::numeric_limits<real>::infinity();
  const Tensor p = softmax_rows(Tensor::from({1, 2}, {5, -inf}));
  EXPECT_EQ(p[0], real(1));
  EXPECT_EQ(p[1], real(0));
  const Tensor q = softmax_rows(Tensor::from({1, 2}, {5, kMaskValue}));
  EXPECT_EQ(q[1], real(0));
}

TEST(Softmax, AnalyticTwoEntries) {
  const Tensor p = softmax_rows(Tensor::from({1, 2}, {static_cast<real>(std::log(2.0)), 0}));
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-6);
}

TEST(Softmax, FullyMaskedRowIsAnError) {
  const real inf = std::numeric_limits<real>::infinity();
  EXPECT_THROW(softmax_rows(Tensor::from({2, 2}, {0, 1, -inf, -inf})), NumericError);
}

TEST(Softmax, RowsSumToOneProperty) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t r = dim(rng), c = dim(rng);
    Tensor x = random_tensor({r, c}, rng);
    for (real& v : x.mutable_data()) v *= 10;
    const Tensor p = softmax_rows(x);
    for (std::size_t i = 0; i < r; ++i) {
      double total = 0;
      for (std::size_t j = 0; j < c; ++j) {
        const real v = p[i * c + j];
        EXPECT_GE(v, 0);
        EXPECT_LE(v, 1);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogVocab) {
  const Tensor logits = Tensor::zeros({3, 591});
  const std::vector<int> targets{5, 17, 590};
  EXPECT_NEAR(cross_entropy(logits, targets, -1).item(), std::log(591.0), 1e-5);
}

TEST(CrossEntropy, ConfidentCorrectApproachesZero) {
  Tensor logits = Tensor::zeros({1, 4});
  logits.mutable_data()[2] = 100;
  const std::vector<int> targets{2};
  EXPECT_LT(cross_entropy(logits, targets, -1).item(), 1e-6);
}

TEST(CrossEntropy, IgnoredPositionsContributeNothing) {
  Tensor logits = Tensor::from({2, 4}, {9, -3, 2, 1, 0, 0, 0, 0});
  logits.set_requires_grad(true);
  const std::vector<int> targets{0, 3};
  Tape tape;
  TapeScope scope(tape);
  Tensor loss = cross_entropy(logits, targets, 0);
  EXPECT_NEAR(loss.item(), std::log(4.0), 1e-6);
  tape.backward(loss);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(logits.grad()[j], real(0));
}

TEST(CrossEntropy, AllIgnoredIsZero) {
  const std::vector<int> targets{-1, -1};
  EXPECT_EQ(cross_entropy(Tensor::zeros({2, 3}), targets, -1).item(), real(0));
}

TEST(CrossEntropy, OutOfRangeTargetThrows) {
  const std::vector<int> targets{3};
  EXPECT_THROW(cross_entropy(Tensor::zeros({1, 3}), targets, -1), IndexError);
}

TEST(CrossEntropy, NonNegativeProperty) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor logits = random_tensor({4, 7}, rng);
    std::vector<int> targets(4);
    for (auto& t : targets) t = static_cast<int>(rng() % 7);
    EXPECT_GE(cross_entropy(logits, targets, -1).item(), 0);
  }
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::parameter({3}, {1, 2, 3});
  Tape tape;
  TapeScope scope(tape);
  backward(sum(x));
  EXPECT_EQ(values(Tensor::from({3}, {x.grad().begin(), x.grad().end()})), (std::vector<real>{1, 1, 1}));
}

TEST(Backward, SquareGivesTwiceInput) {
  Tensor x = Tensor::parameter({2}, {1, 2});
  Tape tape;
  TapeScope scope(tape);
  backward(sum(mul(x, x)));
  EXPECT_EQ(x.grad()[0], real(2));
  EXPECT_EQ(x.grad()[1], real(4));
}

TEST(Backward, SecondCallOnConsumedGraphThrows) {
  Tensor x = Tensor::parameter({2}, {1, 2});
  Tape tape;
  TapeScope scope(tape);
  Tensor loss = sum(x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), StateError);
  tape.reset();
  Tensor again = sum(x);
  EXPECT_NO_THROW(tape.backward(again));
}

TEST(Backward, BatchSumEqualsSumOfPerSampleGradients) {
  std::mt19937_64 rng(21);
  Tensor w = random_tensor({3, 2}, rng);
  w.set_requires_grad(true);
  const Tensor x = random_tensor({4, 3}, rng);
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(silu(matmul(x, w))));
  }
  const std::vector<real> batched(w.grad().begin(), w.grad().end());
  w.zero_grad();
  for (std::size_t i = 0; i < 4; ++i) {
    const std::vector<std::size_t> row{i};
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(silu(matmul(gather_rows(x, row), w))));
  }
  for (std::size_t j = 0; j < batched.size(); ++j) EXPECT_NEAR(w.grad()[j], batched[j], 1e-5);
}

TEST(Ops, NonFiniteOutputIsAnError) {
  const Tensor big = Tensor::from({1, 1}, {std::numeric_limits<real>::max()});
  EXPECT_THROW(scale(big, 10), NumericError);
}

TEST(Adam, FirstStepMovesByAlphaTimesSign) {
  Tensor p = Tensor::parameter({3}, {1, 1, 1});
  Adam opt({p}, AdamOptions{real(1e-2), real(0.9), real(0.95), real(1e-8)});
  auto g = p.mutable_grad();
  g[0] = real(0.5);
  g[1] = real(-3);
  g[2] = real(1e-3);
  p.node()->grad_touched = true;
  opt.step();
  EXPECT_NEAR(p[0], 1 - 1e-2, 1e-6);
  EXPECT_NEAR(p[1], 1 + 1e-2, 1e-6);
  EXPECT_NEAR(p[2], 1 - 1e-2, 1e-5);
  for (real v : p.grad()) EXPECT_EQ(v, real(0));
}

TEST(Adam, ZeroGradientLeavesParameterAndCountsStep) {
  Tensor p = Tensor::parameter({2}, {0.25f, -4});
  Adam opt({p}, AdamOptions{});
  Tape tape;
  TapeScope scope(tape);
  tape.backward(sum(scale(p, 0)));
  opt.step();
  EXPECT_EQ(p[0], real(0.25));
  EXPECT_EQ(p[1], real(-4));
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Adam, MissingGradientBufferIsAnError) {
  Tensor p = Tensor::from({1}, {1});
  Adam opt({p}, AdamOptions{});
  EXPECT_THROW(opt.step(), StateError);
}

// Independent double-precision replay of the bias-corrected Adam recursion.
std::vector<double> adam_quadratic_oracle(double x, double alpha, double b1, double b2, int steps) {
  std::vector<double> path;
  double m = 0, v = 0;
  for (int t = 1; t <= steps; ++t) {
    const double g = 2 * x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    x -= alpha * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + 1e-8);
    path.push_back(x);
  }
  return path;
}

TEST(Adam, QuadraticDescentFollowsOracle) {
  const auto oracle = adam_quadratic_oracle(1.0, 0.1, 0.9, 0.95, 100);
  Tensor x = Tensor::parameter({1}, {1});
  Adam opt({x}, AdamOptions{real(0.1), real(0.9), real(0.95), real(1e-8)});
  real previous = 1;
  for (int step = 0; step < 100; ++step) {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(mul(x, x)));
    opt.step();
    ASSERT_NEAR(x[0], oracle[step], 1e-4) << "step " << step + 1;
    // The oracle shows momentum overshoot from step 12 on; the descent phase
    // before it is strictly monotone.
    if (step + 1 < 12) {
      EXPECT_LT(std::abs(x[0]), previous) << "step " << step + 1;
    }
    previous = std::abs(x[0]);
  }
  EXPECT_LT(std::abs(x[0]), real(0.01));
}

}  // namespace
}  // namespace lmol

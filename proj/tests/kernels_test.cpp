#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lmol/numcore/kernels.hpp"

namespace lmol::kernels {
namespace {

std::vector<real> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<real> v(n);
  for (auto& x : v) x = static_cast<real>(dist(rng));
  return v;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::kScalar};
  if (supported(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  return out;
}

// Reference product in double.
std::vector<double> reference_nn(std::size_t m, std::size_t n, std::size_t k,
                                 const std::vector<real>& a, const std::vector<real>& b) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += double(a[i * k + p]) * b[p * n + j];
  return c;
}

TEST(Kernels, ScalarIsAlwaysSupported) {
  EXPECT_TRUE(supported(Isa::kScalar));
  EXPECT_EQ(table(Isa::kScalar).isa, Isa::kScalar);
  EXPECT_EQ(name(Isa::kAvx2), "avx2");
}

TEST(Kernels, GemmVariantsMatchDoubleReference) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(1, 37);
  for (Isa isa : available()) {
    const Table& t = table(isa);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t m = dim(rng), n = dim(rng), k = dim(rng);
      const auto a = random_values(m * k, rng);
      const auto b = random_values(k * n, rng);
      const auto ref = reference_nn(m, n, k, a, b);
      std::vector<real> c(m * n, real(7));
      t.gemm_nn(m, n, k, a.data(), k, b.data(), n, c.data(), n, false);
      for (std::size_t i = 0; i < c.size(); ++i) ASSERT_NEAR(c[i], ref[i], 1e-4) << name(isa);

      // A^T stored as k x m.
      std::vector<real> at(k * m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
      std::vector<real> c2(m * n, real(1));
      t.gemm_tn(m, n, k, at.data(), m, b.data(), n, c2.data(), n, true);
      for (std::size_t i = 0; i < c2.size(); ++i) ASSERT_NEAR(c2[i], ref[i] + 1.0, 1e-4) << name(isa);

      real d = t.dot(k, a.data(), a.data());
      double dref = 0;
      for (std::size_t p = 0; p < k; ++p) dref += double(a[p]) * a[p];
      ASSERT_NEAR(d, dref, 1e-4);
    }
  }
}

TEST(Kernels, Avx2AgreesWithScalar) {
  if (!supported(Isa::kAvx2)) GTEST_SKIP() << "no AVX2 on this CPU/build";
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 70);
  const Table& s = table(Isa::kScalar);
  const Table& v = table(Isa::kAvx2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng), k = dim(rng);
    const auto a = random_values(m * k, rng);
    const auto b = random_values(k * n, rng);
    std::vector<real> cs(m * n), cv(m * n);
    s.gemm_nn(m, n, k, a.data(), k, b.data(), n, cs.data(), n, false);
    v.gemm_nn(m, n, k, a.data(), k, b.data(), n, cv.data(), n, false);
    for (std::size_t i = 0; i < cs.size(); ++i) ASSERT_NEAR(cs[i], cv[i], 1e-4);
    const auto x = random_values(n, rng);
    std::vector<real> ys = random_values(n, rng);
    std::vector<real> yv = ys;
    s.axpy(n, real(0.37), x.data(), ys.data());
    v.axpy(n, real(0.37), x.data(), yv.data());
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(ys[i], yv[i], 1e-6);
    ASSERT_NEAR(s.dot(n, x.data(), b.data()), v.dot(n, x.data(), b.data()), 1e-4);
  }
}

// A row's result must not depend on how many rows share the call; causal
// prefix invariance and the incremental decoder rely on it bit-for-bit.
TEST(Kernels, RowResultIndependentOfBatchHeight) {
  std::mt19937_64 rng(3);
  for (Isa isa : available()) {
    const Table& t = table(isa);
    for (std::size_t k : {1u, 7u, 16u, 64u}) {
      for (std::size_t n : {3u, 8u, 16u, 45u, 64u}) {
        const std::size_t m = 11;
        const auto a = random_values(m * k, rng);
        const auto b = random_values(k * n, rng);
        std::vector<real> full(m * n);
        t.gemm_nn(m, n, k, a.data(), k, b.data(), n, full.data(), n, false);
        for (std::size_t i = 0; i < m; ++i) {
          std::vector<real> one(n);
          t.gemm_nn(1, n, k, a.data() + i * k, k, b.data(), n, one.data(), n, false);
          ASSERT_EQ(std::memcmp(one.data(), full.data() + i * n, n * sizeof(real)), 0)
              << name(isa) << " row " << i << " k " << k << " n " << n;
        }
      }
    }
  }
}

TEST(Kernels, GemmNtMatchesExplicitTranspose) {
  std::mt19937_64 rng(4);
  const std::size_t m = 5, n = 9, k = 13;
  const auto a = random_values(m * k, rng);
  const auto bt = random_values(n * k, rng);  // B stored n x k
  std::vector<real> b(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) b[p * n + j] = bt[j * k + p];
  const auto ref = reference_nn(m, n, k, a, b);
  std::vector<real> c(m * n);
  gemm_nt(m, n, k, a.data(), k, bt.data(), k, c.data(), n, false);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-4);
}

TEST(Kernels, SelectSwitchesActiveTable) {
  const Isa before = active().isa;
  select(Isa::kScalar);
  EXPECT_EQ(active().isa, Isa::kScalar);
  select(before);
  EXPECT_EQ(active().isa, before);
}

}  // namespace
}  // namespace lmol::kernels

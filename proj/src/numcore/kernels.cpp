#include "lmol/numcore/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <vector>

#include "kernels_internal.hpp"
#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(LMOL_HAVE_AVX2_TABLE) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  if (const char* env = std::getenv("LMOL_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &table(Isa::kScalar);
    if (want == "avx2" && supported(Isa::kAvx2)) return &table(Isa::kAvx2);
  }
  return supported(Isa::kAvx2) ? &table(Isa::kAvx2) : &table(Isa::kScalar);
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

const Table& table(Isa isa) {
  if (!supported(isa)) {
    throw ConfigError("kernel table '" + std::string(name(isa)) + "' is not supported here");
  }
#ifdef LMOL_HAVE_AVX2_TABLE
  if (isa == Isa::kAvx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
             const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate) {
  thread_local std::vector<real> scratch;
  scratch.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) scratch[p * n + j] = b[j * ldb + p];
  }
  active().gemm_nn(m, n, k, a, lda, scratch.data(), n, c, ldc, accumulate);
}

}  // namespace lmol::kernels

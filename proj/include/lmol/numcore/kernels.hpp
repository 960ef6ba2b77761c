#pragma once

#include <cstddef>
#include <string_view>

#include "lmol/numcore/real.hpp"

// Dense inner-loop kernels behind the tensor ops. A scalar reference table is
// always available; vectorized tables are selected at runtime when the CPU
// supports them. Every kernel fixes the reduction order of each output element
// as a function of the reduction length only, so a row's result never depends
// on how many other rows are processed in the same call.
namespace lmol::inline LMOL_PRECISION_NS::kernels {

enum class Isa { kScalar, kAvx2 };

struct Table {
  Isa isa;
  // C[M,N] (+)= A[M,K] * B[K,N]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
                  const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate);
  // C[M,N] (+)= A[K,M]^T * B[K,N]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
                  const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate);
  real (*dot)(std::size_t n, const real* a, const real* b);
  // y += alpha * x
  void (*axpy)(std::size_t n, real alpha, const real* x, real* y);
};

std::string_view name(Isa isa);

// True when this build carries the table and the running CPU can execute it.
bool supported(Isa isa);

const Table& table(Isa isa);

// The table used by all tensor ops. Chosen on first use from LMOL_ISA
// ("scalar" or "avx2") if set, otherwise the best supported one.
const Table& active();

// Overrides the active table; throws ConfigError when unsupported.
void select(Isa isa);

// C[M,N] (+)= A[M,K] * B[N,K]^T, implemented as a transpose of B followed by
// gemm_nn on the active table.
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const real* a, std::size_t lda,
             const real* b, std::size_t ldb, real* c, std::size_t ldc, bool accumulate);

}  // namespace lmol::kernels

#pragma once

#include "lmol/numcore/kernels.hpp"

namespace lmol::inline LMOL_PRECISION_NS::kernels::detail {

const Table& scalar_table();

#if !defined(LMOL_REAL_DOUBLE) && (defined(__x86_64__) || defined(_M_X64))
#define LMOL_HAVE_AVX2_TABLE 1
const Table& avx2_table();
#endif

}  // namespace lmol::kernels::detail

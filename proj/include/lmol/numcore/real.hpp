#pragma once

// Precision-dependent code lives in an inline namespace named after the
// precision, so the float and double builds can link into one program.
#ifdef LMOL_REAL_DOUBLE
#define LMOL_PRECISION_NS f64
#else
#define LMOL_PRECISION_NS f32
#endif

namespace lmol::inline LMOL_PRECISION_NS {

// Training and inference run in single precision. Building with
// LMOL_REAL_DOUBLE produces the 64-bit variant used by gradient checks.
#ifdef LMOL_REAL_DOUBLE
using real = double;
inline constexpr bool kDoublePrecision = true;
#else
using real = float;
inline constexpr bool kDoublePrecision = false;
#endif

}  // namespace lmol

#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct GradcheckReport {
  real max_rel_error = 0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  real analytic = 0;
  real numeric = 0;
  std::size_t checked = 0;
};

// Relative error used by gradcheck: |a - n| / max(|a|, |n|, floor), and 0 when
// both sides are exactly 0.
real gradcheck_relative_error(real analytic, real numeric, real floor = real(1e-6));

// Compares the tape gradient of the scalar f() with central differences
// (f(x+eps) - f(x-eps)) / 2eps for every element of every parameter. f must be
// deterministic. When max_elements_per_param is non-zero only that many evenly
// spaced elements of each parameter are probed.
GradcheckReport gradcheck_report(const std::function<Tensor()>& f, std::span<Tensor> params,
                                 real eps, std::size_t max_elements_per_param = 0);

real gradcheck(const std::function<Tensor()>& f, std::span<Tensor> params, real eps);

}  // namespace lmol

#include "lmol/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lmol/numcore/tape.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

real gradcheck_relative_error(real analytic, real numeric, real floor) {
  const real diff = std::abs(analytic - numeric);
  if (diff == real(0)) return 0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradcheckReport gradcheck_report(const std::function<Tensor()>& f, std::span<Tensor> params,
                                 real eps, std::size_t max_elements_per_param) {
  for (Tensor& p : params) p.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = f();
    tape.backward(loss);
  }
  std::vector<std::vector<real>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    analytic.emplace_back(p.grad().begin(), p.grad().end());
    p.zero_grad();
  }

  GradcheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto data = params[pi].mutable_data();
    const std::size_t n = data.size();
    const std::size_t stride =
        (max_elements_per_param == 0 || n <= max_elements_per_param) ? 1 : n / max_elements_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const real saved = data[i];
      data[i] = saved + eps;
      const real up = f().item();
      data[i] = saved - eps;
      const real down = f().item();
      data[i] = saved;
      const real numeric = (up - down) / (2 * eps);
      const real err = gradcheck_relative_error(analytic[pi][i], numeric);
      ++report.checked;
      if (err > report.max_rel_error || report.checked == 1) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        if (err >= report.max_rel_error) {
          report.worst_param = pi;
          report.worst_index = i;
          report.analytic = analytic[pi][i];
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

real gradcheck(const std::function<Tensor()>& f, std::span<Tensor> params, real eps) {
  return gradcheck_report(f, params, eps).max_rel_error;
}

}  // namespace lmol

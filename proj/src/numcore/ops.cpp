#include "lmol/numcore/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "lmol/error.hpp"
#include "lmol/numcore/kernels.hpp"
#include "lmol/numcore/rowops.hpp"
#include "lmol/numcore/tape.hpp"

namespace lmol::inline LMOL_PRECISION_NS {
namespace {

using NodePtr = std::shared_ptr<detail::TensorNode>;

std::atomic<bool> g_finite_checks{true};

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::active()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor make_output(Shape shape, std::vector<real> data, bool record, const char* op) {
  if (g_finite_checks.load(std::memory_order_relaxed)) {
    for (real v : data) {
      if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
  Tensor out = Tensor::from(std::move(shape), std::move(data));
  if (record) out.node()->requires_grad = true;
  return out;
}

// Gradient of an output node, or nullptr when nothing flowed into it.
const real* upstream(const NodePtr& out) {
  return out->grad.empty() ? nullptr : out->grad.data();
}

// Grad buffer of an input that wants one, marked as touched; else nullptr.
real* sink(const NodePtr& in) {
  if (!in->requires_grad) return nullptr;
  in->ensure_grad();
  in->grad_touched = true;
  return in->grad.data();
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + " expects rank " + std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

void set_finite_checks(bool on) noexcept { g_finite_checks.store(on, std::memory_order_relaxed); }
bool finite_checks() noexcept { return g_finite_checks.load(std::memory_order_relaxed); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& kt = kernels::active();
  const bool rec = recording({&a, &b});
  if (a.rank() == 2 && b.rank() == 2) {
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
      throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                       shape_string(b.shape()));
    }
    std::vector<real> c(m * n);
    kt.gemm_nn(m, n, k, a.data().data(), k, b.data().data(), n, c.data(), n, false);
    Tensor out = make_output({m, n}, std::move(c), rec, "matmul");
    if (rec) {
      Tape::active()->record([an = a.node(), bn = b.node(), on = out.node(), m, n, k] {
        const real* g = upstream(on);
        if (!g) return;
        if (real* ga = sink(an)) kernels::gemm_nt(m, k, n, g, n, bn->data.data(), n, ga, k, true);
        if (real* gb = sink(bn)) {
          kernels::active().gemm_tn(k, n, m, an->data.data(), k, g, n, gb, n, true);
        }
      });
    }
    return out;
  }
  if (a.rank() == 3 && (b.rank() == 3 || b.rank() == 2)) {
    const bool shared = b.rank() == 2;
    const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2);
    const std::size_t bk = shared ? b.dim(0) : b.dim(1);
    const std::size_t n = shared ? b.dim(1) : b.dim(2);
    if (!shared && b.dim(0) != batch) {
      throw ShapeError("matmul: batch sizes differ " + shape_string(a.shape()) + " x " +
                       shape_string(b.shape()));
    }
    if (bk != k) {
      throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                       shape_string(b.shape()));
    }
    std::vector<real> c(batch * m * n);
    const std::size_t b_step = shared ? 0 : k * n;
    for (std::size_t i = 0; i < batch; ++i) {
      kt.gemm_nn(m, n, k, a.data().data() + i * m * k, k, b.data().data() + i * b_step, n,
                 c.data() + i * m * n, n, false);
    }
    Tensor out = make_output({batch, m, n}, std::move(c), rec, "matmul");
    if (rec) {
      Tape::active()->record([an = a.node(), bn = b.node(), on = out.node(), batch, m, n, k, b_step] {
        const real* g = upstream(on);
        if (!g) return;
        real* ga = sink(an);
        real* gb = sink(bn);
        for (std::size_t i = 0; i < batch; ++i) {
          const real* gi = g + i * m * n;
          if (ga) kernels::gemm_nt(m, k, n, gi, n, bn->data.data() + i * b_step, n, ga + i * m * k, k, true);
          if (gb) {
            kernels::active().gemm_tn(k, n, m, an->data.data() + i * m * k, k, gi, n,
                                      gb + i * b_step, n, true);
          }
        }
      });
    }
    return out;
  }
  throw ShapeError("matmul: unsupported ranks " + shape_string(a.shape()) + " x " +
                   shape_string(b.shape()));
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<real> out(r * c);
  const auto x = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  }
  const bool rec = recording({&a});
  Tensor t = make_output({c, r}, std::move(out), rec, "transpose");
  if (rec) {
    Tape::active()->record([an = a.node(), on = t.node(), r, c] {
      const real* g = upstream(on);
      real* ga = g ? sink(an) : nullptr;
      if (!ga) return;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
      }
    });
  }
  return t;
}

namespace {

template <typename Fwd, typename Bwd>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, Bwd bwd) {
  require_same_shape(a, b, op);
  const std::size_t n = a.numel();
  std::vector<real> out(n);
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(x[i], y[i]);
  const bool rec = recording({&a, &b});
  Tensor t = make_output(a.shape(), std::move(out), rec, op);
  if (rec) {
    Tape::active()->record([an = a.node(), bn = b.node(), on = t.node(), n, bwd] {
      const real* g = upstream(on);
      if (!g) return;
      real* ga = sink(an);
      real* gb = sink(bn);
      for (std::size_t i = 0; i < n; ++i) {
        real da = 0, db = 0;
        bwd(an->data[i], bn->data[i], g[i], da, db);
        if (ga) ga[i] += da;
        if (gb) gb[i] += db;
      }
    });
  }
  return t;
}

template <typename Fwd, typename Bwd>
Tensor unary_elementwise(const Tensor& a, const char* op, Fwd fwd, Bwd bwd) {
  const std::size_t n = a.numel();
  std::vector<real> out(n);
  const auto x = a.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(x[i]);
  const bool rec = recording({&a});
  Tensor t = make_output(a.shape(), std::move(out), rec, op);
  if (rec) {
    Tape::active()->record([an = a.node(), on = t.node(), n, bwd] {
      const real* g = upstream(on);
      real* ga = g ? sink(an) : nullptr;
      if (!ga) return;
      for (std::size_t i = 0; i < n; ++i) ga[i] += bwd(an->data[i], g[i]);
    });
  }
  return t;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "add", [](real x, real y) { return x + y; },
      [](real, real, real g, real& da, real& db) {
        da = g;
        db = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "sub", [](real x, real y) { return x - y; },
      [](real, real, real g, real& da, real& db) {
        da = g;
        db = -g;
      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      a, b, "mul", [](real x, real y) { return x * y; },
      [](real x, real y, real g, real& da, real& db) {
        da = g * y;
        db = g * x;
      });
}

Tensor scale(const Tensor& a, real factor) {
  return unary_elementwise(
      a, "scale", [factor](real x) { return x * factor; },
      [factor](real, real g) { return g * factor; });
}

Tensor silu(const Tensor& a) {
  return unary_elementwise(
      a, "silu", [](real x) { return rowops::silu(x); },
      [](real x, real g) {
        const real s = real(1) / (real(1) + std::exp(-x));
        return g * (s + x * s * (real(1) - s));
      });
}

Tensor add_row(const Tensor& a, const Tensor& v) {
  require_rank(a, 2, "add_row");
  const std::size_t r = a.dim(0), c = a.dim(1);
  if (v.numel() != c) {
    throw ShapeError("add_row: vector of " + std::to_string(v.numel()) + " values for " +
                     std::to_string(c) + " columns");
  }
  std::vector<real> out(a.data().begin(), a.data().end());
  const auto vv = v.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += vv[j];
  }
  const bool rec = recording({&a, &v});
  Tensor t = make_output({r, c}, std::move(out), rec, "add_row");
  if (rec) {
    Tape::active()->record([an = a.node(), vn = v.node(), on = t.node(), r, c] {
      const real* g = upstream(on);
      if (!g) return;
      if (real* ga = sink(an)) {
        for (std::size_t i = 0; i < r * c; ++i) ga[i] += g[i];
      }
      if (real* gv = sink(vn)) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) gv[j] += g[i * c + j];
        }
      }
    });
  }
  return t;
}

Tensor outer(const Tensor& x, const Tensor& w) {
  const std::size_t r = x.numel(), c = w.numel();
  if (x.rank() > 2 || (x.rank() == 2 && x.dim(1) != 1)) {
    throw ShapeError("outer: lhs must be a vector, got " + shape_string(x.shape()));
  }
  std::vector<real> out(r * c);
  const auto xv = x.data();
  const auto wv = w.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = xv[i] * wv[j];
  }
  const bool rec = recording({&x, &w});
  Tensor t = make_output({r, c}, std::move(out), rec, "outer");
  if (rec) {
    Tape::active()->record([xn = x.node(), wn = w.node(), on = t.node(), r, c] {
      const real* g = upstream(on);
      if (!g) return;
      real* gx = sink(xn);
      real* gw = sink(wn);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          if (gx) gx[i] += g[i * c + j] * wn->data[j];
          if (gw) gw[j] += g[i * c + j] * xn->data[i];
        }
      }
    });
  }
  return t;
}

Tensor sum(const Tensor& a) {
  real total = 0;
  for (real v : a.data()) total += v;
  const bool rec = recording({&a});
  Tensor t = make_output({1}, {total}, rec, "sum");
  if (rec) {
    Tape::active()->record([an = a.node(), on = t.node()] {
      const real* g = upstream(on);
      real* ga = g ? sink(an) : nullptr;
      if (!ga) return;
      for (std::size_t i = 0; i < an->data.size(); ++i) ga[i] += g[0];
    });
  }
  return t;
}

namespace {

bool is_masked(real v) {
  return v == -std::numeric_limits<real>::infinity() || v <= kMaskValue / 2;
}

}  // namespace

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("softmax_rows expects rank >= 2");
  const std::size_t c = x.shape().back();
  const std::size_t r = x.numel() / c;
  std::vector<real> out(r * c);
  const auto xv = x.data();
  for (std::size_t i = 0; i < r; ++i) {
    const real* row = xv.data() + i * c;
    real* o = out.data() + i * c;
    real mx = -std::numeric_limits<real>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (is_masked(row[j])) continue;
      any = true;
      mx = std::max(mx, row[j]);
    }
    if (!any) throw NumericError("softmax_rows: row " + std::to_string(i) + " is entirely masked");
    real total = 0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = is_masked(row[j]) ? real(0) : std::exp(row[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= total;
  }
  const bool rec = recording({&x});
  Tensor t = make_output(x.shape(), std::move(out), rec, "softmax_rows");
  if (rec) {
    Tape::active()->record([xn = x.node(), on = t.node(), r, c] {
      const real* g = upstream(on);
      real* gx = g ? sink(xn) : nullptr;
      if (!gx) return;
      const real* p = on->data.data();
      for (std::size_t i = 0; i < r; ++i) {
        real inner = 0;
        for (std::size_t j = 0; j < c; ++j) inner += g[i * c + j] * p[i * c + j];
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += p[i * c + j] * (g[i * c + j] - inner);
      }
    });
  }
  return t;
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_id,
                     real normalizer) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t n = logits.dim(0), voc = logits.dim(1);
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(n) + " rows");
  }
  std::size_t counted = 0;
  for (int t : targets) {
    if (t == ignore_id) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= voc) {
      throw IndexError("cross_entropy: target " + std::to_string(t) + " outside [0, " +
                       std::to_string(voc) + ")");
    }
    ++counted;
  }
  const real denom = normalizer > 0 ? normalizer : static_cast<real>(std::max<std::size_t>(counted, 1));
  // Softmax rows of the counted positions, kept for the backward pass.
  auto probs = std::make_shared<std::vector<real>>(counted * voc);
  const auto lv = logits.data();
  double total = 0;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] == ignore_id) continue;
    const real* row = lv.data() + i * voc;
    real* p = probs->data() + slot * voc;
    const real mx = *std::max_element(row, row + voc);
    real z = 0;
    for (std::size_t j = 0; j < voc; ++j) {
      p[j] = std::exp(row[j] - mx);
      z += p[j];
    }
    for (std::size_t j = 0; j < voc; ++j) p[j] /= z;
    total += static_cast<double>(mx + std::log(z) - row[targets[i]]);
    ++slot;
  }
  const real value = counted ? static_cast<real>(total) / denom : real(0);
  const bool rec = recording({&logits});
  Tensor t = make_output({1}, {value}, rec, "cross_entropy");
  if (rec) {
    std::vector<int> tg(targets.begin(), targets.end());
    Tape::active()->record(
        [ln = logits.node(), on = t.node(), probs, tg = std::move(tg), ignore_id, voc, denom] {
          const real* g = upstream(on);
          real* gl = g ? sink(ln) : nullptr;
          if (!gl) return;
          const real coef = g[0] / denom;
          std::size_t slot = 0;
          for (std::size_t i = 0; i < tg.size(); ++i) {
            if (tg[i] == ignore_id) continue;
            const real* p = probs->data() + slot * voc;
            real* row = gl + i * voc;
            for (std::size_t j = 0; j < voc; ++j) row[j] += coef * p[j];
            row[tg[i]] -= coef;
            ++slot;
          }
        });
  }
  return t;
}

Tensor rmsnorm(const Tensor& x, const Tensor& gain, real eps) {
  require_rank(x, 2, "rmsnorm");
  const std::size_t r = x.dim(0), c = x.dim(1);
  if (gain.numel() != c) throw ShapeError("rmsnorm: gain length does not match row width");
  std::vector<real> out(r * c);
  auto inv = std::make_shared<std::vector<real>>(r);
  const real* xv = x.data().data();
  const real* gv = gain.data().data();
  for (std::size_t i = 0; i < r; ++i) {
    (*inv)[i] = rowops::rmsnorm(c, xv + i * c, gv, eps, out.data() + i * c);
  }
  const bool rec = recording({&x, &gain});
  Tensor t = make_output({r, c}, std::move(out), rec, "rmsnorm");
  if (rec) {
    Tape::active()->record([xn = x.node(), gn = gain.node(), on = t.node(), inv, r, c] {
      const real* g = upstream(on);
      if (!g) return;
      real* gx = sink(xn);
      real* gg = sink(gn);
      const real* xv = xn->data.data();
      const real* gain = gn->data.data();
      for (std::size_t i = 0; i < r; ++i) {
        const real s = (*inv)[i];
        const real* xi = xv + i * c;
        const real* gi = g + i * c;
        if (gg) {
          for (std::size_t j = 0; j < c; ++j) gg[j] += gi[j] * xi[j] * s;
        }
        if (gx) {
          // y = x s w, s = (mean(x^2)+eps)^(-1/2)
          real inner = 0;
          for (std::size_t j = 0; j < c; ++j) inner += gi[j] * gain[j] * xi[j];
          const real k = inner * s * s * s / static_cast<real>(c);
          for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += gi[j] * gain[j] * s - k * xi[j];
        }
      }
    });
  }
  return t;
}

Tensor rope(const Tensor& x, std::span<const std::size_t> positions, std::size_t n_heads,
            real base) {
  require_rank(x, 2, "rope");
  const std::size_t r = x.dim(0), c = x.dim(1);
  if (n_heads == 0 || c % n_heads != 0) throw ConfigError("rope: width not divisible by head count");
  const std::size_t d_head = c / n_heads;
  if (d_head % 2 != 0) throw ConfigError("rope: head dimension must be even");
  if (positions.size() != r) throw ShapeError("rope: one position per row required");
  std::vector<real> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < r; ++i) rowops::rope(n_heads, d_head, positions[i], base, out.data() + i * c);
  const bool rec = recording({&x});
  Tensor t = make_output({r, c}, std::move(out), rec, "rope");
  if (rec) {
    std::vector<std::size_t> pos(positions.begin(), positions.end());
    Tape::active()->record([xn = x.node(), on = t.node(), pos = std::move(pos), n_heads, d_head, base, c] {
      const real* g = upstream(on);
      real* gx = g ? sink(xn) : nullptr;
      if (!gx) return;
      std::vector<real> row(c);
      for (std::size_t i = 0; i < pos.size(); ++i) {
        std::copy(g + i * c, g + (i + 1) * c, row.begin());
        rowops::rope(n_heads, d_head, pos[i], base, row.data(), real(-1));
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += row[j];
      }
    });
  }
  return t;
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows) {
  require_rank(table, 2, "gather_rows");
  const std::size_t v = table.dim(0), c = table.dim(1);
  if (rows.empty()) throw ShapeError("gather_rows: no rows requested");
  std::vector<real> out(rows.size() * c);
  const auto tv = table.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= v) {
      throw IndexError("gather_rows: row " + std::to_string(rows[i]) + " outside table of " +
                       std::to_string(v));
    }
    std::copy_n(tv.data() + rows[i] * c, c, out.data() + i * c);
  }
  const bool rec = recording({&table});
  Tensor t = make_output({rows.size(), c}, std::move(out), rec, "gather_rows");
  if (rec) {
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    Tape::active()->record([tn = table.node(), on = t.node(), idx = std::move(idx), c] {
      const real* g = upstream(on);
      real* gt = g ? sink(tn) : nullptr;
      if (!gt) return;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        real* dst = gt + idx[i] * c;
        for (std::size_t j = 0; j < c; ++j) dst[j] += g[i * c + j];
      }
    });
  }
  return t;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
  const std::size_t c = parts[0].dim(1);
  std::size_t r = 0;
  bool rec = false;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != c) throw ShapeError("concat_rows: column counts differ");
    r += p.dim(0);
    rec = rec || recording({&p});
  }
  std::vector<real> out;
  out.reserve(r * c);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  Tensor t = make_output({r, c}, std::move(out), rec, "concat_rows");
  if (rec) {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.node());
    Tape::active()->record([nodes = std::move(nodes), on = t.node()] {
      const real* g = upstream(on);
      if (!g) return;
      std::size_t offset = 0;
      for (const auto& n : nodes) {
        if (real* gn = sink(n)) {
          for (std::size_t i = 0; i < n->data.size(); ++i) gn[i] += g[offset + i];
        }
        offset += n->data.size();
      }
    });
  }
  return t;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const std::size_t r = parts[0].dim(0);
  std::size_t c = 0;
  bool rec = false;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != r) throw ShapeError("concat_cols: row counts differ");
    c += p.dim(1);
    rec = rec || recording({&p});
  }
  std::vector<real> out(r * c);
  std::size_t col = 0;
  for (const Tensor& p : parts) {
    const std::size_t pc = p.dim(1);
    for (std::size_t i = 0; i < r; ++i) std::copy_n(p.data().data() + i * pc, pc, out.data() + i * c + col);
    col += pc;
  }
  Tensor t = make_output({r, c}, std::move(out), rec, "concat_cols");
  if (rec) {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.node());
    Tape::active()->record([nodes = std::move(nodes), on = t.node(), r, c] {
      const real* g = upstream(on);
      if (!g) return;
      std::size_t col = 0;
      for (const auto& n : nodes) {
        const std::size_t pc = n->shape[1];
        if (real* gn = sink(n)) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < pc; ++j) gn[i * pc + j] += g[i * c + col + j];
          }
        }
        col += pc;
      }
    });
  }
  return t;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_rank(a, 2, "slice_cols");
  const std::size_t r = a.dim(0), c = a.dim(1);
  if (count == 0 || begin + count > c) throw ShapeError("slice_cols: range outside tensor");
  std::vector<real> out(r * count);
  for (std::size_t i = 0; i < r; ++i) std::copy_n(a.data().data() + i * c + begin, count, out.data() + i * count);
  const bool rec = recording({&a});
  Tensor t = make_output({r, count}, std::move(out), rec, "slice_cols");
  if (rec) {
    Tape::active()->record([an = a.node(), on = t.node(), r, c, begin, count] {
      const real* g = upstream(on);
      real* ga = g ? sink(an) : nullptr;
      if (!ga) return;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < count; ++j) ga[i * c + begin + j] += g[i * count + j];
      }
    });
  }
  return t;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: " + shape_string(a.shape()) + " -> " + shape_string(shape));
  }
  const bool rec = recording({&a});
  Tensor t = make_output(std::move(shape), std::vector<real>(a.data().begin(), a.data().end()), rec, "reshape");
  if (rec) {
    Tape::active()->record([an = a.node(), on = t.node()] {
      const real* g = upstream(on);
      real* ga = g ? sink(an) : nullptr;
      if (!ga) return;
      for (std::size_t i = 0; i < an->data.size(); ++i) ga[i] += g[i];
    });
  }
  return t;
}

Tensor dropout(const Tensor& x, real p, bool training, std::mt19937_64* rng) {
  if (!training || p <= 0) return x;
  if (p >= 1) throw ConfigError("dropout probability must be below 1");
  if (!rng) throw StateError("dropout in training mode needs an rng");
  const std::size_t n = x.numel();
  auto keep = std::make_shared<std::vector<real>>(n);
  std::bernoulli_distribution drop(static_cast<double>(p));
  const real scale_kept = real(1) / (real(1) - p);
  std::vector<real> out(n);
  const auto xv = x.data();
  for (std::size_t i = 0; i < n; ++i) {
    (*keep)[i] = drop(*rng) ? real(0) : scale_kept;
    out[i] = xv[i] * (*keep)[i];
  }
  const bool rec = recording({&x});
  Tensor t = make_output(x.shape(), std::move(out), rec, "dropout");
  if (rec) {
    Tape::active()->record([xn = x.node(), on = t.node(), keep] {
      const real* g = upstream(on);
      real* gx = g ? sink(xn) : nullptr;
      if (!gx) return;
      for (std::size_t i = 0; i < keep->size(); ++i) gx[i] += g[i] * (*keep)[i];
    });
  }
  return t;
}

Tensor causal_mask(std::size_t length) {
  Tensor m = Tensor::zeros({length, length});
  auto d = m.mutable_data();
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t j = i + 1; j < length; ++j) d[i * length + j] = kMaskValue;
  }
  return m;
}

Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                        std::span<const std::size_t> offsets, std::size_t n_heads,
                        std::vector<real>* weights) {
  require_rank(q, 2, "causal_attention");
  require_same_shape(q, k, "causal_attention");
  require_same_shape(q, v, "causal_attention");
  const std::size_t rows = q.dim(0), width = q.dim(1);
  if (n_heads == 0 || width % n_heads != 0) {
    throw ConfigError("causal_attention: width not divisible by head count");
  }
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != rows) {
    throw ShapeError("causal_attention: segment offsets must cover all rows");
  }
  const std::size_t d = width / n_heads;
  const real scale_qk = real(1) / std::sqrt(static_cast<real>(d));
  const std::size_t n_seg = offsets.size() - 1;

  // Probabilities per segment and head, each block len x len.
  std::vector<std::size_t> block_start(n_seg + 1, 0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    if (offsets[s + 1] <= offsets[s]) throw ShapeError("causal_attention: empty segment");
    const std::size_t len = offsets[s + 1] - offsets[s];
    block_start[s + 1] = block_start[s] + n_heads * len * len;
  }
  auto probs = std::make_shared<std::vector<real>>(block_start[n_seg]);
  std::vector<real> out(rows * width);
  const real* qv = q.data().data();
  const real* kv = k.data().data();
  const real* vv = v.data().data();
  for (std::size_t s = 0; s < n_seg; ++s) {
    const std::size_t o = offsets[s], len = offsets[s + 1] - offsets[s];
    for (std::size_t h = 0; h < n_heads; ++h) {
      real* p = probs->data() + block_start[s] + h * len * len;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t row = o + i;
        rowops::attend(d, qv + row * width + h * d, kv + o * width + h * d, width,
                       vv + o * width + h * d, width, i + 1, len, scale_qk, p + i * len,
                       out.data() + row * width + h * d);
      }
    }
  }
  if (weights) *weights = *probs;
  const bool rec = recording({&q, &k, &v});
  Tensor t = make_output({rows, width}, std::move(out), rec, "causal_attention");
  if (rec) {
    std::vector<std::size_t> offs(offsets.begin(), offsets.end());
    Tape::active()->record([qn = q.node(), kn = k.node(), vn = v.node(), on = t.node(), probs,
                            offs = std::move(offs), block_start = std::move(block_start), n_heads,
                            d, width, scale_qk] {
      const real* g = upstream(on);
      if (!g) return;
      real* gq = sink(qn);
      real* gk = sink(kn);
      real* gv = sink(vn);
      const auto& kt = kernels::active();
      const real* qv = qn->data.data();
      const real* kv = kn->data.data();
      const real* vv = vn->data.data();
      std::vector<real> dscore;
      for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
        const std::size_t o = offs[s], len = offs[s + 1] - offs[s];
        dscore.resize(len);
        for (std::size_t h = 0; h < n_heads; ++h) {
          const real* p = probs->data() + block_start[s] + h * len * len;
          for (std::size_t i = 0; i < len; ++i) {
            const real* gi = g + (o + i) * width + h * d;
            const real* pi = p + i * len;
            // Masked probabilities are exactly zero, so only j <= i contributes.
            real inner = 0;
            for (std::size_t j = 0; j <= i; ++j) {
              const real dp = kt.dot(d, gi, vv + (o + j) * width + h * d);
              dscore[j] = dp;
              inner += pi[j] * dp;
              if (gv) kt.axpy(d, pi[j], gi, gv + (o + j) * width + h * d);
            }
            for (std::size_t j = 0; j <= i; ++j) {
              const real ds = pi[j] * (dscore[j] - inner) * scale_qk;
              if (ds == real(0)) continue;
              if (gq) kt.axpy(d, ds, kv + (o + j) * width + h * d, gq + (o + i) * width + h * d);
              if (gk) kt.axpy(d, ds, qv + (o + i) * width + h * d, gk + (o + j) * width + h * d);
            }
          }
        }
      }
    });
  }
  return t;
}

}  // namespace lmol

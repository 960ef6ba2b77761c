#include "lmol/numcore/tape.hpp"

#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {
namespace {

thread_local Tape* g_active = nullptr;

}  // namespace

Tape::~Tape() {
  if (g_active == this) g_active = nullptr;
}

Tape* Tape::active() noexcept { return g_active; }

void Tape::record(std::function<void()> backward_fn) {
  if (consumed_) throw StateError("cannot record onto a consumed tape; call reset() first");
  entries_.push_back(std::move(backward_fn));
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("backward() called twice on the same graph");
  if (loss.numel() != 1) throw StateError("backward() needs a scalar loss");
  if (!loss.requires_grad()) throw StateError("loss does not depend on any parameter");
  consumed_ = true;
  auto& node = *loss.node();
  node.ensure_grad();
  node.grad[0] += real(1);
  node.grad_touched = true;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  entries_.clear();
}

void Tape::reset() {
  entries_.clear();
  consumed_ = false;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active) { g_active = &tape; }

TapeScope::~TapeScope() { g_active = previous_; }

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (!tape) throw StateError("backward() needs an active tape");
  tape->backward(loss);
}

}  // namespace lmol

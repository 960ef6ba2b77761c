#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lmol/numcore/tensor.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

// Records backward closures in execution order while active. One tape serves
// one forward/backward pass; reset() before recording the next step.
class Tape {
 public:
  Tape() = default;
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // The tape ops record onto, or nullptr (no recording).
  static Tape* active() noexcept;

  void record(std::function<void()> backward_fn);

  // Seeds d(loss)/d(loss) = 1 and replays the closures in reverse. Throws
  // StateError when called twice without reset() or when loss is not scalar.
  void backward(const Tensor& loss);

  void reset();
  bool consumed() const noexcept { return consumed_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  friend class TapeScope;
  std::vector<std::function<void()>> entries_;
  bool consumed_ = false;
};

// Makes a tape active for the lifetime of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Runs backward on the active tape.
void backward(const Tensor& loss);

}  // namespace lmol

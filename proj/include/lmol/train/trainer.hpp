#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lmol/model/params.hpp"
#include "lmol/numcore/adam.hpp"
#include "lmol/train/batch.hpp"
#include "lmol/train/dataset.hpp"

namespace lmol::inline LMOL_PRECISION_NS {

struct TrainConfig {
  std::size_t batch_size = 256;  // rows per micro-batch
  std::size_t grad_accum = 4;    // micro-batches per optimizer step
  real p_del = real(0.15);
  real learning_rate = real(1e-4);
  real beta1 = real(0.9);
  real beta2 = real(0.95);
  real epsilon = real(1e-8);
  std::size_t max_steps = 1000;
  std::uint64_t seed = 0;
  std::size_t eval_interval = 100;
  std::size_t eval_rows = 512;  // test rows scored per evaluation (0 = all)
  bool use_fragments = true;
  real clip_norm = 0;  // 0 disables clipping

  // Throws ConfigError for non-positive sizes or p_del outside [0, 1].
  void validate() const;
};

// Loss of one micro-batch set: forward, masked cross-entropy normalised by the
// total number of trained tokens, backward. Gradients accumulate into params;
// returns the mean token loss.
real accumulate_gradients(const ModelParams& params, std::span<const Batch> micro_batches, bool training,
                          std::span<std::mt19937_64> dropout_rngs);

// Mean token loss without gradients or dropout.
real evaluate_loss(const ModelParams& params, std::span<const Batch> batches);

// Owns the optimizer and the deterministic data stream. Every random choice
// of optimizer step s (row order, SCL, fragment spans, dropout) derives from
// (seed, s), so a run resumed at step s continues exactly as if it had never
// stopped.
class Trainer {
 public:
  Trainer(ModelParams& params, TrainConfig config, std::span<const Example> train, std::span<const Example> test);

  // One optimizer step over grad_accum micro-batches; returns the mean loss.
  // Throws NumericError when the loss is not finite.
  real step();
  // Loss on the first eval_rows test rows with a fixed condition draw.
  real test_loss() const;

  std::size_t steps_done() const noexcept { return step_; }
  Adam& optimizer() noexcept { return adam_; }
  const TrainConfig& config() const noexcept { return config_; }
  // Continue from a checkpoint taken after `step` optimizer steps.
  void resume(std::size_t step);

  // Batches of optimizer step `s`, as step() would build them.
  std::vector<Batch> micro_batches(std::size_t s) const;

 private:
  const Example* example_at(std::size_t global) const;

  ModelParams& params_;
  TrainConfig config_;
  std::span<const Example> train_, test_;
  Adam adam_;
  std::size_t step_ = 0;
  std::vector<Batch> test_batches_;
  mutable std::size_t cached_epoch_ = SIZE_MAX;
  mutable std::vector<std::size_t> permutation_;
};

struct MetricsRow {
  std::size_t step = 0;
  real train_loss = 0;
  std::optional<real> test_loss;
};

struct LoopOptions {
  std::optional<std::filesystem::path> checkpoint;  // written at every eval interval and at the end
  std::optional<std::filesystem::path> metrics;     // CSV step,train_loss,test_loss
  bool resume = false;                              // continue from `checkpoint` if it exists
  std::function<void(const MetricsRow&)> on_eval;   // progress hook
};

// Runs the trainer to config.max_steps. One metrics row per eval interval
// (train_loss is the mean over that interval).
std::vector<MetricsRow> train_loop(ModelParams& params, const TrainConfig& config, std::span<const Example> train,
                                   std::span<const Example> test, const LoopOptions& options = {});

}  // namespace lmol

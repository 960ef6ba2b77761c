#include "lmol/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lmol/context/context.hpp"
#include "lmol/error.hpp"
#include "lmol/model/transformer.hpp"
#include "lmol/numcore/ops.hpp"
#include "lmol/numcore/tape.hpp"
#include "lmol/train/checkpoint.hpp"

namespace lmol::inline LMOL_PRECISION_NS {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kBatchSalt = 1, kDropoutSalt = 2, kEpochSalt = 3, kTestSalt = 4;

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write metrics " + tmp.string());
    out << "step,train_loss,test_loss\n";
    out.precision(9);
    for (const MetricsRow& r : rows) {
      out << r.step << ',' << r.train_loss << ',';
      if (r.test_loss) out << *r.test_loss;
      out << '\n';
    }
    if (!out) throw IoError("failed writing metrics " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path, std::size_t up_to_step) {
  std::vector<MetricsRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string step, train, test;
    std::getline(ss, step, ',');
    std::getline(ss, train, ',');
    std::getline(ss, test, ',');
    if (step.empty()) continue;
    MetricsRow r;
    r.step = std::stoul(step);
    r.train_loss = static_cast<real>(std::stod(train));
    if (!test.empty()) r.test_loss = static_cast<real>(std::stod(test));
    if (r.step <= up_to_step) rows.push_back(r);
  }
  return rows;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0 || grad_accum == 0) throw ConfigError("batch_size and grad_accum must be positive");
  if (max_steps == 0 || eval_interval == 0) throw ConfigError("max_steps and eval_interval must be positive");
  if (!(p_del >= 0 && p_del <= 1)) throw ConfigError("p_del must lie in [0, 1]");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("Adam epsilon must be positive");
  if (clip_norm < 0) throw ConfigError("clip_norm must be non-negative");
}

real accumulate_gradients(const ModelParams& params, std::span<const Batch> micro_batches, bool training,
                          std::span<std::mt19937_64> dropout_rngs) {
  // The normaliser must be known before the first backward, and each input is
  // assembled right before its own forward so the per-batch tape reset never
  // drops the embedding records of a later micro-batch.
  std::size_t total = 0;
  for (const Batch& b : micro_batches) {
    total += static_cast<std::size_t>(std::count(b.loss_mask.begin(), b.loss_mask.end(), true));
  }
  if (total == 0) throw DataError("micro-batches contain no trained tokens");
  real loss_sum = 0;
  for (std::size_t i = 0; i < micro_batches.size(); ++i) {
    const std::vector<Sequence> seqs = micro_batches[i].sequences();
    const AssembledInput in = assemble_input(seqs, params);
    ForwardOptions opt;
    opt.training = training;
    opt.rng = i < dropout_rngs.size() ? &dropout_rngs[i] : nullptr;
    const Tensor logits = forward(params, in.embedded, in.offsets, opt);
    const Tensor loss = cross_entropy(logits, in.targets, kIgnoreTarget, static_cast<real>(total));
    if (Tape* tape = Tape::active()) {
      tape->backward(loss);
      tape->reset();
    }
    loss_sum += loss.item();
  }
  return loss_sum;
}

real evaluate_loss(const ModelParams& params, std::span<const Batch> batches) {
  if (batches.empty()) throw DataError("no evaluation batches");
  double loss = 0;
  std::size_t tokens = 0;
  for (const Batch& b : batches) {
    const std::vector<Sequence> seqs = b.sequences();
    const AssembledInput in = assemble_input(seqs, params);
    const Tensor logits = forward(params, in.embedded, in.offsets);
    loss += static_cast<double>(cross_entropy(logits, in.targets, kIgnoreTarget, real(1)).item());
    tokens += in.masked_count;
  }
  return static_cast<real>(loss / static_cast<double>(tokens));
}

Trainer::Trainer(ModelParams& params, TrainConfig config, std::span<const Example> train,
                 std::span<const Example> test)
    : params_(params),
      config_(config),
      train_(train),
      test_(test),
      adam_(params.tensors(), AdamOptions{config.learning_rate, config.beta1, config.beta2, config.epsilon}) {
  config_.validate();
  if (train_.empty()) throw DataError("training split is empty");
  const std::size_t n_eval = config_.eval_rows == 0 ? test_.size() : std::min(config_.eval_rows, test_.size());
  if (n_eval > 0) {
    std::vector<const Example*> rows;
    for (std::size_t i = 0; i < n_eval; ++i) rows.push_back(&test_[i]);
    std::mt19937_64 rng = stream(config_.seed, 0, 0, kTestSalt);
    const BatchOptions opts{config_.p_del, config_.use_fragments, params_.config.fragment_cap};
    for (std::size_t start = 0; start < rows.size(); start += config_.batch_size) {
      const std::size_t n = std::min(config_.batch_size, rows.size() - start);
      test_batches_.push_back(make_batch(std::span<const Example* const>(rows.data() + start, n),
                                         params_.config.n_numeric, opts, rng));
    }
  }
}

const Example* Trainer::example_at(std::size_t global) const {
  const std::size_t n = train_.size();
  const std::size_t epoch = global / n;
  if (epoch != cached_epoch_) {
    permutation_.resize(n);
    std::iota(permutation_.begin(), permutation_.end(), 0);
    std::mt19937_64 rng = stream(config_.seed, epoch, 0, kEpochSalt);
    std::shuffle(permutation_.begin(), permutation_.end(), rng);
    cached_epoch_ = epoch;
  }
  return &train_[permutation_[global % n]];
}

std::vector<Batch> Trainer::micro_batches(std::size_t s) const {
  const BatchOptions opts{config_.p_del, config_.use_fragments, params_.config.fragment_cap};
  std::vector<Batch> out;
  for (std::size_t m = 0; m < config_.grad_accum; ++m) {
    std::vector<const Example*> rows;
    const std::size_t base = (s * config_.grad_accum + m) * config_.batch_size;
    for (std::size_t i = 0; i < config_.batch_size; ++i) rows.push_back(example_at(base + i));
    std::mt19937_64 rng = stream(config_.seed, s, m, kBatchSalt);
    out.push_back(make_batch(rows, params_.config.n_numeric, opts, rng));
  }
  return out;
}

real Trainer::step() {
  const std::vector<Batch> batches = micro_batches(step_);
  std::vector<std::mt19937_64> dropout;
  for (std::size_t m = 0; m < batches.size(); ++m) dropout.push_back(stream(config_.seed, step_, m, kDropoutSalt));
  real loss = 0;
  try {
    Tape tape;
    TapeScope scope(tape);
    loss = accumulate_gradients(params_, batches, true, dropout);
  } catch (const NumericError& e) {
    throw NumericError("training diverged at step " + std::to_string(step_ + 1) + ": " + e.what());
  }
  if (!std::isfinite(static_cast<double>(loss))) {
    throw NumericError("training diverged at step " + std::to_string(step_ + 1) + ": loss is not finite");
  }
  if (config_.clip_norm > 0) {
    std::vector<Tensor> params = params_.tensors();
    clip_grad_norm(params, config_.clip_norm);
  }
  adam_.step();
  ++step_;
  return loss;
}

real Trainer::test_loss() const {
  if (test_batches_.empty()) throw DataError("test split is empty");
  return evaluate_loss(params_, test_batches_);
}

void Trainer::resume(std::size_t step) { step_ = step; }

std::vector<MetricsRow> train_loop(ModelParams& params, const TrainConfig& config, std::span<const Example> train,
                                   std::span<const Example> test, const LoopOptions& options) {
  Trainer trainer(params, config, train, test);
  std::vector<MetricsRow> rows;
  if (options.resume && options.checkpoint && std::filesystem::exists(*options.checkpoint)) {
    Checkpoint ck = load_checkpoint(*options.checkpoint, params.config);
    if (ck.seed != config.seed) {
      throw ConfigError("checkpoint was trained with seed " + std::to_string(ck.seed) + ", not " +
                        std::to_string(config.seed));
    }
    const auto dst = params.tensors();
    const auto src = ck.params.tensors();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      Tensor t = dst[i];
      std::copy(src[i].data().begin(), src[i].data().end(), t.mutable_data().begin());
    }
    if (ck.optimizer) restore_optimizer(*ck.optimizer, trainer.optimizer());
    trainer.resume(ck.step);
    if (options.metrics) rows = read_metrics(*options.metrics, ck.step);
  }

  double interval_loss = 0;
  std::size_t interval_steps = 0;
  while (trainer.steps_done() < config.max_steps) {
    interval_loss += trainer.step();
    ++interval_steps;
    const std::size_t s = trainer.steps_done();
    const bool eval = s % config.eval_interval == 0;
    if (eval) {
      MetricsRow row;
      row.step = s;
      row.train_loss = static_cast<real>(interval_loss / static_cast<double>(interval_steps));
      if (!test.empty()) row.test_loss = trainer.test_loss();
      rows.push_back(row);
      interval_loss = 0;
      interval_steps = 0;
      if (options.metrics) write_metrics(*options.metrics, rows);
      if (options.on_eval) options.on_eval(row);
    }
    if (options.checkpoint && (eval || s == config.max_steps)) {
      save_checkpoint(*options.checkpoint, params, s, config.seed, &trainer.optimizer());
    }
  }
  if (options.metrics && rows.empty()) write_metrics(*options.metrics, rows);
  return rows;
}

}  // namespace lmol

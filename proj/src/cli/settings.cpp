#include "lmol/cli/settings.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lmol/cli/csv.hpp"
#include "lmol/error.hpp"

namespace lmol::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  const std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

bool set_model(ModelConfig& m, const std::string& field, const std::string& key, const std::string& v) {
  if (field == "d_emb") m.d_emb = to_size(key, v);
  else if (field == "n_heads") m.n_heads = to_size(key, v);
  else if (field == "n_layers") m.n_layers = to_size(key, v);
  else if (field == "d_ffn") m.d_ffn = to_size(key, v);
  else if (field == "max_seq_len") m.max_seq_len = to_size(key, v);
  else if (field == "fragment_cap") m.fragment_cap = to_size(key, v);
  else if (field == "dropout") m.dropout = static_cast<real>(to_double(key, v));
  else if (field == "rope_base") m.rope_base = static_cast<real>(to_double(key, v));
  else return false;
  return true;
}

bool set_train(TrainConfig& t, const std::string& field, const std::string& key, const std::string& v) {
  if (field == "batch_size") t.batch_size = to_size(key, v);
  else if (field == "grad_accum") t.grad_accum = to_size(key, v);
  else if (field == "p_del") t.p_del = static_cast<real>(to_double(key, v));
  else if (field == "learning_rate") t.learning_rate = static_cast<real>(to_double(key, v));
  else if (field == "beta1") t.beta1 = static_cast<real>(to_double(key, v));
  else if (field == "beta2") t.beta2 = static_cast<real>(to_double(key, v));
  else if (field == "epsilon") t.epsilon = static_cast<real>(to_double(key, v));
  else if (field == "max_steps") t.max_steps = to_size(key, v);
  else if (field == "seed") t.seed = to_size(key, v);
  else if (field == "eval_interval") t.eval_interval = to_size(key, v);
  else if (field == "eval_rows") t.eval_rows = to_size(key, v);
  else if (field == "use_fragments") t.use_fragments = to_bool(key, v);
  else if (field == "clip_norm") t.clip_norm = static_cast<real>(to_double(key, v));
  else return false;
  return true;
}

}  // namespace

Settings parse_settings(std::string_view text) {
  Settings out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": '" + key + "' is set twice");
    }
  }
  return out;
}

Settings read_settings(const std::filesystem::path& path) { return parse_settings(read_text(path)); }

RunConfig make_run_config(const Settings& settings, const std::filesystem::path& base_dir) {
  RunConfig rc;
  if (const auto it = settings.find("model"); it != settings.end()) {
    if (it->second == "paper") rc.model = ModelConfig::paper();
    else if (it->second != "desk") throw ConfigError("model: expected desk or paper, got '" + it->second + "'");
  }
  std::map<std::size_t, std::string> conditions;
  for (const auto& [key, value] : settings) {
    if (key == "model") continue;
    if (key == "dataset") rc.dataset = resolve(base_dir, value);
    else if (key == "vocab") rc.vocab = resolve(base_dir, value);
    else if (key == "out_dir") rc.out_dir = resolve(base_dir, value);
    else if (key == "split_ratio") rc.split_ratio = to_double(key, value);
    else if (key.starts_with("model.") && set_model(rc.model, key.substr(6), key, value)) continue;
    else if (key.starts_with("train.") && set_train(rc.train, key.substr(6), key, value)) continue;
    else if (key.starts_with("condition.") && key.ends_with(".name") && key.size() > 15) {
      const std::size_t index = to_size(key, key.substr(10, key.size() - 15));
      if (value.empty()) throw ConfigError(key + ": empty column name");
      conditions[index] = value;
    } else {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
  std::size_t expect = 0;
  for (const auto& [index, name] : conditions) {
    if (index != expect++) throw ConfigError("condition indices must run 0, 1, 2, ... without gaps");
    for (const auto& other : rc.conditions) {
      if (other == name) throw ConfigError("condition '" + name + "' listed twice");
    }
    rc.conditions.push_back(name);
  }
  if (rc.dataset.empty()) throw ConfigError("setting 'dataset' is required");
  if (rc.vocab.empty()) throw ConfigError("setting 'vocab' is required");
  if (rc.out_dir.empty()) throw ConfigError("setting 'out_dir' is required");
  if (!(rc.split_ratio > 0 && rc.split_ratio < 1)) throw ConfigError("split_ratio must lie in (0, 1)");
  rc.train.validate();
  return rc;
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os.precision(9);
  os << "dataset = " << c.dataset.string() << "\nvocab = " << c.vocab.string() << "\nout_dir = "
     << c.out_dir.string() << "\nsplit_ratio = " << c.split_ratio << '\n';
  const ModelConfig& m = c.model;
  os << "model.d_emb = " << m.d_emb << "\nmodel.n_heads = " << m.n_heads << "\nmodel.n_layers = " << m.n_layers
     << "\nmodel.d_ffn = " << m.d_ffn << "\nmodel.max_seq_len = " << m.max_seq_len
     << "\nmodel.fragment_cap = " << m.fragment_cap << "\nmodel.dropout = " << m.dropout
     << "\nmodel.rope_base = " << m.rope_base << '\n';
  const TrainConfig& t = c.train;
  os << "train.batch_size = " << t.batch_size << "\ntrain.grad_accum = " << t.grad_accum
     << "\ntrain.p_del = " << t.p_del << "\ntrain.learning_rate = " << t.learning_rate
     << "\ntrain.beta1 = " << t.beta1 << "\ntrain.beta2 = " << t.beta2 << "\ntrain.epsilon = " << t.epsilon
     << "\ntrain.max_steps = " << t.max_steps << "\ntrain.seed = " << t.seed
     << "\ntrain.eval_interval = " << t.eval_interval << "\ntrain.eval_rows = " << t.eval_rows
     << "\ntrain.use_fragments = " << (t.use_fragments ? "true" : "false") << "\ntrain.clip_norm = " << t.clip_norm
     << '\n';
  for (std::size_t i = 0; i < c.conditions.size(); ++i) os << "condition." << i << ".name = " << c.conditions[i] << '\n';
  return os.str();
}

}  // namespace lmol::cli

#include "lmol/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include <CLI11.hpp>

#include "lmol/cli/csv.hpp"
#include "lmol/cli/preprocess.hpp"
#include "lmol/cli/settings.hpp"
#include "lmol/error.hpp"
#include "lmol/eval/metrics.hpp"
#include "lmol/sample/sampler.hpp"
#include "lmol/smiles/validate.hpp"
#include "lmol/train/checkpoint.hpp"
#include "lmol/train/dataset.hpp"
#include "lmol/train/trainer.hpp"

namespace lmol::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw IoError("failed writing " + path.string());
}

double cell_number(const std::string& cell, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(what + ": '" + cell + "' is not a number");
}

std::vector<ConditionFlag> parse_flags(const std::vector<std::string>& raw) {
  std::vector<ConditionFlag> flags;
  for (const std::string& r : raw) {
    ConditionFlag f = parse_condition_flag(r);
    for (const ConditionFlag& g : flags) {
      if (g.name == f.name) throw UsageError("condition '" + f.name + "' given twice");
    }
    flags.push_back(std::move(f));
  }
  return flags;
}

// ---- preprocess ----------------------------------------------------------

struct PreprocessArgs {
  std::string input;
  std::string out_dir;
  std::string vocab;
  std::size_t max_tokens = 256;
};

void cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
  PreprocessOptions opts;
  opts.max_tokens = a.max_tokens;
  if (!a.vocab.empty()) opts.vocab = smiles::Vocabulary::load(a.vocab);
  const PreprocessResult r = preprocess(read_csv(a.input), opts);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  save_dataset(r.dataset, dir / "dataset.bin");
  r.vocab.save(dir / "vocab.txt");
  write_file(dir / "survivors.csv", survivors_csv(r.dataset));
  std::string stats = "item,count\ninput," + std::to_string(r.stats.input) + "\nkept," +
                      std::to_string(r.stats.kept) + '\n';
  for (const auto& [reason, count] : r.stats.rejected) stats += "rejected_" + reason + ',' + std::to_string(count) + '\n';
  write_file(dir / "stats.csv", stats);

  out << "rows read      " << r.stats.input << "\nrows kept      " << r.stats.kept << '\n';
  for (const auto& [reason, count] : r.stats.rejected) {
    out << "rejected " << std::left << std::setw(6) << reason << ' ' << count << '\n';
  }
  out << "vocabulary     " << r.vocab.size() << " tokens\nproperties    ";
  for (const auto& p : r.dataset.property_names) out << ' ' << p;
  out << "\nwrote " << (dir / "dataset.bin").string() << ", vocab.txt, survivors.csv, stats.csv\n";
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config;
  bool resume = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
  Settings settings = read_settings(a.config);
  for (const std::string& o : a.overrides) {
    const Settings one = parse_settings(o);
    if (one.size() != 1) throw UsageError("--set expects key=value, got '" + o + "'");
    settings[one.begin()->first] = one.begin()->second;
  }
  if (a.seed) settings["train.seed"] = std::to_string(*a.seed);
  RunConfig rc = make_run_config(settings, fs::path(a.config).parent_path());

  const Dataset data = load_dataset(rc.dataset);
  const smiles::Vocabulary vocab = smiles::Vocabulary::load(rc.vocab);
  std::vector<std::size_t> columns;
  for (const std::string& name : rc.conditions) {
    const auto it = std::find(data.property_names.begin(), data.property_names.end(), name);
    if (it == data.property_names.end()) {
      throw ConfigError("condition column '" + name + "' is not in dataset " + rc.dataset.string());
    }
    columns.push_back(static_cast<std::size_t>(it - data.property_names.begin()));
  }
  rc.model.d_voc = vocab.size();
  rc.model.n_numeric = rc.conditions.size();
  rc.model.validate();

  std::vector<Example> rows;
  rows.reserve(data.rows.size());
  for (const Example& e : data.rows) {
    if (e.ids.size() > rc.model.max_seq_len) {
      throw ConfigError("row '" + e.smiles + "' has " + std::to_string(e.ids.size()) +
                        " tokens, above model.max_seq_len");
    }
    for (int id : e.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
        throw DataError("dataset token id " + std::to_string(id) + " is outside vocabulary " + rc.vocab.string());
      }
    }
    Example p{e.smiles, e.ids, {}};
    for (std::size_t c : columns) p.properties.push_back(e.properties[c]);
    rows.push_back(std::move(p));
  }
  auto [train, test] = split_dataset(std::move(rows), rc.split_ratio, rc.train.seed);

  fs::create_directories(rc.out_dir);
  vocab.save(rc.out_dir / "vocab.txt");
  write_file(rc.out_dir / "run.conf", describe(rc));
  ModelParams params = init_params(rc.model, rc.conditions, rc.train.seed);
  LoopOptions opts;
  opts.checkpoint = rc.out_dir / "checkpoint.bin";
  opts.metrics = rc.out_dir / "metrics.csv";
  opts.resume = a.resume;
  if (a.resume && !fs::exists(*opts.checkpoint)) out << "no checkpoint to resume from, starting fresh\n";
  if (!a.quiet) {
    out << "training " << params.count() << " parameters on " << train.size() << " rows (" << test.size()
        << " held out)\n";
    opts.on_eval = [&out](const MetricsRow& r) {
      out << "step " << r.step << "  train_loss " << r.train_loss;
      if (r.test_loss) out << "  test_loss " << *r.test_loss;
      out << std::endl;
    };
  }
  train_loop(params, rc.train, train, test, opts);
  out << "checkpoint " << opts.checkpoint->string() << '\n';
}

// ---- sample --------------------------------------------------------------

struct SampleArgs {
  std::string checkpoint;
  std::string vocab;
  std::vector<std::string> conds;
  std::optional<std::string> fragment;
  std::size_t n = 100;
  double temperature = 0.8;
  std::uint64_t seed = 0;
  std::size_t max_tokens = 256;
  std::string output;
  bool csv = false;
};

void cmd_sample(const SampleArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const fs::path vocab_path = a.vocab.empty() ? fs::path(a.checkpoint).parent_path() / "vocab.txt" : fs::path(a.vocab);
  const smiles::Vocabulary vocab = smiles::Vocabulary::load(vocab_path);
  const std::vector<ConditionFlag> flags = parse_flags(a.conds);
  const SampleRequest req = build_request(ck.params, vocab, flags, a.fragment, a.n, a.seed);

  SamplerConfig sc;
  sc.temperature = static_cast<real>(a.temperature);
  sc.max_new_tokens = a.max_tokens;
  sc.seed = a.seed;
  sc.validate();
  const std::vector<Generation> gens = generate_batch(ck.params, vocab, req.specs, sc);

  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output, std::ios::binary);
    if (!file) throw IoError("cannot write " + a.output);
  }
  std::ostream& os = a.output.empty() ? out : file;
  if (a.csv) {
    os << "smiles,stop_reason";
    for (const auto& f : flags) os << ",target_" << eval::csv_field(f.name);
    os << '\n';
  }
  os.precision(9);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (a.csv) {
      os << eval::csv_field(gens[i].smiles) << ',' << stop_reason_name(gens[i].stop);
      for (double t : req.targets[i]) os << ',' << t;
    } else {
      os << gens[i].smiles;
    }
    os << '\n';
  }
  if (!os.flush()) throw IoError("failed writing samples");
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string generated;
  std::string reference;
  std::vector<std::string> conds;
  std::optional<std::string> fragment;
  std::string actuals;
  std::string metrics;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::vector<std::string> wanted;
  if (!a.metrics.empty()) {
    std::size_t start = 0;
    while (start <= a.metrics.size()) {
      const std::size_t at = std::min(a.metrics.find(',', start), a.metrics.size());
      wanted.push_back(a.metrics.substr(start, at - start));
      start = at + 1;
    }
    for (const std::string& m : wanted) {
      if (m != "novelty" && m != "uniqueness" && m != "uniqueness@1k" && m != "validity") {
        throw UsageError("unknown metric '" + m + "'");
      }
    }
    if (std::find(wanted.begin(), wanted.end(), "novelty") != wanted.end() && a.reference.empty()) {
      throw UsageError("novelty needs --reference");
    }
  } else {
    wanted = {"validity", "uniqueness", "uniqueness@1k"};
    if (!a.reference.empty()) wanted.push_back("novelty");
  }

  // Generated strings plus optional per-row targets from a sample CSV.
  std::vector<std::string> gen;
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> targets;  // [property][row]
  const std::vector<ConditionFlag> flags = parse_flags(a.conds);
  {
    gen = read_smiles(a.generated);
    std::optional<CsvTable> table;
    const std::string head = read_text(a.generated).substr(0, 6);
    if (head == "smiles") table = read_csv(a.generated);
    const auto drawn = draw_targets(flags, gen.size(), a.seed);
    for (std::size_t j = 0; j < flags.size(); ++j) {
      names.push_back(flags[j].name);
      std::vector<std::optional<double>> col;
      for (std::size_t i = 0; i < gen.size(); ++i) col.emplace_back(drawn[i][j]);
      targets.push_back(std::move(col));
    }
    if (table) {
      for (std::size_t c = 0; c < table->header.size(); ++c) {
        const std::string& h = table->header[c];
        if (!h.starts_with("target_")) continue;
        const std::string name = h.substr(7);
        if (std::find(names.begin(), names.end(), name) != names.end()) continue;
        names.push_back(name);
        std::vector<std::optional<double>> col;
        for (const auto& row : table->rows) {
          if (row[c].empty()) col.emplace_back();
          else col.emplace_back(cell_number(row[c], h));
        }
        targets.push_back(std::move(col));
      }
    }
  }

  std::optional<CsvTable> actual_table;
  if (!a.actuals.empty()) {
    actual_table = read_csv(a.actuals);
    if (actual_table->rows.size() != gen.size()) {
      throw DataError("actuals file has " + std::to_string(actual_table->rows.size()) + " rows for " +
                      std::to_string(gen.size()) + " generated molecules");
    }
  }
  std::vector<bool> valid;
  for (const std::string& s : gen) valid.push_back(smiles::validate(s).valid);
  std::vector<std::vector<std::optional<double>>> actuals(names.size());
  for (std::size_t p = 0; p < names.size(); ++p) {
    const auto col = actual_table ? actual_table->column(names[p]) : std::nullopt;
    if (!col && !eval::is_descriptor(names[p])) {
      throw UsageError("no actual values for '" + names[p] + "': not a built-in descriptor and not in --actuals");
    }
    for (std::size_t i = 0; i < gen.size(); ++i) {
      if (!valid[i]) actuals[p].emplace_back();
      else if (col) actuals[p].emplace_back(cell_number(actual_table->rows[i][*col], names[p]));
      else actuals[p].push_back(eval::descriptor_value(gen[i], names[p]));
    }
  }

  std::vector<eval::Metric> metrics;
  for (const std::string& m : wanted) {
    if (m == "validity") metrics.push_back({m, eval::validity(gen)});
    else if (m == "uniqueness") metrics.push_back({m, eval::uniqueness(gen)});
    else if (m == "uniqueness@1k") metrics.push_back({m, eval::uniqueness_at(gen, 1000)});
    else if (m == "novelty") {
      const auto ref = read_smiles(a.reference);
      metrics.push_back({m, eval::novelty(gen, {ref.begin(), ref.end()})});
    }
  }
  for (std::size_t p = 0; p < names.size(); ++p) {
    std::vector<double> act, tgt;
    for (std::size_t i = 0; i < gen.size(); ++i) {
      if (actuals[p][i] && targets[p][i]) {
        act.push_back(*actuals[p][i]);
        tgt.push_back(*targets[p][i]);
      }
    }
    if (act.empty()) {
      out << "no valid molecule carries a target for " << names[p] << "; MAD skipped\n";
      continue;
    }
    metrics.push_back({"mad_" + names[p], eval::mad(act, tgt)});
  }
  if (a.fragment) metrics.push_back({"substructure_match", eval::substructure_match_rate(gen, *a.fragment)});

  std::vector<eval::DetailRow> rows;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    eval::DetailRow r{gen[i], valid[i], {}, {}};
    for (std::size_t p = 0; p < names.size(); ++p) {
      r.targets.push_back(targets[p][i]);
      r.actuals.push_back(actuals[p][i]);
    }
    rows.push_back(std::move(r));
  }
  fs::create_directories(a.out_dir);
  const eval::ReportPaths paths{fs::path(a.out_dir) / "summary.csv", fs::path(a.out_dir) / "detail.csv"};
  eval::emit_report(paths, metrics, names, rows);

  out << "samples " << gen.size() << '\n';
  for (const eval::Metric& m : metrics) {
    out << std::left << std::setw(24) << m.name << std::fixed << std::setprecision(4) << m.value << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace

SampleRequest build_request(const ModelParams& params, const smiles::Vocabulary& vocab,
                            std::span<const ConditionFlag> flags, const std::optional<std::string>& fragment,
                            std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("--n must be positive");
  std::vector<std::size_t> ids;
  for (const ConditionFlag& f : flags) {
    const auto& names = params.conditions.names;
    const auto it = std::find(names.begin(), names.end(), f.name);
    if (it == names.end()) {
      std::string known;
      for (const auto& k : names) known += (known.empty() ? "" : ", ") + k;
      throw UsageError("model has no condition '" + f.name + "' (known: " + (known.empty() ? "none" : known) + ")");
    }
    ids.push_back(static_cast<std::size_t>(it - names.begin()));
    for (std::size_t k = 0; k + 1 < ids.size(); ++k) {
      if (ids[k] == ids.back()) throw UsageError("condition '" + f.name + "' given twice");
    }
  }
  std::optional<FragmentCondition> frag;
  if (fragment) {
    std::vector<std::string> tokens;
    try {
      tokens = smiles::split_tokens(*fragment);
    } catch (const TokenizeError& e) {
      throw UsageError(std::string("--fragment: ") + e.what());
    }
    if (tokens.size() > params.config.fragment_cap) {
      throw UsageError("--fragment has " + std::to_string(tokens.size()) + " tokens, the cap is " +
                       std::to_string(params.config.fragment_cap));
    }
    frag.emplace();
    for (const std::string& t : tokens) {
      if (!vocab.contains(t) || vocab.is_reserved(vocab.id(t))) {
        throw UsageError("--fragment token '" + t + "' is not in the vocabulary");
      }
      frag->ids.push_back(vocab.id(t));
    }
  }
  SampleRequest req;
  req.targets = draw_targets(flags, n, seed);
  std::vector<std::size_t> order(flags.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ids[x] < ids[y]; });
  for (std::size_t i = 0; i < n; ++i) {
    ContextSpec s;
    for (std::size_t j : order) s.numeric.push_back({ids[j], static_cast<real>(req.targets[i][j])});
    s.fragment = frag;
    s.validate(params.config);
    req.specs.push_back(std::move(s));
  }
  return req;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional SMILES language model"};
  app.require_subcommand(1);

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "filter, tokenize and describe a SMILES CSV");
  pre->add_option("input", pa.input, "CSV with a smiles column")->required();
  pre->add_option("-o,--out-dir", pa.out_dir, "output directory")->required();
  pre->add_option("--vocab", pa.vocab, "reuse an existing vocabulary file");
  pre->add_option("--max-tokens", pa.max_tokens, "longest accepted SMILES in tokens");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train a model from a key=value config");
  tr->add_option("config", ta.config, "config file")->required();
  tr->add_flag("--resume", ta.resume, "continue from the checkpoint in out_dir");
  tr->add_option("--seed", ta.seed, "override train.seed");
  tr->add_option("--set", ta.overrides, "override one setting, key=value");
  tr->add_flag("-q,--quiet", ta.quiet, "no progress lines");

  SampleArgs sa;
  auto* sm = app.add_subcommand("sample", "generate SMILES from a checkpoint");
  sm->add_option("checkpoint", sa.checkpoint, "checkpoint file")->required();
  sm->add_option("--vocab", sa.vocab, "vocabulary (default: vocab.txt next to the checkpoint)");
  sm->add_option("--cond", sa.conds, "name=v, name=a:b:step or name=v1,v2,...");
  sm->add_option("--fragment", sa.fragment, "SMILES fragment to condition on");
  sm->add_option("-n,--n", sa.n, "number of samples");
  sm->add_option("-t,--temperature", sa.temperature, "sampling temperature, 0 for greedy");
  sm->add_option("--seed", sa.seed, "random seed");
  sm->add_option("--max-tokens", sa.max_tokens, "token limit per sample");
  sm->add_option("-o,--output", sa.output, "write here instead of stdout");
  sm->add_flag("--csv", sa.csv, "CSV with smiles,stop_reason and targets");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "score generated SMILES");
  ev->add_option("generated", ea.generated, "one SMILES per line, or a sample CSV")->required();
  ev->add_option("--reference", ea.reference, "reference set for novelty");
  ev->add_option("--cond", ea.conds, "requested values, same notation as sample");
  ev->add_option("--fragment", ea.fragment, "fragment for the substructure match rate");
  ev->add_option("--actuals", ea.actuals, "CSV of actual property values, row-aligned");
  ev->add_option("--metrics", ea.metrics, "comma list of novelty,uniqueness,uniqueness@1k,validity");
  ev->add_option("--seed", ea.seed, "seed used when sampling, for interval targets");
  ev->add_option("-o,--out-dir", ea.out_dir, "where summary.csv and detail.csv go");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*pre) cmd_preprocess(pa, out);
    else if (*tr) cmd_train(ta, out);
    else if (*sm) cmd_sample(sa, out);
    else if (*ev) cmd_eval(ea, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "lmol: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "lmol: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace lmol::cli

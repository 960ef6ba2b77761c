#include "lmol/cli/preprocess.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lmol/error.hpp"
#include "lmol/eval/metrics.hpp"
#include "lmol/smiles/descriptors.hpp"
#include "lmol/smiles/validate.hpp"

namespace lmol::cli {
namespace {

std::optional<double> parse_number(const std::string& s) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::size_t PreprocessStats::rejected_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : rejected) n += count;
  return n;
}

PreprocessResult preprocess(const CsvTable& table, const PreprocessOptions& options) {
  const auto smiles_col = table.column("smiles");
  if (!smiles_col) throw DataError("input has no 'smiles' column");

  std::vector<std::size_t> columns;  // source column per property, SIZE_MAX for computed
  Dataset data;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *smiles_col) continue;
    data.property_names.push_back(table.header[c]);
    columns.push_back(c);
  }
  for (const char* name : kDescriptorColumns) {
    if (!table.column(name)) {
      data.property_names.emplace_back(name);
      columns.push_back(SIZE_MAX);
    }
  }

  PreprocessResult result;
  PreprocessStats& stats = result.stats;
  for (const char* reason : {"salt", "invalid", "length", "property"}) stats.rejected[reason] = 0;
  std::vector<std::vector<std::string>> tokens;
  for (const auto& row : table.rows) {
    ++stats.input;
    const std::string& text = row[*smiles_col];
    if (text.find('.') != std::string::npos) {
      ++stats.rejected["salt"];
      continue;
    }
    const auto graph = smiles::parse_valid(text);
    if (!graph) {
      ++stats.rejected["invalid"];
      continue;
    }
    std::vector<std::string> toks = smiles::split_tokens(text);
    if (toks.size() > options.max_tokens) {
      ++stats.rejected["length"];
      continue;
    }
    Example e;
    e.smiles = text;
    bool ok = true;
    std::optional<smiles::Descriptors> desc;
    for (std::size_t p = 0; p < columns.size() && ok; ++p) {
      const std::string& name = data.property_names[p];
      const bool computed = columns[p] == SIZE_MAX || (eval::is_descriptor(name) && row[columns[p]].empty());
      if (computed) {
        if (!desc) desc = smiles::descriptors(*graph);
        const double v = name == "mol_weight_scaled" ? desc->mol_weight_scaled
                         : name == "heavy_atom_count" ? static_cast<double>(desc->heavy_atom_count)
                                                      : static_cast<double>(desc->ring_count);
        e.properties.push_back(static_cast<real>(v));
      } else if (const auto v = parse_number(row[columns[p]])) {
        e.properties.push_back(static_cast<real>(*v));
      } else {
        ok = false;
      }
    }
    if (!ok) {
      ++stats.rejected["property"];
      continue;
    }
    data.rows.push_back(std::move(e));
    tokens.push_back(std::move(toks));
  }
  stats.kept = data.rows.size();
  if (data.rows.empty()) throw DataError("no rows survived preprocessing");

  if (options.vocab) {
    result.vocab = *options.vocab;
  } else {
    std::vector<std::string> texts;
    for (const Example& e : data.rows) texts.push_back(e.smiles);
    result.vocab = smiles::Vocabulary::from_corpus(texts);
  }
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    for (const std::string& t : tokens[i]) data.rows[i].ids.push_back(result.vocab.id(t));
  }
  result.dataset = std::move(data);
  return result;
}

std::string survivors_csv(const Dataset& dataset) {
  std::ostringstream os;
  os.precision(9);
  os << "smiles";
  for (const std::string& p : dataset.property_names) os << ',' << eval::csv_field(p);
  os << '\n';
  for (const Example& e : dataset.rows) {
    os << eval::csv_field(e.smiles);
    for (real v : e.properties) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace lmol::cli

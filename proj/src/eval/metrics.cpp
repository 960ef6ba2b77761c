#include "lmol/eval/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lmol/error.hpp"
#include "lmol/smiles/descriptors.hpp"
#include "lmol/smiles/molgraph.hpp"
#include "lmol/smiles/pattern.hpp"
#include "lmol/smiles/validate.hpp"

namespace lmol::eval {
namespace {

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

}  // namespace

double novelty(std::span<const std::string> generated, const std::unordered_set<std::string>& reference) {
  std::size_t fresh = 0;
  for (const std::string& s : generated) fresh += !reference.contains(s);
  return percent(fresh, generated.size());
}

double uniqueness(std::span<const std::string> generated) {
  if (generated.empty()) throw DataError("uniqueness of an empty list");
  const std::unordered_set<std::string> distinct(generated.begin(), generated.end());
  return percent(distinct.size(), generated.size());
}

double uniqueness_at(std::span<const std::string> generated, std::size_t k) {
  return uniqueness(generated.first(std::min(k, generated.size())));
}

double validity(std::span<const std::string> generated) {
  std::size_t ok = 0;
  for (const std::string& s : generated) ok += smiles::validate(s).valid;
  return percent(ok, generated.size());
}

double mad(std::span<const double> actual, std::span<const double> target) {
  if (actual.size() != target.size()) {
    throw DataError("MAD needs equal lengths, got " + std::to_string(actual.size()) + " actual and " +
                    std::to_string(target.size()) + " target values");
  }
  if (actual.empty()) throw DataError("MAD of an empty list");
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - target[i]);
  return sum / static_cast<double>(actual.size());
}

double substructure_match_rate(std::span<const std::string> generated, std::string_view fragment) {
  smiles::Pattern pattern;
  try {
    pattern = smiles::to_pattern(smiles::parse(fragment));
  } catch (const ParseError& e) {
    throw DataError("fragment '" + std::string(fragment) + "' does not parse: " + e.what());
  } catch (const TokenizeError& e) {
    throw DataError("fragment '" + std::string(fragment) + "' does not parse: " + e.what());
  }
  std::size_t hits = 0;
  for (const std::string& s : generated) {
    try {
      hits += smiles::substructure_match(pattern, smiles::parse(s));
    } catch (const ParseError&) {
    } catch (const TokenizeError&) {
    }
  }
  return percent(hits, generated.size());
}

bool is_descriptor(std::string_view name) {
  return name == "mol_weight_scaled" || name == "heavy_atom_count" || name == "ring_count";
}

std::optional<double> descriptor_value(std::string_view smiles_text, std::string_view name) {
  if (!is_descriptor(name)) throw DataError("no built-in descriptor named '" + std::string(name) + "'");
  const auto g = smiles::parse_valid(smiles_text);
  if (!g) return std::nullopt;
  const smiles::Descriptors d = smiles::descriptors(*g);
  if (name == "mol_weight_scaled") return d.mol_weight_scaled;
  if (name == "heavy_atom_count") return static_cast<double>(d.heavy_atom_count);
  return static_cast<double>(d.ring_count);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void emit_report(const ReportPaths& paths, std::span<const Metric> metrics,
                 std::span<const std::string> property_names, std::span<const DetailRow> rows) {
  std::string summary = "metric,value\n";
  for (const Metric& m : metrics) summary += csv_field(m.name) + ',' + number(m.value) + '\n';

  std::string detail = "smiles,valid";
  for (const std::string& p : property_names) detail += ",target_" + csv_field(p) + ",actual_" + csv_field(p);
  detail += '\n';
  for (const DetailRow& r : rows) {
    if (r.targets.size() != property_names.size() || r.actuals.size() != property_names.size()) {
      throw ShapeError("detail row for '" + r.smiles + "' does not match the property list");
    }
    detail += csv_field(r.smiles) + (r.valid ? ",1" : ",0");
    for (std::size_t i = 0; i < property_names.size(); ++i) {
      detail += ',';
      if (r.targets[i]) detail += number(*r.targets[i]);
      detail += ',';
      if (r.actuals[i]) detail += number(*r.actuals[i]);
    }
    detail += '\n';
  }
  write_file(paths.summary, summary);
  write_file(paths.detail, detail);
}

}  // namespace lmol::eval

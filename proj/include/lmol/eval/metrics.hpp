#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace lmol::eval {

// All percentages lie in [0, 100]. Comparisons are plain string equality;
// no canonical form is computed.

// Share of generated strings absent from the reference set. 0 for an empty list.
double novelty(std::span<const std::string> generated, const std::unordered_set<std::string>& reference);

// Distinct strings over list length. Throws DataError for an empty list.
double uniqueness(std::span<const std::string> generated);

// Uniqueness of the first k samples (all of them when fewer).
double uniqueness_at(std::span<const std::string> generated, std::size_t k = 1000);

// Share of strings that parse and pass the valence checks. 0 for an empty list.
double validity(std::span<const std::string> generated);

// Mean absolute deviation. Throws DataError for empty or unequal lengths.
double mad(std::span<const double> actual, std::span<const double> target);

// Share of all generated strings whose graph contains the fragment's
// connectivity; unparseable strings count as misses. Throws DataError when the
// fragment itself does not parse. 0 for an empty list.
double substructure_match_rate(std::span<const std::string> generated, std::string_view fragment);

// Built-in descriptor value by column name: mol_weight_scaled,
// heavy_atom_count or ring_count. Nothing when the string is invalid; throws
// DataError for an unknown name.
std::optional<double> descriptor_value(std::string_view smiles, std::string_view name);
bool is_descriptor(std::string_view name);

struct Metric {
  std::string name;
  double value = 0;
};

struct DetailRow {
  std::string smiles;
  bool valid = false;
  std::vector<std::optional<double>> targets;  // aligned with property names
  std::vector<std::optional<double>> actuals;
};

struct ReportPaths {
  std::filesystem::path summary;  // metric,value
  std::filesystem::path detail;   // smiles,valid,target_<p>,actual_<p>,...
};

// Writes both CSV files (header always present). Throws IoError when a file
// cannot be written.
void emit_report(const ReportPaths& paths, std::span<const Metric> metrics,
                 std::span<const std::string> property_names, std::span<const DetailRow> rows);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view text);

}  // namespace lmol::eval

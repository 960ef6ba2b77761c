#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmol::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each as wide as the header

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180 style: quoted fields may hold commas, doubled quotes and line
// breaks; CRLF is accepted and blank lines are skipped. Throws FormatError for
// an unterminated quote or a row whose width differs from the header.
CsvTable parse_csv(std::string_view text);
// Throws IoError when the file cannot be read.
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

// SMILES from either a CSV with a `smiles` column or a plain file with one
// string per line. A first line that is a header naming a `smiles` column
// selects CSV mode.
std::vector<std::string> read_smiles(const std::filesystem::path& path);

}  // namespace lmol::cli

#include "lmol/cli/conditions.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "lmol/error.hpp"

namespace lmol::cli {
namespace {

constexpr std::size_t kMaxGrid = 1000000;

double number(std::string_view flag, std::string_view s) {
  double v = 0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("--cond " + std::string(flag) + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = s.find(sep, start);
    parts.push_back(s.substr(start, at - start));
    if (at == std::string_view::npos) return parts;
    start = at + 1;
  }
}

}  // namespace

ConditionFlag parse_condition_flag(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("--cond expects name=value, got '" + std::string(text) + "'");
  }
  ConditionFlag f;
  f.name = std::string(text.substr(0, eq));
  const std::string_view spec = text.substr(eq + 1);
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("--cond " + f.name + ": interval form is a:b:step");
    const double a = number(text, parts[0]), b = number(text, parts[1]), step = number(text, parts[2]);
    if (!(step > 0) || b < a) throw UsageError("--cond " + f.name + ": need a <= b and a positive step");
    const double span = std::floor((b - a) / step + 1e-9);
    if (span >= static_cast<double>(kMaxGrid)) throw UsageError("--cond " + f.name + ": grid is too fine");
    for (std::size_t k = 0; k <= static_cast<std::size_t>(span); ++k) f.values.push_back(a + step * k);
  } else {
    for (std::string_view part : split(spec, ',')) f.values.push_back(number(text, part));
  }
  return f;
}

std::vector<std::vector<double>> draw_targets(std::span<const ConditionFlag> flags, std::size_t n,
                                              std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7a7267u};
  std::mt19937_64 rng(seq);
  std::vector<std::vector<double>> out(n, std::vector<double>(flags.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < flags.size(); ++j) {
      const auto& v = flags[j].values;
      out[i][j] = v.size() == 1 ? v[0] : v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    }
  }
  return out;
}

}  // namespace lmol::cli

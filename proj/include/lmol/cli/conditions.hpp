#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmol::cli {

// A `--cond` flag: name=v (fixed), name=a:b:c (grid a, a+c, ..., up to b) or
// name=v1,v2,... (set). Each sample draws one value uniformly from the list.
struct ConditionFlag {
  std::string name;
  std::vector<double> values;
};

// Throws UsageError for malformed text.
ConditionFlag parse_condition_flag(std::string_view text);

// Per-sample targets, [sample][flag]. Deterministic in (flags, n, seed) so that
// `sample` and `eval` given the same flags and seed agree on every target.
std::vector<std::vector<double>> draw_targets(std::span<const ConditionFlag> flags, std::size_t n,
                                              std::uint64_t seed);

}  // namespace lmol::cli

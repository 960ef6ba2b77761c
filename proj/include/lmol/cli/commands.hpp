#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmol/cli/conditions.hpp"
#include "lmol/context/context.hpp"
#include "lmol/model/params.hpp"
#include "lmol/smiles/vocab.hpp"

namespace lmol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `lmol` binary; args[0] is the program name. Returns
// 0 on success, 2 for usage errors and 1 for anything that fails at run time.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// Per-sample context specs for a trained model. Throws UsageError for a
// condition the model does not know, a repeated condition, or a fragment that
// does not tokenize into at most the model's fragment cap of known tokens.
struct SampleRequest {
  std::vector<ContextSpec> specs;
  std::vector<std::vector<double>> targets;  // [sample][flag], in flag order
};
SampleRequest build_request(const ModelParams& params, const smiles::Vocabulary& vocab,
                            std::span<const ConditionFlag> flags, const std::optional<std::string>& fragment,
                            std::size_t n, std::uint64_t seed);

}  // namespace lmol::cli

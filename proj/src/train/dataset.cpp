#include "lmol/train/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "lmol/error.hpp"

namespace lmol::inline LMOL_PRECISION_NS {
namespace {
constexpr std::string_view kMagic = "LMDS";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(data.property_names.size()));
  for (const std::string& n : data.property_names) w.string(n);
  w.u64(data.rows.size());
  for (const Example& e : data.rows) {
    if (e.properties.size() != data.property_names.size()) {
      throw DataError("row '" + e.smiles + "' has the wrong number of properties");
    }
    w.string(e.smiles);
    w.u32(static_cast<std::uint32_t>(e.ids.size()));
    for (int id : e.ids) w.u32(static_cast<std::uint32_t>(id));
    for (real v : e.properties) w.f32(static_cast<float>(v));
  }
  w.commit(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  binary::Reader r = binary::Reader::open(path, "dataset");
  if (r.bytes(4) != kMagic) r.fail("bad magic");
  if (r.u32() != kVersion) r.fail("unsupported version");
  Dataset d;
  const std::uint32_t n_props = r.u32();
  for (std::uint32_t i = 0; i < n_props; ++i) d.property_names.push_back(r.string());
  const std::uint64_t n_rows = r.u64();
  for (std::uint64_t i = 0; i < n_rows; ++i) {
    Example e;
    e.smiles = r.string();
    const std::uint32_t n_ids = r.u32();
    if (n_ids > r.remaining() / 4) r.fail("truncated file");
    e.ids.resize(n_ids);
    for (int& id : e.ids) id = static_cast<int>(r.u32());
    e.properties.resize(n_props);
    for (real& v : e.properties) v = static_cast<real>(r.f32());
    d.rows.push_back(std::move(e));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return d;
}

std::pair<std::vector<Example>, std::vector<Example>> split_dataset(std::vector<Example> rows, double ratio,
                                                                    std::uint64_t seed) {
  if (rows.size() < 2) throw DataError("splitting needs at least two rows");
  if (!(ratio > 0 && ratio < 1)) throw ConfigError("split ratio must lie in (0, 1)");
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(rows.size()))), 1, rows.size() - 1);
  std::pair<std::vector<Example>, std::vector<Example>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(std::move(rows[order[i]]));
  }
  return out;
}

}  // namespace lmol

#pragma once

// Random inputs and brute-force references shared by the test binaries.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crop/sparse.hpp"

namespace testing {

inline crop::SparseVector random_vector(std::mt19937_64& rng, std::size_t dim,
                                        std::size_t nnz, bool unit = false) {
  nnz = std::min(nnz, dim);
  std::set<crop::Index> picked;
  std::uniform_int_distribution<std::size_t> pos(0, dim - 1);
  while (picked.size() < nnz) picked.insert(static_cast<crop::Index>(pos(rng)));
  std::vector<crop::Index> idx(picked.begin(), picked.end());
  std::vector<double> val;
  std::uniform_int_distribution<int> mag(1, 9);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    val.push_back(unit ? 1.0 : static_cast<double>(mag(rng)) * (rng() & 1 ? 1 : -1));
  }
  return crop::SparseVector(dim, idx, val);
}

inline std::vector<crop::OuterProduct> random_products(
    std::mt19937_64& rng, std::size_t rows, std::size_t cols,
    std::size_t count, std::size_t max_nnz, bool unit = false) {
  std::uniform_int_distribution<std::size_t> n(0, max_nnz);
  std::vector<crop::OuterProduct> out;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({random_vector(rng, rows, n(rng), unit),
                   random_vector(rng, cols, n(rng), unit)});
  }
  return out;
}

/// Dense accumulation keyed by (row, col) in an ordered map.
inline std::map<std::pair<crop::Index, crop::Index>, double> dense_sum(
    const std::vector<crop::OuterProduct>& products) {
  std::map<std::pair<crop::Index, crop::Index>, double> m;
  for (const auto& p : products) {
    for (std::size_t x = 0; x < p.column.nnz(); ++x) {
      for (std::size_t y = 0; y < p.row.nnz(); ++y) {
        m[{p.column.indices()[x], p.row.indices()[y]}] +=
            p.column.values()[x] * p.row.values()[y];
      }
    }
  }
  std::erase_if(m, [](const auto& kv) { return kv.second == 0.0; });
  return m;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("crop-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

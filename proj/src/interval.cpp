#include "crop/interval.hpp"

#include <algorithm>
#include <numeric>

#include "crop/kernels.hpp"

namespace crop {

WorkerAssignment WorkerAssignment::part(std::uint32_t c, std::uint32_t workers,
                                        std::uint32_t kappa) {
  if (workers == 0 || c >= workers) {
    throw ConfigError("worker index out of range");
  }
  auto bound = [&](std::uint64_t x) {
    return static_cast<std::uint32_t>(x * kappa / workers);
  };
  return WorkerAssignment(bound(c), bound(std::uint64_t{c} + 1), kappa);
}

void bucket_sort_indices(const SparseVector& v, const IndexHashFn& h,
                         HashedIndexArray& out, SortScratch& scratch,
                         std::size_t budget) {
  const std::size_t n = v.nnz();
  out.clear();
  if (n == 0) return;
  if (budget == 0) budget = n;

  scratch.hashes.resize(n);
  kernels::hash_indices(v.indices(), h, scratch.hashes);
  const auto idx = v.indices();
  const auto val = v.values();

  out.hash.resize(n);
  out.index.resize(n);
  out.value.resize(n);

  if (std::uint64_t{h.kappa} <= 8 * std::uint64_t{budget}) {
    // Counting sort; input is in ascending index order so ties stay ordered.
    auto& counts = scratch.counts;
    counts.assign(std::size_t{h.kappa} + 1, 0);
    for (std::uint32_t x : scratch.hashes) ++counts[x + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t pos = counts[scratch.hashes[k]]++;
      out.hash[pos] = scratch.hashes[k];
      out.index[pos] = idx[k];
      out.value[pos] = val[k];
    }
    return;
  }

  auto& order = scratch.order;
  order.resize(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t x, std::uint32_t y) {
                     return scratch.hashes[x] < scratch.hashes[y];
                   });
  for (std::size_t k = 0; k < n; ++k) {
    out.hash[k] = scratch.hashes[order[k]];
    out.index[k] = idx[order[k]];
    out.value[k] = val[order[k]];
  }
}

HashedIndexArray bucket_sort_indices(const SparseVector& v,
                                     const IndexHashFn& h) {
  HashedIndexArray out;
  SortScratch scratch;
  bucket_sort_indices(v, h, out, scratch);
  return out;
}

std::uint64_t count_sorted(const HashedIndexArray& ha,
                           const HashedIndexArray& hb,
                           const WorkerAssignment& w, EnumStats* stats) {
  std::uint64_t steps = 0;
  std::uint64_t total = 0;
  const std::size_t nb = hb.size();
  if (w.q < w.r && nb != 0) {
    const std::int64_t q = w.q;
    const std::int64_t r = w.r;
    const std::int64_t kappa = w.kappa;
    std::size_t lo1 = nb, hi1 = nb, lo2 = nb, hi2 = nb;
    for (std::size_t i = 0; i < ha.size(); ++i) {
      const std::int64_t h = ha.hash[i];
      ++steps;
      hi2 = detail::retreat(hb.hash, hi2, kappa + r - h, steps);
      lo2 = detail::retreat(hb.hash, lo2, kappa + q - h, steps);
      hi1 = detail::retreat(hb.hash, hi1, r - h, steps);
      lo1 = detail::retreat(hb.hash, lo1, q - h, steps);
      total += (hi1 - lo1) + (hi2 - lo2);
    }
  }
  if (stats) stats->steps += steps;
  return total;
}

std::vector<EnumeratedEntry> enumerate_interval(
    const SparseVector& a, const SparseVector& b, const IndexHashFn& h_a,
    const IndexHashFn& h_b, const WorkerAssignment& w, EnumStats* stats) {
  if (h_a.kappa != w.kappa || h_b.kappa != w.kappa) {
    throw ConfigError("hash functions and interval disagree on kappa");
  }
  SortScratch scratch;
  HashedIndexArray ha, hb;
  const std::size_t budget = a.nnz() + b.nnz();
  bucket_sort_indices(a, h_a, ha, scratch, budget);
  bucket_sort_indices(b, h_b, hb, scratch, budget);
  std::vector<EnumeratedEntry> out;
  enumerate_sorted(ha, hb, w,
                   [&](Index row, Index col, double value, std::uint32_t bucket) {
                     out.push_back({Entry{row, col}, value, bucket});
                   },
                   stats);
  return out;
}

std::uint64_t count_interval(const SparseVector& a, const SparseVector& b,
                             const IndexHashFn& h_a, const IndexHashFn& h_b,
                             const WorkerAssignment& w) {
  if (h_a.kappa != w.kappa || h_b.kappa != w.kappa) {
    throw ConfigError("hash functions and interval disagree on kappa");
  }
  SortScratch scratch;
  HashedIndexArray ha, hb;
  const std::size_t budget = a.nnz() + b.nnz();
  bucket_sort_indices(a, h_a, ha, scratch, budget);
  bucket_sort_indices(b, h_b, hb, scratch, budget);
  return count_sorted(ha, hb, w);
}

}  // namespace crop

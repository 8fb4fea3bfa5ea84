#pragma once

// Enumeration of the nonzero entries of one outer product ab whose bucket
// (h_a(i) + h_b(j)) mod kappa falls in a half-open interval [q, r).
//
// Both sides are sorted by hash value. For a fixed element of H_a with hash
// ha, the matching elements of H_b are those with hb in [q - ha, r - ha) or
// [kappa + q - ha, kappa + r - ha): two contiguous runs of H_b. As ha grows
// both runs move left, so four cursors that only ever decrease cover every
// element of H_a in O(|a| + |b| + |output|) steps.

#include <cstdint>
#include <vector>

#include "crop/error.hpp"
#include "crop/hashing.hpp"
#include "crop/sparse.hpp"

namespace crop {

/// Buckets [q, r) of [0, kappa) owned by one worker.
struct WorkerAssignment {
  std::uint32_t q = 0;
  std::uint32_t r = 0;
  std::uint32_t kappa = 1;

  WorkerAssignment() = default;
  WorkerAssignment(std::uint32_t q_, std::uint32_t r_, std::uint32_t kappa_)
      : q(q_), r(r_), kappa(kappa_) {
    if (kappa == 0 || q > r || r > kappa) {
      throw ConfigError("worker interval must satisfy 0 <= q <= r <= kappa");
    }
  }

  std::uint32_t size() const noexcept { return r - q; }
  bool contains(std::uint32_t bucket) const noexcept {
    return bucket >= q && bucket < r;
  }

  /// Interval c of K equal-sized parts: [floor(c*kappa/K), floor((c+1)*kappa/K)).
  static WorkerAssignment part(std::uint32_t c, std::uint32_t workers,
                               std::uint32_t kappa);

  friend bool operator==(const WorkerAssignment&,
                         const WorkerAssignment&) = default;
};

/// Nonzero positions of a vector sorted ascending by hash value, ties in
/// ascending index order.
struct HashedIndexArray {
  std::vector<std::uint32_t> hash;
  std::vector<Index> index;
  std::vector<double> value;

  std::size_t size() const noexcept { return hash.size(); }
  void clear() noexcept {
    hash.clear();
    index.clear();
    value.clear();
  }
};

/// Worker-local buffers reused across outer products.
struct SortScratch {
  std::vector<std::uint32_t> hashes;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint32_t> order;
};

/// Sorts v's nonzeros by h. Uses a counting sort when kappa <= 8 * budget
/// (budget defaults to |v|), otherwise a stable comparison sort.
void bucket_sort_indices(const SparseVector& v, const IndexHashFn& h,
                         HashedIndexArray& out, SortScratch& scratch,
                         std::size_t budget = 0);

HashedIndexArray bucket_sort_indices(const SparseVector& v,
                                     const IndexHashFn& h);

/// Step and yield counters for the enumeration.
struct EnumStats {
  std::uint64_t steps = 0;
  std::uint64_t yields = 0;
};

enum class EntryFilter {
  kAll,
  /// Only entries with row < col (pair mining on v v^T).
  kUpperTriangle,
};

namespace detail {

// Moves `cursor` left to the first position whose hash is >= bound.
inline std::size_t retreat(const std::vector<std::uint32_t>& hb,
                           std::size_t cursor, std::int64_t bound,
                           std::uint64_t& steps) noexcept {
  while (cursor > 0 && static_cast<std::int64_t>(hb[cursor - 1]) >= bound) {
    --cursor;
    ++steps;
  }
  return cursor;
}

}  // namespace detail

/// Calls sink(row, col, value, bucket) for exactly the entries of ab whose
/// bucket lies in [w.q, w.r), each once. Within one bucket the emission order
/// depends only on the sorted arrays, never on the interval.
template <EntryFilter filter = EntryFilter::kAll, typename Sink>
void enumerate_sorted(const HashedIndexArray& ha, const HashedIndexArray& hb,
                      const WorkerAssignment& w, Sink&& sink,
                      EnumStats* stats = nullptr) {
  std::uint64_t steps = 0;
  std::uint64_t yields = 0;
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
      const Index row = ha.index[i];
      const double av = ha.value[i];
      auto emit = [&](std::size_t from, std::size_t to, std::int64_t shift) {
        for (std::size_t j = from; j < to; ++j) {
          const Index col = hb.index[j];
          if constexpr (filter == EntryFilter::kUpperTriangle) {
            ++steps;
            if (row >= col) continue;
          }
          ++yields;
          sink(row, col, av * hb.value[j],
               static_cast<std::uint32_t>(h + hb.hash[j] - shift));
        }
      };
      emit(lo1, hi1, 0);
      emit(lo2, hi2, kappa);
    }
  }
  if (stats) {
    stats->steps += steps + yields;
    stats->yields += yields;
  }
}

/// Number of entries enumerate_sorted would emit (kAll filter), without
/// touching values.
std::uint64_t count_sorted(const HashedIndexArray& ha,
                           const HashedIndexArray& hb,
                           const WorkerAssignment& w,
                           EnumStats* stats = nullptr);

struct EnumeratedEntry {
  Entry entry;
  double value = 0.0;
  std::uint32_t bucket = 0;

  friend bool operator==(const EnumeratedEntry&,
                         const EnumeratedEntry&) = default;
};

/// Convenience form: sorts both sides and materializes the enumeration.
std::vector<EnumeratedEntry> enumerate_interval(
    const SparseVector& a, const SparseVector& b, const IndexHashFn& h_a,
    const IndexHashFn& h_b, const WorkerAssignment& w,
    EnumStats* stats = nullptr);

std::uint64_t count_interval(const SparseVector& a, const SparseVector& b,
                             const IndexHashFn& h_a, const IndexHashFn& h_b,
                             const WorkerAssignment& w);

}  // namespace crop

#pragma once

// Brute-force ground truth for tests and reports. Nothing here touches the
// hashing or enumeration code; weights are accumulated in plain maps.

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "crop/interval.hpp"
#include "crop/sparse.hpp"
#include "crop/transactions.hpp"

namespace crop {

inline constexpr std::uint64_t kDefaultOracleCap = 100'000'000;

/// Exact entry weights of a completed stream; zero weights are absent.
struct ExactProduct {
  std::unordered_map<Entry, double, EntryHash> weights;

  double weight(const Entry& e) const {
    auto it = weights.find(e);
    return it == weights.end() ? 0.0 : it->second;
  }
  std::size_t size() const noexcept { return weights.size(); }
};

/// Accumulates sum_k a_k(i) b_k(j). Refuses (ResourceError) when the total
/// number of products terms exceeds `cap`.
ExactProduct exact_product(OuterProductStream& stream,
                           std::uint64_t cap = kDefaultOracleCap,
                           EntryFilter filter = EntryFilter::kAll);
ExactProduct exact_product(std::span<const OuterProduct> products,
                           std::uint64_t cap = kDefaultOracleCap,
                           EntryFilter filter = EntryFilter::kAll);

/// Support of every item pair {i < j}, by direct counting.
ExactProduct exact_pair_supports(std::span<const Transaction> transactions,
                                 std::uint64_t cap = kDefaultOracleCap);

struct WeightedEntry {
  Entry entry;
  double weight = 0.0;

  friend bool operator==(const WeightedEntry&, const WeightedEntry&) = default;
};

/// Ranked by (|weight| desc, row asc, col asc), truncated to k.
std::vector<WeightedEntry> exact_top(const ExactProduct& product,
                                     std::size_t k);

/// w_i = C / i^z for ranks i = 1..d.
struct ZipfModel {
  double scale = 1.0;
  double exponent = 1.0;
  std::uint64_t distinct = 1;

  double weight(std::uint64_t rank) const;
  void validate() const;
};

struct ZipfStream {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<OuterProduct> products;
  /// Target weights in rank order.
  std::vector<WeightedEntry> truth;
};

/// Places the d ranked weights on d distinct uniformly random entries and
/// factors them into outer products. outer_count = 0 emits one single-entry
/// product per entry. Otherwise outer_count must be at least the number of
/// distinct rows used; each row's weights go into e_i * b products, split
/// evenly over the products assigned to that row. Product order is shuffled.
ZipfStream gen_zipf_stream(const ZipfModel& model, std::size_t rows,
                           std::size_t cols, std::size_t outer_count,
                           std::uint64_t seed);

struct TransactionModel {
  std::size_t item_count = 1000;
  std::size_t tx_count = 10000;
  /// Skew of the item popularity law.
  double exponent = 1.0;
  std::size_t min_length = 2;
  std::size_t max_length = 12;
};

/// Transactions whose items are drawn without replacement from a Zipfian
/// item distribution; lengths uniform in [min_length, max_length].
std::vector<Transaction> gen_zipf_transactions(const TransactionModel& model,
                                               std::uint64_t seed);

struct PowerLawFit {
  /// Negated log-log slope, i.e. z in w ~ C / rank^z.
  double exponent = 0.0;
  double scale = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log(weight) against log(rank) over ranks
/// [first_rank, last_rank] of a descending weight list.
PowerLawFit fit_power_law(std::span<const double> ranked_weights,
                          std::size_t first_rank, std::size_t last_rank);

/// Uniform double in [0, 1) from 53 raw bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; identical on every platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

}  // namespace crop

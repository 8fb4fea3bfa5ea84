#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "crop/sparse.hpp"

namespace crop {

/// Lower and upper bound on an item's weight in the summarized substream.
struct WeightBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct RankedItem {
  Entry item;
  double lower = 0.0;
  double upper = 0.0;
};

/// Weighted Space-Saving summary with at most `capacity` records.
///
/// Each record holds (item, count, overestimation); count - overestimation
/// never exceeds the item's true weight and count never falls below it.
/// Every overestimation is at most total_weight / capacity. When the
/// summary is full an absent item evicts a minimum-count record, the least
/// recently updated one among ties, and inherits its count as its
/// overestimation.
class SpaceSavingSummary {
 public:
  struct Record {
    Entry item;
    double count = 0.0;
    double over = 0.0;
    std::uint64_t stamp = 0;

    friend bool operator==(const Record&, const Record&) = default;
  };

  explicit SpaceSavingSummary(std::uint32_t capacity = 1);

  /// Throws ValueError unless weight > 0.
  void update(const Entry& item, double weight);

  WeightBounds query(const Entry& item) const;
  bool contains(const Entry& item) const { return find(item) < records_.size(); }

  /// Up to k records ranked by (count desc, row asc, col asc).
  std::vector<RankedItem> top(std::size_t k) const;

  std::uint32_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool full() const noexcept { return records_.size() == capacity_; }
  double total_weight() const noexcept { return total_weight_; }
  double min_count() const;

  /// Records in slot order (unspecified but deterministic for a given stream).
  const std::vector<Record>& records() const noexcept { return records_; }

  /// Text form: a header line `capacity total_weight clock size` then one
  /// `row col count over stamp` line per record. Doubles round-trip exactly.
  void write(std::ostream& out) const;
  static SpaceSavingSummary read(std::istream& in);

  friend bool operator==(const SpaceSavingSummary& a,
                         const SpaceSavingSummary& b) {
    return a.capacity_ == b.capacity_ && a.total_weight_ == b.total_weight_ &&
           a.clock_ == b.clock_ && a.records_ == b.records_;
  }

 private:
  // Small summaries scan linearly; larger ones keep an item index and a
  // lazily cleaned min-heap of (count, stamp, slot).
  static constexpr std::uint32_t kLinearLimit = 16;

  struct HeapNode {
    double count;
    std::uint64_t stamp;
    std::uint32_t slot;
  };

  std::size_t find(const Entry& item) const;
  std::size_t min_slot() const;
  void touch(std::size_t slot);
  bool indexed() const noexcept { return capacity_ > kLinearLimit; }

  std::uint32_t capacity_;
  double total_weight_ = 0.0;
  std::uint64_t clock_ = 0;
  std::vector<Record> records_;
  std::unordered_map<Entry, std::uint32_t, EntryHash> index_;
  mutable std::vector<HeapNode> heap_;
};

}  // namespace crop

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "crop/hashing.hpp"

namespace crop {

/// Signed accumulators for the buckets [offset, offset + size) of a
/// Count-Sketch with kappa cells. A full sketch has offset 0 and size kappa;
/// a worker owns only its interval.
class CountSketchArray {
 public:
  CountSketchArray() = default;
  CountSketchArray(std::uint32_t kappa, std::uint32_t offset,
                   std::uint32_t size);
  explicit CountSketchArray(std::uint32_t kappa)
      : CountSketchArray(kappa, 0, kappa) {}
  CountSketchArray(std::uint32_t kappa, std::uint32_t offset,
                   std::vector<double> cells);

  /// cells[bucket] += value * sign. `bucket` must be h(e) for the entry.
  void update(std::uint32_t bucket, double value, int sign) noexcept {
    cells_[bucket - offset_] += sign > 0 ? value : -value;
  }

  /// CS[h(e)] * s(e).
  double query(const HashFamily& hashes, const Entry& e) const;

  double cell(std::uint32_t bucket) const { return cells_.at(bucket - offset_); }
  std::span<const double> cells() const noexcept { return cells_; }
  std::uint32_t kappa() const noexcept { return kappa_; }
  std::uint32_t offset() const noexcept { return offset_; }

  /// Appends the cells of the adjacent range that starts where this one ends.
  void append(const CountSketchArray& next);

  /// Cellwise sum; both arrays must cover the same buckets.
  CountSketchArray& operator+=(const CountSketchArray& other);

  enum class Format { kText, kBinary };

  /// Text: `kappa offset size` then one value per line. Binary: the same
  /// three fields as little-endian u32 followed by little-endian f64 cells.
  void write(std::ostream& out, Format format = Format::kText) const;
  static CountSketchArray read(std::istream& in, Format format = Format::kText);

  friend bool operator==(const CountSketchArray&,
                         const CountSketchArray&) = default;

 private:
  std::uint32_t kappa_ = 0;
  std::uint32_t offset_ = 0;
  std::vector<double> cells_;
};

/// Median of the values; for an even count the mean of the two middle ones.
double median(std::vector<double> values);

/// Number of instances an entry must appear in to be reported: ceil(t / 2).
constexpr std::uint32_t majority_threshold(std::uint32_t instances) noexcept {
  return (instances + 1) / 2;
}

}  // namespace crop

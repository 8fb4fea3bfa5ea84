#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crop {

using Index = std::uint32_t;

/// An output coordinate (i, j) of the product.
struct Entry {
  Index row = 0;
  Index col = 0;

  friend constexpr bool operator==(const Entry&, const Entry&) = default;
  friend constexpr auto operator<=>(const Entry&, const Entry&) = default;
};

struct EntryHash {
  std::size_t operator()(const Entry& e) const noexcept {
    std::uint64_t x = (std::uint64_t{e.row} << 32) | e.col;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

/// Sparse vector stored as parallel index/value arrays. Indices are strictly
/// increasing and below dim(); no stored value is zero. Immutable once built.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Validates the invariants and throws DimensionError on violation.
  SparseVector(std::size_t dim, std::vector<Index> indices,
               std::vector<double> values);

  /// Builds from unsorted (index, value) pairs: sorts, drops zeros. Duplicate
  /// indices are rejected.
  static SparseVector from_unsorted(
      std::size_t dim, std::vector<std::pair<Index, double>> entries);

  /// All-ones vector over the given (strictly increasing) indices.
  static SparseVector indicator(std::size_t dim, std::vector<Index> indices);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

  std::span<const Index> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Value at index i (0 when not stored). O(log nnz).
  double at(Index i) const noexcept;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

/// |a| * |b|, the number of nonzero entries in the outer product ab.
inline std::uint64_t outer_product_nnz(const SparseVector& a,
                                       const SparseVector& b) noexcept {
  return std::uint64_t{a.nnz()} * std::uint64_t{b.nnz()};
}

/// Column k of A paired with row k of B.
struct OuterProduct {
  SparseVector column;
  SparseVector row;

  friend bool operator==(const OuterProduct&, const OuterProduct&) = default;
};

/// Single-pass source of outer products. All columns share rows() as their
/// dimension and all rows share cols().
class OuterProductStream {
 public:
  virtual ~OuterProductStream() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;

  /// Next pair, or nullopt at end of stream.
  virtual std::optional<OuterProduct> next() = 0;

  /// Dropped zero-valued inputs (triples or duplicate items) seen so far.
  virtual std::size_t warnings() const { return 0; }
};

/// In-memory stream over a shared list of products.
class VectorStream final : public OuterProductStream {
 public:
  VectorStream(std::size_t rows, std::size_t cols,
               std::shared_ptr<const std::vector<OuterProduct>> products);
  VectorStream(std::size_t rows, std::size_t cols,
               std::vector<OuterProduct> products);

  std::size_t rows() const override { return rows_; }
  std::size_t cols() const override { return cols_; }
  std::optional<OuterProduct> next() override;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::shared_ptr<const std::vector<OuterProduct>> products_;
  std::size_t pos_ = 0;
};

/// Header of a triple file: `n_rows n_cols kcount`.
struct TripleHeader {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t kcount = 0;
};

/// Reads the column-major A file and row-major B file in lockstep, yielding
/// (column k of A, row k of B) for k = 0 .. kcount-1. Missing k values yield
/// empty vectors.
class TripleFileStream final : public OuterProductStream {
 public:
  TripleFileStream(const std::string& path_a, const std::string& path_b);
  ~TripleFileStream() override;

  std::size_t rows() const override;
  std::size_t cols() const override;
  std::optional<OuterProduct> next() override;
  std::size_t warnings() const override;

  const TripleHeader& header_a() const;
  const TripleHeader& header_b() const;

 private:
  struct Side;
  std::unique_ptr<Side> a_;
  std::unique_ptr<Side> b_;
  std::size_t k_ = 0;
};

std::unique_ptr<OuterProductStream> load_column_row_streams(
    const std::string& path_a, const std::string& path_b);

/// Drains a stream into memory.
std::vector<OuterProduct> collect(OuterProductStream& stream);

/// Writes the A (column-major) and B (row-major) triple files for a list of
/// outer products. A is rows x k, B is k x cols.
void write_triples(std::ostream& a_out, std::ostream& b_out,
                   std::size_t rows, std::size_t cols,
                   std::span<const OuterProduct> products);

/// Formats a double with the shortest round-trip representation.
std::string format_double(double v);

}  // namespace crop

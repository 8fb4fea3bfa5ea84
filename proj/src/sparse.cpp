#include "crop/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "crop/error.hpp"

namespace crop {

SparseVector::SparseVector(std::size_t dim, std::vector<Index> indices,
                           std::vector<double> values)
    : dim_(dim), indices_(std::move(indices)), values_(std::move(values)) {
  if (indices_.size() != values_.size()) {
    throw DimensionError("sparse vector index/value lengths differ");
  }
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] >= dim_) {
      throw DimensionError("sparse vector index " +
                           std::to_string(indices_[k]) + " out of range " +
                           std::to_string(dim_));
    }
    if (k > 0 && indices_[k] <= indices_[k - 1]) {
      throw DimensionError("sparse vector indices not strictly increasing");
    }
    if (values_[k] == 0.0) {
      throw DimensionError("sparse vector stores an explicit zero");
    }
  }
}

SparseVector SparseVector::from_unsorted(
    std::size_t dim, std::vector<std::pair<Index, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Index> idx;
  std::vector<double> val;
  idx.reserve(entries.size());
  val.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].first == entries[k - 1].first) {
      throw DimensionError("duplicate index " +
                           std::to_string(entries[k].first));
    }
    if (entries[k].second == 0.0) continue;
    idx.push_back(entries[k].first);
    val.push_back(entries[k].second);
  }
  return SparseVector(dim, std::move(idx), std::move(val));
}

SparseVector SparseVector::indicator(std::size_t dim,
                                     std::vector<Index> indices) {
  std::vector<double> ones(indices.size(), 1.0);
  return SparseVector(dim, std::move(indices), std::move(ones));
}

double SparseVector::at(Index i) const noexcept {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), i);
  if (it == indices_.end() || *it != i) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

VectorStream::VectorStream(
    std::size_t rows, std::size_t cols,
    std::shared_ptr<const std::vector<OuterProduct>> products)
    : rows_(rows), cols_(cols), products_(std::move(products)) {}

VectorStream::VectorStream(std::size_t rows, std::size_t cols,
                           std::vector<OuterProduct> products)
    : VectorStream(rows, cols,
                   std::make_shared<const std::vector<OuterProduct>>(
                       std::move(products))) {}

std::optional<OuterProduct> VectorStream::next() {
  if (pos_ >= products_->size()) return std::nullopt;
  return (*products_)[pos_++];
}

// ---------------------------------------------------------------------------
// Triple files

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Splits on blanks; returns false if more than `n` fields.
bool split_fields(std::string_view line, std::string_view* fields,
                  std::size_t n, std::size_t& count) {
  count = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (count == n) return false;
    fields[count++] = line.substr(pos, end - pos);
    pos = end;
  }
  return true;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

struct TripleFileStream::Side {
  std::string path;
  std::ifstream in;
  TripleHeader header;
  std::size_t line_no = 0;
  bool is_a = true;
  std::size_t zeros = 0;
  // One triple of look-ahead.
  bool have_pending = false;
  std::size_t pending_k = 0;
  Index pending_index = 0;
  double pending_value = 0.0;
  std::size_t last_k = 0;
  bool any = false;

  Side(const std::string& p, bool a) : path(p), in(p), is_a(a) {
    if (!in) throw IoError("cannot open " + p);
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view t = trim(line);
      if (t.empty()) continue;
      std::string_view f[3];
      std::size_t n = 0;
      if (!split_fields(t, f, 3, n) || n != 3 ||
          !parse_number(f[0], header.rows) || !parse_number(f[1], header.cols) ||
          !parse_number(f[2], header.kcount)) {
        throw ParseError(path + ": expected header `n_rows n_cols kcount`",
                         line_no);
      }
      advance();
      return;
    }
    throw ParseError(path + ": missing header", line_no);
  }

  std::size_t vector_dim() const { return is_a ? header.rows : header.cols; }

  void advance() {
    have_pending = false;
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view t = trim(line);
      if (t.empty()) continue;
      std::string_view f[3];
      std::size_t n = 0;
      std::size_t k = 0;
      std::uint64_t idx = 0;
      double v = 0.0;
      if (!split_fields(t, f, 3, n) || n != 3 || !parse_number(f[0], k) ||
          !parse_number(f[1], idx) || !parse_number(f[2], v)) {
        throw ParseError(path + ": expected triple `k index value`", line_no);
      }
      if (k >= header.kcount) {
        throw ParseError(path + ": k = " + std::to_string(k) +
                             " exceeds kcount " + std::to_string(header.kcount),
                         line_no);
      }
      if (idx >= vector_dim()) {
        throw ParseError(path + ": index " + std::to_string(idx) +
                             " out of range " + std::to_string(vector_dim()),
                         line_no);
      }
      if (any && k < last_k) {
        throw ParseError(path + ": triples not sorted by k", line_no);
      }
      any = true;
      last_k = k;
      if (v == 0.0) {
        ++zeros;
        continue;
      }
      have_pending = true;
      pending_k = k;
      pending_index = static_cast<Index>(idx);
      pending_value = v;
      return;
    }
  }

  SparseVector take(std::size_t k) {
    std::vector<std::pair<Index, double>> entries;
    std::size_t first_line = line_no;
    while (have_pending && pending_k == k) {
      entries.emplace_back(pending_index, pending_value);
      first_line = line_no;
      advance();
    }
    try {
      return SparseVector::from_unsorted(vector_dim(), std::move(entries));
    } catch (const DimensionError& e) {
      throw ParseError(path + ": " + e.what() + " in vector " +
                           std::to_string(k),
                       first_line);
    }
  }
};

TripleFileStream::TripleFileStream(const std::string& path_a,
                                   const std::string& path_b)
    : a_(std::make_unique<Side>(path_a, true)),
      b_(std::make_unique<Side>(path_b, false)) {
  if (a_->header.kcount != b_->header.kcount) {
    throw DimensionError("k-count mismatch: " + path_a + " declares " +
                         std::to_string(a_->header.kcount) + ", " + path_b +
                         " declares " + std::to_string(b_->header.kcount));
  }
}

TripleFileStream::~TripleFileStream() = default;

std::size_t TripleFileStream::rows() const { return a_->header.rows; }
std::size_t TripleFileStream::cols() const { return b_->header.cols; }
std::size_t TripleFileStream::warnings() const { return a_->zeros + b_->zeros; }
const TripleHeader& TripleFileStream::header_a() const { return a_->header; }
const TripleHeader& TripleFileStream::header_b() const { return b_->header; }

std::optional<OuterProduct> TripleFileStream::next() {
  if (k_ >= a_->header.kcount) return std::nullopt;
  OuterProduct p{a_->take(k_), b_->take(k_)};
  ++k_;
  return p;
}

std::unique_ptr<OuterProductStream> load_column_row_streams(
    const std::string& path_a, const std::string& path_b) {
  return std::make_unique<TripleFileStream>(path_a, path_b);
}

std::vector<OuterProduct> collect(OuterProductStream& stream) {
  std::vector<OuterProduct> out;
  while (auto p = stream.next()) out.push_back(std::move(*p));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_triples(std::ostream& a_out, std::ostream& b_out, std::size_t rows,
                   std::size_t cols, std::span<const OuterProduct> products) {
  a_out << rows << ' ' << products.size() << ' ' << products.size() << '\n';
  b_out << products.size() << ' ' << cols << ' ' << products.size() << '\n';
  for (std::size_t k = 0; k < products.size(); ++k) {
    const auto& p = products[k];
    for (std::size_t e = 0; e < p.column.nnz(); ++e) {
      a_out << k << ' ' << p.column.indices()[e] << ' '
            << format_double(p.column.values()[e]) << '\n';
    }
    for (std::size_t e = 0; e < p.row.nnz(); ++e) {
      b_out << k << ' ' << p.row.indices()[e] << ' '
            << format_double(p.row.values()[e]) << '\n';
    }
  }
}

}  // namespace crop

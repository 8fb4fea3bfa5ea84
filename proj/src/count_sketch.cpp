#include "crop/count_sketch.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "crop/error.hpp"
#include "crop/sparse.hpp"

namespace crop {

CountSketchArray::CountSketchArray(std::uint32_t kappa, std::uint32_t offset,
                                   std::uint32_t size)
    : kappa_(kappa), offset_(offset), cells_(size, 0.0) {
  if (kappa == 0 || std::uint64_t{offset} + size > kappa) {
    throw ConfigError("Count-Sketch range outside [0, kappa)");
  }
}

CountSketchArray::CountSketchArray(std::uint32_t kappa, std::uint32_t offset,
                                   std::vector<double> cells)
    : kappa_(kappa), offset_(offset), cells_(std::move(cells)) {
  if (kappa == 0 || std::uint64_t{offset} + cells_.size() > kappa) {
    throw ConfigError("Count-Sketch range outside [0, kappa)");
  }
}

void CountSketchArray::append(const CountSketchArray& next) {
  if (next.kappa_ != kappa_ || next.offset_ != offset_ + cells_.size()) {
    throw ConfigError("Count-Sketch ranges are not adjacent");
  }
  cells_.insert(cells_.end(), next.cells_.begin(), next.cells_.end());
}

double CountSketchArray::query(const HashFamily& hashes, const Entry& e) const {
  const std::uint32_t bucket = hashes.bucket(e);
  if (bucket < offset_ || bucket - offset_ >= cells_.size()) {
    throw ConfigError("Count-Sketch query outside the owned bucket range");
  }
  return cells_[bucket - offset_] * hashes.sign(e);
}

CountSketchArray& CountSketchArray::operator+=(const CountSketchArray& other) {
  if (other.kappa_ != kappa_ || other.offset_ != offset_ ||
      other.cells_.size() != cells_.size()) {
    throw ConfigError("Count-Sketch ranges differ");
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] += other.cells_[k];
  return *this;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw ParseError("count-sketch: truncated binary data", 0);
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(buf, buf + sizeof(T));
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void CountSketchArray::write(std::ostream& out, Format format) const {
  const auto size = static_cast<std::uint32_t>(cells_.size());
  if (format == Format::kBinary) {
    put_le(out, kappa_);
    put_le(out, offset_);
    put_le(out, size);
    for (double c : cells_) put_le(out, c);
    return;
  }
  out << kappa_ << ' ' << offset_ << ' ' << size << '\n';
  for (double c : cells_) out << format_double(c) << '\n';
}

CountSketchArray CountSketchArray::read(std::istream& in, Format format) {
  std::uint32_t kappa = 0, offset = 0, size = 0;
  if (format == Format::kBinary) {
    kappa = get_le<std::uint32_t>(in);
    offset = get_le<std::uint32_t>(in);
    size = get_le<std::uint32_t>(in);
  } else if (!(in >> kappa >> offset >> size)) {
    throw ParseError("count-sketch: bad header", 0);
  }
  CountSketchArray cs(kappa, offset, size);
  for (auto& c : cs.cells_) {
    if (format == Format::kBinary) {
      c = get_le<double>(in);
      continue;
    }
    std::string token;
    if (!(in >> token)) throw ParseError("count-sketch: truncated", 0);
    try {
      c = std::stod(token);
    } catch (const std::exception&) {
      throw ParseError("count-sketch: bad number `" + token + "`", 0);
    }
  }
  return cs;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double upper = values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace crop

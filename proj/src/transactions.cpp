#include "crop/transactions.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "crop/error.hpp"

namespace crop {

FimiReader::FimiReader(const std::string& path, std::size_t universe)
    : universe_(universe) {
  auto f = std::make_unique<std::ifstream>(path);
  if (!*f) throw IoError("cannot open " + path);
  in_ = std::move(f);
}

FimiReader::FimiReader(std::unique_ptr<std::istream> in, std::size_t universe)
    : in_(std::move(in)), universe_(universe) {}

std::optional<Transaction> FimiReader::next() {
  if (!std::getline(*in_, buffer_)) return std::nullopt;
  ++line_;
  Transaction t;
  const char* p = buffer_.data();
  const char* end = p + buffer_.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    std::uint64_t item = 0;
    auto [next, ec] = std::from_chars(p, end, item);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r')) {
      throw ParseError("FIMI: expected a nonnegative item id", line_);
    }
    if (item >= universe_) {
      throw ParseError("FIMI: item " + std::to_string(item) +
                           " outside universe " + std::to_string(universe_),
                       line_);
    }
    t.items.push_back(static_cast<Index>(item));
    p = next;
  }
  std::sort(t.items.begin(), t.items.end());
  const auto before = t.items.size();
  t.items.erase(std::unique(t.items.begin(), t.items.end()), t.items.end());
  duplicates_ += before - t.items.size();
  return t;
}

std::vector<Transaction> read_fimi(const std::string& path, std::size_t universe) {
  FimiReader reader(path, universe);
  std::vector<Transaction> out;
  while (auto t = reader.next()) out.push_back(std::move(*t));
  return out;
}

std::vector<Transaction> parse_fimi(const std::string& text, std::size_t universe) {
  FimiReader reader(std::make_unique<std::istringstream>(text), universe);
  std::vector<Transaction> out;
  while (auto t = reader.next()) out.push_back(std::move(*t));
  return out;
}

void write_fimi(std::ostream& out, std::span<const Transaction> transactions) {
  for (const auto& t : transactions) {
    for (std::size_t k = 0; k < t.items.size(); ++k) {
      if (k) out << ' ';
      out << t.items[k];
    }
    out << '\n';
  }
}

}  // namespace crop

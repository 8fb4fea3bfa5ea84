#pragma once

#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crop/sparse.hpp"

namespace crop {

/// A set of item ids, strictly increasing.
struct Transaction {
  std::vector<Index> items;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

inline constexpr std::size_t kDefaultUniverse =
    std::numeric_limits<Index>::max();

/// Streams transactions from FIMI text: one transaction per line of
/// whitespace-separated nonnegative item ids. Duplicates within a line are
/// dropped and counted. Items >= universe are a ParseError.
class FimiReader {
 public:
  explicit FimiReader(const std::string& path,
                      std::size_t universe = kDefaultUniverse);
  explicit FimiReader(std::unique_ptr<std::istream> in,
                      std::size_t universe = kDefaultUniverse);

  std::optional<Transaction> next();

  std::size_t line() const noexcept { return line_; }
  std::size_t duplicates_dropped() const noexcept { return duplicates_; }
  std::size_t universe() const noexcept { return universe_; }

 private:
  std::unique_ptr<std::istream> in_;
  std::size_t universe_;
  std::size_t line_ = 0;
  std::size_t duplicates_ = 0;
  std::string buffer_;
};

std::vector<Transaction> read_fimi(const std::string& path,
                                   std::size_t universe = kDefaultUniverse);
std::vector<Transaction> parse_fimi(const std::string& text,
                                    std::size_t universe = kDefaultUniverse);
void write_fimi(std::ostream& out, std::span<const Transaction> transactions);

}  // namespace crop

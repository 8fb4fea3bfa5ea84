#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "crop/sparse.hpp"

namespace crop {

/// Modulus of the polynomial hash families (the Mersenne prime 2^61 - 1).
inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

/// (x mod 2^61-1) for x < 2^122.
constexpr std::uint64_t mod_mersenne61(unsigned __int128 x) noexcept {
  std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t s = lo + (hi & kMersenne61) + (hi >> 61);
  s = (s & kMersenne61) + (s >> 61);
  return s >= kMersenne61 ? s - kMersenne61 : s;
}

struct HashConfig {
  std::uint32_t kappa = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const HashConfig&, const HashConfig&) = default;
};

/// h(x) = ((alpha * x + beta) mod p) mod kappa with alpha in [1, p).
struct IndexHashFn {
  std::uint64_t alpha = 1;
  std::uint64_t beta = 0;
  std::uint32_t kappa = 1;

  std::uint32_t operator()(Index x) const noexcept {
    unsigned __int128 v = static_cast<unsigned __int128>(alpha) * x + beta;
    return static_cast<std::uint32_t>(mod_mersenne61(v) % kappa);
  }

  friend bool operator==(const IndexHashFn&, const IndexHashFn&) = default;
};

/// s(i, j) = +1 if ((alpha_row*i + alpha_col*j + beta) mod p) is even, else -1.
/// Defined on whole entries, not composed from per-side signs.
struct SignHashFn {
  std::uint64_t alpha_row = 1;
  std::uint64_t alpha_col = 1;
  std::uint64_t beta = 0;

  int operator()(const Entry& e) const noexcept {
    unsigned __int128 v = static_cast<unsigned __int128>(alpha_row) * e.row +
                          static_cast<unsigned __int128>(alpha_col) * e.col +
                          beta;
    return (mod_mersenne61(v) & 1) ? -1 : 1;
  }

  friend bool operator==(const SignHashFn&, const SignHashFn&) = default;
};

/// The functions broadcast to every worker before processing: per-side index
/// hashes and the entry sign hash. The bucket of an entry is only reachable
/// through (row, col) so its additive structure cannot be bypassed.
class HashFamily {
 public:
  HashFamily() = default;
  HashFamily(HashConfig config, IndexHashFn row, IndexHashFn col,
             SignHashFn sign);

  const HashConfig& config() const noexcept { return config_; }
  std::uint32_t kappa() const noexcept { return config_.kappa; }
  const IndexHashFn& row_hash() const noexcept { return row_; }
  const IndexHashFn& col_hash() const noexcept { return col_; }
  const SignHashFn& sign_hash() const noexcept { return sign_; }

  /// (h_a(row) + h_b(col)) mod kappa.
  std::uint32_t bucket(const Entry& e) const noexcept {
    std::uint64_t s = std::uint64_t{row_(e.row)} + col_(e.col);
    return static_cast<std::uint32_t>(s >= config_.kappa ? s - config_.kappa
                                                         : s);
  }

  int sign(const Entry& e) const noexcept { return sign_(e); }

  /// Text blob `crop-hash v1 ...` from which another process rebuilds
  /// identical functions.
  std::string serialize() const;
  static HashFamily deserialize(std::string_view text);
  /// Reads the same format from a stream, stopping after the last field.
  static HashFamily read(std::istream& in);

  friend bool operator==(const HashFamily&, const HashFamily&) = default;

 private:
  HashConfig config_;
  IndexHashFn row_;
  IndexHashFn col_;
  SignHashFn sign_;
};

/// Draws h_a, h_b, and s independently from one seed. Throws ConfigError for
/// kappa = 0.
HashFamily make_hashes(const HashConfig& config);

/// (h_a(i) + h_b(j)) mod kappa given the two precomputed side hashes.
constexpr std::uint32_t combine_bucket(std::uint32_t ha, std::uint32_t hb,
                                       std::uint32_t kappa) noexcept {
  std::uint64_t s = std::uint64_t{ha} + hb;
  return static_cast<std::uint32_t>(s >= kappa ? s - kappa : s);
}

/// Derives an independent sub-seed from a master seed and a fixed label.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index = 0) noexcept;

}  // namespace crop

#include "crop/hashing.hpp"

#include <random>
#include <sstream>

#include "crop/error.hpp"

namespace crop {
namespace {

// Uniform in [lo, p) from raw 61-bit draws of the fully specified
// mt19937_64, so coefficients are identical on every platform.
std::uint64_t draw_coefficient(std::mt19937_64& rng, std::uint64_t lo) {
  for (;;) {
    std::uint64_t x = rng() >> 3;
    if (x >= lo && x < kMersenne61) return x;
  }
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

HashFamily::HashFamily(HashConfig config, IndexHashFn row, IndexHashFn col,
                       SignHashFn sign)
    : config_(config), row_(row), col_(col), sign_(sign) {
  if (config_.kappa == 0) throw ConfigError("kappa must be at least 1");
  if (row_.kappa != config_.kappa || col_.kappa != config_.kappa) {
    throw ConfigError("index hashes disagree with kappa");
  }
  for (std::uint64_t c : {row_.alpha, col_.alpha, sign_.alpha_row, sign_.alpha_col}) {
    if (c == 0 || c >= kMersenne61) throw ConfigError("hash multiplier out of range");
  }
  for (std::uint64_t c : {row_.beta, col_.beta, sign_.beta}) {
    if (c >= kMersenne61) throw ConfigError("hash offset out of range");
  }
}

HashFamily make_hashes(const HashConfig& config) {
  if (config.kappa == 0) throw ConfigError("kappa must be at least 1");
  std::mt19937_64 rng(config.seed);
  IndexHashFn row{draw_coefficient(rng, 1), draw_coefficient(rng, 0), config.kappa};
  IndexHashFn col{draw_coefficient(rng, 1), draw_coefficient(rng, 0), config.kappa};
  SignHashFn sign;
  sign.alpha_row = draw_coefficient(rng, 1);
  sign.alpha_col = draw_coefficient(rng, 1);
  sign.beta = draw_coefficient(rng, 0);
  return HashFamily(config, row, col, sign);
}

std::string HashFamily::serialize() const {
  std::ostringstream out;
  out << "crop-hash v1\n"
      << "kappa " << config_.kappa << '\n'
      << "seed " << config_.seed << '\n'
      << "prime " << kMersenne61 << '\n'
      << "row " << row_.alpha << ' ' << row_.beta << '\n'
      << "col " << col_.alpha << ' ' << col_.beta << '\n'
      << "sign " << sign_.alpha_row << ' ' << sign_.alpha_col << ' '
      << sign_.beta << '\n';
  return out.str();
}

HashFamily HashFamily::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read(in);
}

HashFamily HashFamily::read(std::istream& in) {
  std::string magic, version, key;
  HashConfig config;
  std::uint64_t prime = 0;
  IndexHashFn row, col;
  SignHashFn sign;
  auto expect = [&](const char* name) {
    if (!(in >> key) || key != name) {
      throw ParseError(std::string("hash description: expected `") + name + "`", 0);
    }
  };
  if (!(in >> magic >> version) || magic != "crop-hash" || version != "v1") {
    throw ParseError("hash description: bad magic", 0);
  }
  expect("kappa");
  in >> config.kappa;
  expect("seed");
  in >> config.seed;
  expect("prime");
  in >> prime;
  expect("row");
  in >> row.alpha >> row.beta;
  expect("col");
  in >> col.alpha >> col.beta;
  expect("sign");
  in >> sign.alpha_row >> sign.alpha_col >> sign.beta;
  if (!in) throw ParseError("hash description: truncated", 0);
  if (prime != kMersenne61) throw ParseError("hash description: unsupported prime", 0);
  row.kappa = col.kappa = config.kappa;
  return HashFamily(config, row, col, sign);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

}  // namespace crop

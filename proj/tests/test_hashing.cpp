#include <cmath>
#include <random>
#include <sstream>

#include "crop/error.hpp"
#include "crop/hashing.hpp"
#include "doctest.h"

using namespace crop;

TEST_CASE("mersenne reduction matches 128-bit remainder") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    unsigned __int128 x = (static_cast<unsigned __int128>(rng() >> 6) << 64) | rng();
    CHECK(mod_mersenne61(x) == static_cast<std::uint64_t>(x % kMersenne61));
  }
  CHECK(mod_mersenne61(kMersenne61) == 0);
  CHECK(mod_mersenne61(2 * static_cast<unsigned __int128>(kMersenne61) - 1) ==
        kMersenne61 - 1);
}

TEST_CASE("same seed gives identical functions") {
  auto h1 = make_hashes({64, 7});
  auto h2 = make_hashes({64, 7});
  CHECK(h1 == h2);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    Entry e{static_cast<Index>(rng()), static_cast<Index>(rng())};
    REQUIRE(h1.bucket(e) == h2.bucket(e));
    REQUIRE(h1.sign(e) == h2.sign(e));
  }
  CHECK_FALSE(make_hashes({64, 8}) == h1);
}

TEST_CASE("kappa 1 sends everything to bucket 0") {
  auto h = make_hashes({1, 99});
  for (Index i = 0; i < 200; ++i) {
    CHECK(h.row_hash()(i) == 0);
    CHECK(h.col_hash()(i * 7 + 3) == 0);
    CHECK(h.bucket({i, i + 1}) == 0);
  }
  CHECK_THROWS_AS(make_hashes({0, 1}), ConfigError);
}

TEST_CASE("golden coefficients for seed 42, kappa 16") {
  auto h = make_hashes({16, 42});
  CHECK(h.row_hash().alpha == 1741270106532265050ULL);
  CHECK(h.row_hash().beta == 1473506072187936853ULL);
  CHECK(h.col_hash().alpha == 1734328753058467681ULL);
  CHECK(h.col_hash().beta == 314223414900644457ULL);
  CHECK(h.sign_hash().alpha_row == 2082796431678554922ULL);
  CHECK(h.sign_hash().alpha_col == 216906759066872303ULL);
  CHECK(h.sign_hash().beta == 1324868919029826692ULL);
}

TEST_CASE("combine_bucket") {
  CHECK(combine_bucket(3, 5, 6) == 2);
  CHECK(combine_bucket(0, 0, 1) == 0);
  CHECK(combine_bucket(15, 15, 16) == 14);
}

TEST_CASE("bucket decomposes into side hashes") {
  auto h = make_hashes({37, 5});
  for (Index i = 0; i < 120; ++i)
    for (Index j = 0; j < 120; ++j)
      REQUIRE(h.bucket({i, j}) ==
              (h.row_hash()(i) + h.col_hash()(j)) % 37);
}

TEST_CASE("bucket occupancy is near uniform") {
  const std::uint32_t kappa = 64;
  auto h = make_hashes({kappa, 17});
  std::vector<std::uint64_t> load(kappa);
  for (Index i = 0; i < 500; ++i)
    for (Index j = 0; j < 500; ++j) ++load[h.bucket({i, j})];
  const double n = 500.0 * 500.0;
  const double mean = n / kappa;
  const double sd = std::sqrt(n * (1.0 / kappa) * (1.0 - 1.0 / kappa));
  for (auto c : load) CHECK(std::abs(c - mean) <= 3 * sd);
}

TEST_CASE("empirical pairwise independence and sign balance") {
  const std::uint32_t kappa = 32;
  const int seeds = 20000;
  const Entry e1{3, 9}, e2{4, 2};
  int collisions = 0;
  long sign_sum = 0;
  for (int s = 0; s < seeds; ++s) {
    auto h = make_hashes({kappa, derive_seed(1234, "pairwise", s)});
    if (h.bucket(e1) == h.bucket(e2)) ++collisions;
    sign_sum += h.sign(e1);
  }
  const double p = 1.0 / kappa;
  const double se = std::sqrt(p * (1 - p) / seeds);
  CHECK(std::abs(static_cast<double>(collisions) / seeds - p) <= 3 * se);
  CHECK(std::abs(static_cast<double>(sign_sum) / seeds) <= 3 / std::sqrt(double(seeds)));
}

TEST_CASE("serialize round trip") {
  auto h = make_hashes({1000, 77});
  auto text = h.serialize();
  CHECK(text.rfind("crop-hash v1", 0) == 0);
  CHECK(HashFamily::deserialize(text) == h);
  std::istringstream in(text + "trailing\n");
  CHECK(HashFamily::read(in) == h);
  CHECK_THROWS_AS(HashFamily::deserialize("crop-hash v2\n"), ParseError);
  CHECK_THROWS_AS(HashFamily({4, 0}, {0, 0, 4}, {1, 0, 4}, {1, 1, 0}), ConfigError);
}

TEST_CASE("derive_seed separates labels and indices") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

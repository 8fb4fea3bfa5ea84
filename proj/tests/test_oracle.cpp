#include <algorithm>
#include <cmath>
#include <random>

#include "crop/error.hpp"
#include "crop/oracle.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crop;

TEST_CASE("exact product basics") {
  std::vector<OuterProduct> unit = {{SparseVector(5, {2}, {1.0}), SparseVector(5, {3}, {1.0})}};
  auto p = exact_product(unit);
  CHECK(p.size() == 1);
  CHECK(p.weight({2, 3}) == 1.0);

  std::vector<OuterProduct> eye;
  for (Index k = 0; k < 4; ++k)
    eye.push_back({SparseVector(4, {k}, {1.0}), SparseVector(4, {k}, {1.0})});
  auto d = exact_product(eye);
  CHECK(d.size() == 4);
  for (Index k = 0; k < 4; ++k) CHECK(d.weight({k, k}) == 1.0);
}

TEST_CASE("exact product is distributive over concatenation") {
  std::mt19937_64 rng(1);
  auto s1 = testing::random_products(rng, 20, 20, 15, 6);
  auto s2 = testing::random_products(rng, 20, 20, 15, 6);
  auto both = s1;
  both.insert(both.end(), s2.begin(), s2.end());
  auto p = exact_product(both), p1 = exact_product(s1), p2 = exact_product(s2);
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j)
      CHECK(p.weight({i, j}) == p1.weight({i, j}) + p2.weight({i, j}));
  // An independent dense accumulation agrees too.
  auto dense = testing::dense_sum(both);
  CHECK(dense.size() == p.size());
  for (const auto& [ij, w] : dense) CHECK(p.weight({ij.first, ij.second}) == w);
}

TEST_CASE("oracle cap") {
  std::vector<OuterProduct> big = {
      {SparseVector::indicator(100, [] {
         std::vector<Index> v(100);
         std::iota(v.begin(), v.end(), 0u);
         return v;
       }()),
       SparseVector(100, {0}, {1.0})}};
  CHECK_THROWS_AS(exact_product(big, 50), ResourceError);
  CHECK_NOTHROW(exact_product(big, 100));
}

TEST_CASE("exact_top ordering") {
  CHECK(exact_top(ExactProduct{}, 5).empty());
  ExactProduct p;
  p.weights[{1, 1}] = 3;
  p.weights[{0, 5}] = -9;
  p.weights[{0, 2}] = 3;
  auto t = exact_top(p, 1);
  REQUIRE(t.size() == 1);
  CHECK(t[0].entry == Entry{0, 5});

  std::mt19937_64 rng(2);
  ExactProduct r;
  for (int k = 0; k < 500; ++k)
    r.weights[{static_cast<Index>(rng() % 30), static_cast<Index>(rng() % 30)}] =
        static_cast<double>(static_cast<int>(rng() % 21) - 10);
  auto top = exact_top(r, 1000);
  std::vector<std::tuple<double, Index, Index>> ref;
  for (const auto& [e, w] : r.weights) ref.emplace_back(-std::abs(w), e.row, e.col);
  std::sort(ref.begin(), ref.end());
  REQUIRE(top.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    CHECK(top[k].entry.row == std::get<1>(ref[k]));
    CHECK(top[k].entry.col == std::get<2>(ref[k]));
  }
}

TEST_CASE("Zipf generator") {
  auto one = gen_zipf_stream({4.0, 1.0, 1}, 10, 10, 0, 1);
  REQUIRE(one.truth.size() == 1);
  CHECK(exact_product(one.products).size() == 1);
  CHECK(exact_product(one.products).weight(one.truth[0].entry) == 4.0);

  ZipfModel m{250.0, 0.9, 3000};
  for (std::size_t outer : {std::size_t{0}, std::size_t{5000}}) {
    auto z = gen_zipf_stream(m, 100, 100, outer, 2);
    auto p = exact_product(z.products);
    CHECK(p.size() == m.distinct);
    for (std::size_t r = 0; r < z.truth.size(); ++r) {
      const double want = 250.0 / std::pow(double(r + 1), 0.9);
      CHECK(z.truth[r].weight == want);
      CHECK(std::abs(p.weight(z.truth[r].entry) - want) <= 1e-9 * want);
    }
    if (outer) CHECK(z.products.size() == outer);
  }
  CHECK_THROWS_AS(gen_zipf_stream(m, 100, 100, 3, 2), ConfigError);
  CHECK_THROWS_AS(gen_zipf_stream({1, 1, 101}, 10, 10, 0, 2), ConfigError);
  CHECK_THROWS_AS(gen_zipf_stream({1, 0, 1}, 10, 10, 0, 2), ConfigError);
  CHECK(gen_zipf_stream(m, 100, 100, 0, 9).truth == gen_zipf_stream(m, 100, 100, 0, 9).truth);
}

TEST_CASE("generated weights fit the requested slope") {
  auto z = gen_zipf_stream({1e6, 1.2, 10000}, 1000, 1000, 0, 3);
  auto p = exact_product(z.products);
  auto top = exact_top(p, 10000);
  std::vector<double> w;
  for (const auto& e : top) w.push_back(e.weight);
  auto fit = fit_power_law(w, 1, w.size());
  CHECK(fit.exponent == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pair supports by direct counting") {
  std::vector<Transaction> tx = {{{0, 1, 2, 3, 4}}};
  auto s = exact_pair_supports(tx);
  CHECK(s.size() == 10);
  for (const auto& [e, w] : s.weights) {
    CHECK(e.row < e.col);
    CHECK(w == 1.0);
  }
  CHECK(gen_zipf_transactions({100, 0, 1.0}, 1).empty());
}

TEST_CASE("synthetic transactions") {
  TransactionModel m{500, 20000, 1.0, 2, 10};
  auto tx = gen_zipf_transactions(m, 4);
  CHECK(tx.size() == 20000);
  for (const auto& t : tx) {
    CHECK(t.items.size() >= 2);
    CHECK(t.items.size() <= 10);
    CHECK(std::is_sorted(t.items.begin(), t.items.end()));
    CHECK(std::adjacent_find(t.items.begin(), t.items.end()) == t.items.end());
  }
  CHECK(gen_zipf_transactions(m, 4) == tx);
  auto supports = exact_top(exact_pair_supports(tx), 2000);
  std::vector<double> w;
  for (const auto& e : supports) w.push_back(e.weight);
  auto fit = fit_power_law(w, 10, w.size());
  MESSAGE("pair-support tail exponent " << fit.exponent << ", r^2 " << fit.r_squared);
  CHECK(fit.exponent > 0.3);
  CHECK(fit.r_squared > 0.8);
}

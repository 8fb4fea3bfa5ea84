#include <fstream>
#include <random>
#include <sstream>

#include "crop/error.hpp"
#include "crop/pair_miner.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crop;

TEST_CASE("transaction to pairs") {
  std::vector<Transaction> tx = {{{1, 2, 3}}};
  EngineConfig cfg;
  cfg.kappa = 8;
  cfg.ss_capacity = 8;
  auto res = mine(tx, cfg, 10);
  CHECK(res.loads[0].total_entries == 3);
  for (Entry e : {Entry{1, 2}, Entry{1, 3}, Entry{2, 3}}) {
    auto q = query(res.state, e);
    CHECK(q.bounds->lower == 1);
    CHECK(q.bounds->upper == 1);
  }
  CHECK(query(res.state, {2, 1}).bounds->upper == 0);

  std::vector<Transaction> single = {{{4}}};
  CHECK(mine(single, cfg, 10).loads[0].total_entries == 0);
}

TEST_CASE("FIMI parsing") {
  auto tx = parse_fimi("1 2 3\n\n 7 5 5 \n");
  REQUIRE(tx.size() == 3);
  CHECK(tx[0].items == std::vector<Index>{1, 2, 3});
  CHECK(tx[1].items.empty());
  CHECK(tx[2].items == std::vector<Index>{5, 7});
  CHECK_THROWS_AS(parse_fimi("1 x\n"), ParseError);
  CHECK_THROWS_AS(parse_fimi("1 -2\n"), ParseError);
  CHECK_THROWS_AS(parse_fimi("1 20\n", 10), ParseError);
  try {
    parse_fimi("1 2\n3 q\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::ostringstream out;
  write_fimi(out, tx);
  CHECK(out.str() == "1 2 3\n\n5 7\n");
}

TEST_CASE("file of one pair") {
  testing::TempDir dir;
  std::ofstream(dir / "t.dat") << "1 2\n";
  EngineConfig cfg;
  cfg.kappa = 4;
  auto res = mine((dir / "t.dat").string(), cfg, 16);
  auto top = top_entries(res.state, 5);
  REQUIRE(top.size() == 1);
  CHECK(top[0].entry == Entry{1, 2});
  CHECK(top[0].lower == 1);
  CHECK(top[0].upper == 1);
}

TEST_CASE("supports match direct counting") {
  std::mt19937_64 rng(1);
  std::vector<Transaction> tx;
  std::uint64_t pairs = 0;
  for (int k = 0; k < 300; ++k) {
    auto v = testing::random_vector(rng, 40, rng() % 9, true);
    tx.push_back({{v.indices().begin(), v.indices().end()}});
    pairs += v.nnz() * (v.nnz() - (v.nnz() ? 1 : 0)) / 2;
  }
  auto oracle = exact_pair_supports(tx);
  EngineConfig cfg;
  cfg.kappa = 2048;
  cfg.ss_capacity = 16;
  cfg.workers = 4;
  auto res = mine(tx, cfg, 40);
  CHECK(res.loads[0].total_entries == pairs);
  for (const auto& [e, w] : oracle.weights) {
    auto q = query(res.state, e);
    CHECK(q.bounds->lower == w);
    CHECK(q.bounds->upper == w);
  }
  auto top = exact_top(oracle, 20);
  CHECK(recall_at_k(res.state, top, 20) == 1.0);
  auto report = bound_ratio_report(res.state, oracle, 20);
  CHECK(report.fraction_tight == 1.0);
  for (const auto& r : report.rows) {
    CHECK(r.lower_ratio() == 1.0);
    CHECK(r.upper_ratio() == 1.0);
  }
}

TEST_CASE("recall edge cases") {
  std::vector<Transaction> none;
  EngineConfig cfg;
  cfg.kappa = 4;
  auto res = mine(none, cfg, 10);
  std::vector<WeightedEntry> truth = {{{1, 2}, 3.0}};
  CHECK(recall_at_k(res.state, truth, 1) == 0.0);
  CHECK(recall_at_k(res.state, truth, 0) == 0.0);
}

TEST_CASE("recall matches a hand-computed intersection") {
  std::mt19937_64 rng(2);
  auto tx = gen_zipf_transactions({200, 3000, 1.0, 2, 8}, 3);
  EngineConfig cfg;
  cfg.kappa = 64;
  cfg.ss_capacity = 2;
  cfg.instances = 3;
  auto res = mine(tx, cfg, 200);
  auto truth = exact_top(exact_pair_supports(tx), 50);
  auto got = top_entries(res.state, 50);
  std::size_t hits = 0;
  for (const auto& g : got)
    for (const auto& t : truth)
      if (g.entry == t.entry) ++hits;
  CHECK(recall_at_k(res.state, truth, 50) == doctest::Approx(hits / 50.0));
}

TEST_CASE("severe under-provisioning gives loose bounds") {
  auto tx = gen_zipf_transactions({300, 2000, 0.5, 3, 10}, 5);
  EngineConfig cfg;
  cfg.kappa = 1;
  cfg.ss_capacity = 2;
  auto res = mine(tx, cfg, 300);
  auto report = bound_ratio_report(res.state, exact_pair_supports(tx), 100);
  CHECK(report.fraction_tight < 0.1);
}

TEST_CASE("mean recall grows with kappa") {
  auto tx = gen_zipf_transactions({400, 4000, 1.0, 2, 10}, 6);
  auto truth = exact_top(exact_pair_supports(tx), 50);
  std::vector<double> means;
  for (std::uint32_t kappa = 16; kappa <= 1024; kappa *= 2) {
    double mean = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EngineConfig cfg;
      cfg.kappa = kappa;
      cfg.ss_capacity = 2;
      cfg.cs_enabled = false;
      cfg.seed = seed;
      mean += recall_at_k(mine(tx, cfg, 400).state, truth, 50) / 20;
    }
    means.push_back(mean);
  }
  int inversions = 0;
  for (std::size_t k = 1; k < means.size(); ++k)
    if (means[k] < means[k - 1]) ++inversions;
  CHECK(inversions <= 1);
  CHECK(means.back() > means.front());
}

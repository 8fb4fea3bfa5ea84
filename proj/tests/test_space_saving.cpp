#include <map>
#include <random>
#include <sstream>

#include "crop/error.hpp"
#include "crop/space_saving.hpp"
#include "doctest.h"

using namespace crop;

namespace {

const Entry A{0, 1}, B{0, 2}, C{5, 5};

using Rec = SpaceSavingSummary::Record;

bool same(const Rec& r, Entry item, double count, double over) {
  return r.item == item && r.count == count && r.over == over;
}

}  // namespace

TEST_CASE("single-record hand simulation") {
  SpaceSavingSummary s(1);
  s.update(A, 1);
  REQUIRE(s.records().size() == 1);
  CHECK(same(s.records()[0], A, 1, 0));
  s.update(B, 1);
  CHECK(same(s.records()[0], B, 2, 1));
  s.update(A, 1);
  CHECK(same(s.records()[0], A, 3, 2));
  auto q = s.query(A);
  CHECK(q.lower == 1);
  CHECK(q.upper == 3);
  CHECK(q.lower <= 2);
  CHECK(q.upper >= 2);
}

TEST_CASE("basic queries") {
  SpaceSavingSummary s(4);
  CHECK(s.query(A).lower == 0);
  CHECK(s.query(A).upper == 0);
  s.update(A, 5);
  CHECK(s.query(A).lower == 5);
  CHECK(s.query(A).upper == 5);
  CHECK(s.query(B).upper == 0);
  CHECK_THROWS_AS(s.update(A, 0), ValueError);
  CHECK_THROWS_AS(s.update(A, -1), ValueError);
  CHECK_THROWS_AS(SpaceSavingSummary(0), ConfigError);
}

TEST_CASE("ties evict the least recently updated record") {
  SpaceSavingSummary s(2);
  s.update(A, 1);
  s.update(B, 1);
  s.update(C, 1);  // A and B tie at 1; A is older
  CHECK_FALSE(s.contains(A));
  CHECK(s.contains(B));
  CHECK(s.query(C).upper == 2);
  CHECK(s.query(C).lower == 1);
}

TEST_CASE("top ranking") {
  SpaceSavingSummary s(3);
  CHECK(s.top(5).empty());
  s.update(A, 2);
  s.update(B, 7);
  s.update(C, 2);
  CHECK(s.top(0).empty());
  auto t = s.top(5);
  REQUIRE(t.size() == 3);
  CHECK(t[0].item == B);
  CHECK(t[1].item == A);  // tie on count, row then col ascending
  CHECK(t[2].item == C);
  CHECK(s.top(1).size() == 1);
}

TEST_CASE("exact when capacity covers the distinct items") {
  std::mt19937_64 rng(1);
  for (std::uint32_t cap : {4u, 40u}) {
    SpaceSavingSummary s(cap);
    std::map<Entry, double> truth;
    for (int n = 0; n < 2000; ++n) {
      Entry e{static_cast<Index>(rng() % 4), 0};
      const double w = 1 + rng() % 5;
      s.update(e, w);
      truth[e] += w;
    }
    for (const auto& [e, w] : truth) {
      CHECK(s.query(e).lower == w);
      CHECK(s.query(e).upper == w);
    }
    for (const auto& r : s.records()) CHECK(r.over == 0);
  }
}

TEST_CASE("sandwich, overestimation bound, and capture on random streams") {
  std::mt19937_64 rng(2);
  // Both the linear-scan and the indexed structure.
  for (std::uint32_t cap : {1u, 2u, 8u, 16u, 17u, 64u}) {
    for (int trial = 0; trial < 40; ++trial) {
      SpaceSavingSummary s(cap);
      std::map<Entry, double> truth;
      const int universe = 2 + static_cast<int>(rng() % 200);
      for (int n = 0; n < 1500; ++n) {
        // Skewed item choice so that some items are heavy.
        const auto u = static_cast<double>(rng() % 1000000) / 1e6;
        Entry e{static_cast<Index>(u * u * universe), 1};
        const double w = static_cast<double>(1 + rng() % 10);
        s.update(e, w);
        truth[e] += w;
      }
      const double m = s.total_weight();
      for (const auto& r : s.records()) REQUIRE(r.over <= m / cap);
      for (const auto& [e, w] : truth) {
        const auto q = s.query(e);
        REQUIRE(q.lower <= w);
        REQUIRE(q.upper >= w);
        if (w > m / cap) REQUIRE(s.contains(e));
      }
      // Items never seen.
      const auto q = s.query({999999, 0});
      CHECK(q.lower == 0);
      CHECK(q.upper == (s.full() ? s.min_count() : 0.0));
    }
  }
}

TEST_CASE("top agrees with truth where bounds separate") {
  std::mt19937_64 rng(3);
  SpaceSavingSummary s(20);
  std::map<Entry, double> truth;
  for (int n = 0; n < 5000; ++n) {
    const auto u = static_cast<double>(rng() % 1000000) / 1e6;
    Entry e{static_cast<Index>(u * u * u * 100), 0};
    s.update(e, 1);
    truth[e] += 1;
  }
  auto t = s.top(20);
  for (std::size_t x = 0; x < t.size(); ++x)
    for (std::size_t y = x + 1; y < t.size(); ++y)
      if (t[x].lower > t[y].upper) CHECK(truth[t[x].item] > truth[t[y].item]);
}

TEST_CASE("linear and indexed variants agree on state") {
  // A capacity just over the linear limit must follow the same rules; compare
  // against a minimal reference implementation.
  std::mt19937_64 rng(4);
  const std::uint32_t cap = 24;
  SpaceSavingSummary s(cap);
  struct RefRec {
    Entry item;
    double count, over;
    std::uint64_t stamp;
  };
  std::vector<RefRec> ref;
  std::uint64_t clock = 0;
  for (int n = 0; n < 20000; ++n) {
    Entry e{static_cast<Index>(rng() % 60), 0};
    const double w = static_cast<double>(1 + rng() % 3);
    s.update(e, w);
    ++clock;
    auto it = std::find_if(ref.begin(), ref.end(), [&](auto& r) { return r.item == e; });
    if (it != ref.end()) {
      it->count += w;
      it->stamp = clock;
    } else if (ref.size() < cap) {
      ref.push_back({e, w, 0, clock});
    } else {
      auto mn = std::min_element(ref.begin(), ref.end(), [](auto& x, auto& y) {
        return x.count != y.count ? x.count < y.count : x.stamp < y.stamp;
      });
      *mn = {e, mn->count + w, mn->count, clock};
    }
  }
  for (const auto& r : ref) {
    REQUIRE(s.contains(r.item));
    CHECK(s.query(r.item).upper == r.count);
    CHECK(s.query(r.item).lower == r.count - r.over);
  }
}

TEST_CASE("text round trip") {
  std::mt19937_64 rng(5);
  for (std::uint32_t cap : {3u, 30u}) {
    SpaceSavingSummary s(cap);
    for (int n = 0; n < 300; ++n)
      s.update({static_cast<Index>(rng() % 50), 2}, 0.1 * (1 + rng() % 7));
    std::stringstream io;
    s.write(io);
    auto back = SpaceSavingSummary::read(io);
    CHECK(back == s);
    // The restored summary keeps evolving identically.
    s.update({3, 2}, 1.5);
    back.update({3, 2}, 1.5);
    CHECK(back == s);
  }
}

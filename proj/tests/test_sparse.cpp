#include <fstream>
#include <sstream>

#include "crop/error.hpp"
#include "crop/sparse.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace crop;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("sparse vector invariants") {
  SparseVector v(10, {1, 4, 9}, {1.0, -2.0, 0.5});
  CHECK(v.nnz() == 3);
  CHECK(v.at(4) == -2.0);
  CHECK(v.at(5) == 0.0);
  CHECK_THROWS_AS(SparseVector(10, {4, 1}, {1.0, 1.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(10, {10}, {1.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(10, {2}, {0.0}), DimensionError);
  CHECK_THROWS_AS(SparseVector(10, {1, 2}, {1.0}), DimensionError);
}

TEST_CASE("from_unsorted sorts, drops zeros, rejects duplicates") {
  auto v = SparseVector::from_unsorted(8, {{5, 2.0}, {1, 0.0}, {0, 3.0}});
  CHECK(v.nnz() == 2);
  CHECK(v.indices()[0] == 0);
  CHECK(v.indices()[1] == 5);
  CHECK_THROWS_AS(SparseVector::from_unsorted(8, {{1, 1.0}, {1, 2.0}}),
                  DimensionError);
}

TEST_CASE("outer product nonzero count") {
  std::mt19937_64 rng(3);
  CHECK(outer_product_nnz(SparseVector(5), testing::random_vector(rng, 5, 3)) == 0);
  CHECK(outer_product_nnz(testing::random_vector(rng, 9, 3),
                          testing::random_vector(rng, 9, 4)) == 12);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = testing::random_vector(rng, 30, rng() % 12);
    auto b = testing::random_vector(rng, 30, rng() % 12);
    std::uint64_t brute = 0;
    for (Index i = 0; i < 30; ++i)
      for (Index j = 0; j < 30; ++j)
        if (a.at(i) != 0.0 && b.at(j) != 0.0) ++brute;
    CHECK(outer_product_nnz(a, b) == brute);
  }
}

TEST_CASE("triple files: single triple") {
  testing::TempDir dir;
  write_file(dir / "a.txt", "1 1 1\n0 0 1.0\n");
  write_file(dir / "b.txt", "1 1 1\n0 0 2.0\n");
  auto s = load_column_row_streams(dir / "a.txt", dir / "b.txt");
  auto all = collect(*s);
  REQUIRE(all.size() == 1);
  CHECK(all[0].column == SparseVector(1, {0}, {1.0}));
  CHECK(all[0].row == SparseVector(1, {0}, {2.0}));
}

TEST_CASE("triple files: empty stream keeps dimensions") {
  testing::TempDir dir;
  write_file(dir / "a.txt", "4 0 0\n");
  write_file(dir / "b.txt", "0 4 0\n");
  TripleFileStream s(dir / "a.txt", dir / "b.txt");
  CHECK(s.rows() == 4);
  CHECK(s.cols() == 4);
  CHECK_FALSE(s.next().has_value());
}

TEST_CASE("triple files: errors") {
  testing::TempDir dir;
  write_file(dir / "ok.txt", "3 3 2\n0 0 1\n");
  CHECK_THROWS_AS(TripleFileStream(dir / "missing", dir / "ok.txt"), IoError);

  write_file(dir / "bad.txt", "3 3 2\n0 zero 1\n");
  CHECK_THROWS_AS(collect(*load_column_row_streams(dir / "bad.txt", dir / "ok.txt")),
                  ParseError);

  write_file(dir / "range.txt", "3 3 2\n0 7 1\n");
  try {
    collect(*load_column_row_streams(dir / "range.txt", dir / "ok.txt"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  write_file(dir / "unsorted.txt", "3 3 2\n1 0 1\n0 1 1\n");
  CHECK_THROWS_AS(collect(*load_column_row_streams(dir / "unsorted.txt", dir / "ok.txt")),
                  ParseError);

  write_file(dir / "k3.txt", "3 3 3\n");
  CHECK_THROWS_AS(TripleFileStream(dir / "ok.txt", dir / "k3.txt"), DimensionError);
}

TEST_CASE("triple files: zero values dropped with a warning") {
  testing::TempDir dir;
  write_file(dir / "a.txt", "2 1 1\n0 0 0\n0 1 3\n");
  write_file(dir / "b.txt", "1 2 1\n0 1 1\n");
  TripleFileStream s(dir / "a.txt", dir / "b.txt");
  auto p = s.next();
  REQUIRE(p);
  CHECK(p->column == SparseVector(2, {1}, {3.0}));
  CHECK(s.warnings() == 1);
}

TEST_CASE("triple files: random round trip against dense reconstruction") {
  std::mt19937_64 rng(11);
  testing::TempDir dir;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng() % 20, cols = 1 + rng() % 20;
    auto products = testing::random_products(rng, rows, cols, 3, 6);
    {
      std::ofstream a(dir / "a.txt"), b(dir / "b.txt");
      write_triples(a, b, rows, cols, products);
    }
    // Independent parse into dense matrices.
    std::vector<std::vector<double>> A(rows, std::vector<double>(3)),
        B(3, std::vector<double>(cols));
    {
      std::ifstream a(dir / "a.txt");
      std::size_t r, c, k;
      a >> r >> c >> k;
      CHECK(r == rows);
      std::size_t kk, i;
      double v;
      while (a >> kk >> i >> v) A[i][kk] = v;
      std::ifstream b(dir / "b.txt");
      b >> r >> c >> k;
      while (b >> kk >> i >> v) B[kk][i] = v;
    }
    auto loaded = collect(*load_column_row_streams(dir / "a.txt", dir / "b.txt"));
    REQUIRE(loaded.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < rows; ++i)
        CHECK(loaded[k].column.at(static_cast<Index>(i)) == A[i][k]);
      for (std::size_t j = 0; j < cols; ++j)
        CHECK(loaded[k].row.at(static_cast<Index>(j)) == B[k][j]);
      CHECK(loaded[k] == products[k]);
    }
    // Writing the loaded stream again reproduces the files byte for byte.
    std::ostringstream a2, b2;
    write_triples(a2, b2, rows, cols, loaded);
    std::stringstream a1;
    a1 << std::ifstream(dir / "a.txt").rdbuf();
    CHECK(a1.str() == a2.str());
  }
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(1.0) == "1");
}

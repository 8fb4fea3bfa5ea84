#include "crop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "crop/error.hpp"

namespace crop {
namespace {

void accumulate(ExactProduct& out, const OuterProduct& p, EntryFilter filter,
                std::uint64_t& terms, std::uint64_t cap) {
  const auto ai = p.column.indices();
  const auto av = p.column.values();
  const auto bi = p.row.indices();
  const auto bv = p.row.values();
  terms += std::uint64_t{ai.size()} * bi.size();
  if (terms > cap) {
    throw ResourceError("oracle cap of " + std::to_string(cap) +
                        " product terms exceeded");
  }
  for (std::size_t x = 0; x < ai.size(); ++x) {
    for (std::size_t y = 0; y < bi.size(); ++y) {
      if (filter == EntryFilter::kUpperTriangle && ai[x] >= bi[y]) continue;
      out.weights[Entry{ai[x], bi[y]}] += av[x] * bv[y];
    }
  }
}

void drop_zeros(ExactProduct& out) {
  std::erase_if(out.weights, [](const auto& kv) { return kv.second == 0.0; });
}

}  // namespace

ExactProduct exact_product(OuterProductStream& stream, std::uint64_t cap,
                           EntryFilter filter) {
  ExactProduct out;
  std::uint64_t terms = 0;
  while (auto p = stream.next()) accumulate(out, *p, filter, terms, cap);
  drop_zeros(out);
  return out;
}

ExactProduct exact_product(std::span<const OuterProduct> products,
                           std::uint64_t cap, EntryFilter filter) {
  ExactProduct out;
  std::uint64_t terms = 0;
  for (const auto& p : products) accumulate(out, p, filter, terms, cap);
  drop_zeros(out);
  return out;
}

ExactProduct exact_pair_supports(std::span<const Transaction> transactions,
                                 std::uint64_t cap) {
  ExactProduct out;
  std::uint64_t terms = 0;
  for (const auto& t : transactions) {
    const auto& items = t.items;
    terms += std::uint64_t{items.size()} * items.size();
    if (terms > cap) throw ResourceError("oracle cap exceeded");
    for (std::size_t x = 0; x < items.size(); ++x) {
      for (std::size_t y = x + 1; y < items.size(); ++y) {
        out.weights[Entry{items[x], items[y]}] += 1.0;
      }
    }
  }
  return out;
}

std::vector<WeightedEntry> exact_top(const ExactProduct& product, std::size_t k) {
  std::vector<WeightedEntry> all;
  all.reserve(product.size());
  for (const auto& [e, w] : product.weights) all.push_back({e, w});
  auto before = [](const WeightedEntry& a, const WeightedEntry& b) {
    const double wa = std::abs(a.weight), wb = std::abs(b.weight);
    if (wa != wb) return wa > wb;
    return a.entry < b.entry;
  };
  if (k < all.size()) {
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k),
                      all.end(), before);
    all.resize(k);
  } else {
    std::sort(all.begin(), all.end(), before);
  }
  return all;
}

double ZipfModel::weight(std::uint64_t rank) const {
  return scale / std::pow(static_cast<double>(rank), exponent);
}

void ZipfModel::validate() const {
  if (!(scale > 0.0)) throw ConfigError("Zipf scale C must be positive");
  if (!(exponent > 0.0)) throw ConfigError("Zipf exponent z must be positive");
  if (distinct == 0) throw ConfigError("Zipf model needs d >= 1");
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
  }
}

}  // namespace

ZipfStream gen_zipf_stream(const ZipfModel& model, std::size_t rows,
                           std::size_t cols, std::size_t outer_count,
                           std::uint64_t seed) {
  model.validate();
  const long double cells = static_cast<long double>(rows) * cols;
  if (rows == 0 || cols == 0 || static_cast<long double>(model.distinct) > cells) {
    throw ConfigError("Zipf stream needs d <= rows * cols");
  }
  std::mt19937_64 rng(seed);

  // d distinct cells, uniformly at random.
  std::vector<Entry> cells_used;
  cells_used.reserve(model.distinct);
  if (static_cast<long double>(model.distinct) * 4 >= cells) {
    std::vector<std::uint64_t> all(rows * cols);
    std::iota(all.begin(), all.end(), 0);
    for (std::uint64_t i = 0; i < model.distinct; ++i) {
      std::swap(all[i], all[i + uniform_below(rng, all.size() - i)]);
      cells_used.push_back({static_cast<Index>(all[i] / cols),
                            static_cast<Index>(all[i] % cols)});
    }
  } else {
    std::unordered_set<Entry, EntryHash> taken;
    while (cells_used.size() < model.distinct) {
      Entry e{static_cast<Index>(uniform_below(rng, rows)),
              static_cast<Index>(uniform_below(rng, cols))};
      if (taken.insert(e).second) cells_used.push_back(e);
    }
  }

  ZipfStream out;
  out.rows = rows;
  out.cols = cols;
  out.truth.reserve(model.distinct);
  for (std::uint64_t i = 0; i < model.distinct; ++i) {
    out.truth.push_back({cells_used[i], model.weight(i + 1)});
  }

  if (outer_count == 0) {
    for (const auto& [e, w] : out.truth) {
      out.products.push_back({SparseVector(rows, {e.row}, {w}),
                              SparseVector(cols, {e.col}, {1.0})});
    }
    shuffle(out.products, rng);
    return out;
  }

  // Group by row; row i is expressed as e_i * b with b holding its weights.
  std::vector<std::pair<Index, std::vector<std::pair<Index, double>>>> by_row;
  {
    std::vector<WeightedEntry> sorted = out.truth;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.entry < b.entry; });
    for (const auto& [e, w] : sorted) {
      if (by_row.empty() || by_row.back().first != e.row) by_row.push_back({e.row, {}});
      by_row.back().second.emplace_back(e.col, w);
    }
  }
  if (outer_count < by_row.size()) {
    throw ConfigError("outer_count " + std::to_string(outer_count) +
                      " is below the " + std::to_string(by_row.size()) +
                      " distinct rows that need their own outer product");
  }
  const std::size_t base = outer_count / by_row.size();
  const std::size_t extra = outer_count % by_row.size();
  for (std::size_t r = 0; r < by_row.size(); ++r) {
    const std::size_t m = base + (r < extra ? 1 : 0);
    std::vector<Index> idx;
    std::vector<double> part;
    for (const auto& [c, w] : by_row[r].second) {
      idx.push_back(c);
      part.push_back(w / static_cast<double>(m));
    }
    for (std::size_t k = 0; k < m; ++k) {
      out.products.push_back({SparseVector(rows, {by_row[r].first}, {1.0}),
                              SparseVector(cols, idx, part)});
    }
  }
  shuffle(out.products, rng);
  return out;
}

std::vector<Transaction> gen_zipf_transactions(const TransactionModel& model,
                                               std::uint64_t seed) {
  if (model.item_count == 0 || model.min_length > model.max_length ||
      model.max_length > model.item_count) {
    throw ConfigError("transaction model: need 0 < min_length <= max_length <= item_count");
  }
  std::mt19937_64 rng(seed);
  // Item popularity: item k has weight 1 / (rank_k)^z under a random
  // assignment of ranks to item ids.
  std::vector<Index> rank_to_item(model.item_count);
  std::iota(rank_to_item.begin(), rank_to_item.end(), 0u);
  shuffle(rank_to_item, rng);
  std::vector<double> cdf(model.item_count);
  double acc = 0.0;
  for (std::size_t r = 0; r < model.item_count; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), model.exponent);
    cdf[r] = acc;
  }

  std::vector<Transaction> out;
  out.reserve(model.tx_count);
  std::vector<Index> items;
  for (std::size_t t = 0; t < model.tx_count; ++t) {
    const std::size_t len =
        model.min_length + uniform_below(rng, model.max_length - model.min_length + 1);
    items.clear();
    while (items.size() < len) {
      const double u = uniform01(rng) * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t r = std::min<std::size_t>(
          static_cast<std::size_t>(it - cdf.begin()), model.item_count - 1);
      const Index item = rank_to_item[r];
      if (std::find(items.begin(), items.end(), item) == items.end()) {
        items.push_back(item);
      }
    }
    std::sort(items.begin(), items.end());
    out.push_back({items});
  }
  return out;
}

PowerLawFit fit_power_law(std::span<const double> ranked_weights,
                          std::size_t first_rank, std::size_t last_rank) {
  if (first_rank == 0 || last_rank < first_rank + 1 ||
      last_rank > ranked_weights.size()) {
    throw ConfigError("power-law fit needs 1 <= first < last <= size");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (std::size_t r = first_rank; r <= last_rank; ++r) {
    const double w = ranked_weights[r - 1];
    if (!(w > 0.0)) continue;
    const double x = std::log(static_cast<double>(r));
    const double y = std::log(w);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) throw ConfigError("power-law fit needs two positive weights");
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  PowerLawFit fit;
  const double slope = cov / vx;
  fit.exponent = -slope;
  fit.scale = std::exp((sy - slope * sx) / n);
  fit.r_squared = vy > 0.0 ? (cov * cov) / (vx * vy) : 1.0;
  return fit;
}

}  // namespace crop

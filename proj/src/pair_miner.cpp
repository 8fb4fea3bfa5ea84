#include "crop/pair_miner.hpp"

#include <algorithm>
#include <unordered_set>

namespace crop {

OuterProduct transaction_to_outer(const Transaction& t, std::size_t universe) {
  auto v = SparseVector::indicator(universe, t.items);
  return {v, v};
}

TransactionStream::TransactionStream(std::unique_ptr<FimiReader> reader)
    : reader_(std::move(reader)) {}

std::optional<OuterProduct> TransactionStream::next() {
  auto t = reader_->next();
  if (!t) return std::nullopt;
  return transaction_to_outer(*t, reader_->universe());
}

std::optional<OuterProduct> TransactionVectorStream::next() {
  if (pos_ >= transactions_.size()) return std::nullopt;
  return transaction_to_outer(transactions_[pos_++], universe_);
}

RunResult mine(const std::string& path, EngineConfig config,
               std::size_t universe) {
  config.filter = EntryFilter::kUpperTriangle;
  TransactionStream stream(std::make_unique<FimiReader>(path, universe));
  return run(stream, config);
}

RunResult mine(std::span<const Transaction> transactions, EngineConfig config,
               std::size_t universe) {
  config.filter = EntryFilter::kUpperTriangle;
  TransactionVectorStream stream(transactions, universe);
  return run(stream, config);
}

double recall_at_k(const SketchState& state,
                   std::span<const WeightedEntry> oracle_topk, std::size_t k) {
  if (k == 0) return 0.0;
  std::unordered_set<Entry, EntryHash> truth;
  for (std::size_t i = 0; i < std::min(k, oracle_topk.size()); ++i) {
    truth.insert(oracle_topk[i].entry);
  }
  std::size_t hits = 0;
  for (const auto& top : top_entries(state, k)) {
    if (truth.contains(top.entry)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

BoundRatioReport bound_ratio_report(const SketchState& state,
                                    const ExactProduct& oracle, std::size_t k) {
  BoundRatioReport report;
  std::size_t tight = 0;
  double sum = 0.0;
  for (const auto& we : exact_top(oracle, k)) {
    BoundRatio row;
    row.entry = we.entry;
    row.truth = we.weight;
    const auto est = query(state, we.entry);
    if (est.bounds) {
      row.lower = est.bounds->lower;
      row.upper = est.bounds->upper;
    }
    if (row.tightness() >= kTightRatio) ++tight;
    sum += row.tightness();
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    report.fraction_tight = static_cast<double>(tight) / report.rows.size();
    report.mean_tightness = sum / report.rows.size();
  }
  return report;
}

}  // namespace crop

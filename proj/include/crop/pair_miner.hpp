#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "crop/engine.hpp"
#include "crop/oracle.hpp"
#include "crop/transactions.hpp"

namespace crop {

/// v_T paired with itself; mining filters the product to row < col so each
/// pair contributes exactly 1 per containing transaction.
OuterProduct transaction_to_outer(const Transaction& t,
                                  std::size_t universe = kDefaultUniverse);

/// Outer-product view of a FIMI file.
class TransactionStream final : public OuterProductStream {
 public:
  explicit TransactionStream(std::unique_ptr<FimiReader> reader);

  std::size_t rows() const override { return reader_->universe(); }
  std::size_t cols() const override { return reader_->universe(); }
  std::optional<OuterProduct> next() override;
  std::size_t warnings() const override {
    return reader_->duplicates_dropped();
  }

 private:
  std::unique_ptr<FimiReader> reader_;
};

/// Like VectorStream but over in-memory transactions.
class TransactionVectorStream final : public OuterProductStream {
 public:
  TransactionVectorStream(std::span<const Transaction> transactions,
                          std::size_t universe = kDefaultUniverse)
      : transactions_(transactions), universe_(universe) {}

  std::size_t rows() const override { return universe_; }
  std::size_t cols() const override { return universe_; }
  std::optional<OuterProduct> next() override;

 private:
  std::span<const Transaction> transactions_;
  std::size_t universe_;
  std::size_t pos_ = 0;
};

/// Runs the engine over a FIMI file with the upper-triangle filter forced on.
RunResult mine(const std::string& path, EngineConfig config,
               std::size_t universe = kDefaultUniverse);
RunResult mine(std::span<const Transaction> transactions, EngineConfig config,
               std::size_t universe = kDefaultUniverse);

/// |top_entries(state, k) intersect oracle_topk[0, k)| / k. 0 when k = 0.
double recall_at_k(const SketchState& state,
                   std::span<const WeightedEntry> oracle_topk, std::size_t k);

struct BoundRatio {
  Entry entry;
  double truth = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  double lower_ratio() const { return lower / truth; }
  double upper_ratio() const { return upper / truth; }
  /// lower / upper (1 when the bounds coincide).
  double tightness() const { return upper > 0.0 ? lower / upper : 1.0; }
};

struct BoundRatioReport {
  std::vector<BoundRatio> rows;
  /// Fraction of rows with lower / upper >= 0.9.
  double fraction_tight = 0.0;
  double mean_tightness = 0.0;
};

inline constexpr double kTightRatio = 0.9;

/// Bounds of the true top-k entries of `oracle` against their weights.
BoundRatioReport bound_ratio_report(const SketchState& state,
                                    const ExactProduct& oracle, std::size_t k);

}  // namespace crop

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "crop/count_sketch.hpp"
#include "crop/hashing.hpp"
#include "crop/interval.hpp"
#include "crop/space_saving.hpp"
#include "crop/sparse.hpp"

namespace crop {

struct EngineConfig {
  std::uint32_t kappa = 1024;
  /// Logical workers K; worker c owns WorkerAssignment::part(c, K, kappa).
  std::uint32_t workers = 1;
  /// Records per bucket summary; 0 disables Space-Saving.
  std::uint32_t ss_capacity = 2;
  bool cs_enabled = true;
  /// Independent instances t (odd).
  std::uint32_t instances = 11;
  std::uint64_t seed = 0;
  /// Expected number of distinct output entries, if known.
  std::optional<std::uint64_t> d_hint;
  EntryFilter filter = EntryFilter::kAll;
  /// Execution units the logical workers are mapped onto; 0 = hardware.
  std::uint32_t threads = 1;
  /// Keep per-outer-product worker loads for load_balance_check.
  bool record_product_loads = false;

  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

/// Smallest power of two kappa with d_hint / kappa <= ss_capacity.
std::uint32_t suggest_kappa(std::uint64_t d_hint, std::uint32_t ss_capacity);

/// Hash seed of instance `i` under a master seed.
std::uint64_t instance_seed(std::uint64_t master, std::uint32_t i) noexcept;

/// Sketches of one instance over the buckets of `range`.
struct InstanceState {
  HashFamily hashes;
  WorkerAssignment range;
  std::uint32_t ss_capacity = 0;
  std::vector<SpaceSavingSummary> summaries;
  std::optional<CountSketchArray> sketch;

  InstanceState() = default;
  InstanceState(HashFamily h, WorkerAssignment range, std::uint32_t ss_capacity,
                bool cs_enabled);

  bool complete() const noexcept {
    return range.q == 0 && range.r == range.kappa;
  }
  const SpaceSavingSummary& summary(std::uint32_t bucket) const {
    return summaries.at(bucket - range.q);
  }

  void write(std::ostream& out) const;
  static InstanceState read(std::istream& in);

  friend bool operator==(const InstanceState&, const InstanceState&) = default;
};

/// Concatenates worker parts of one instance. Parts must share hashes and
/// tile a contiguous range.
InstanceState merge_parts(std::vector<InstanceState> parts);

/// The t instances; each either a worker part or the merged whole.
struct SketchState {
  std::vector<InstanceState> instances;

  bool complete() const noexcept;
  std::uint32_t kappa() const;

  /// `crop-state v1` text format; doubles round-trip exactly.
  void write(std::ostream& out) const;
  static SketchState read(std::istream& in);

  friend bool operator==(const SketchState&, const SketchState&) = default;
};

/// Instance-wise merge of per-worker states.
SketchState merge_states(std::vector<SketchState> parts);

/// Per-instance load accounting. X_c counts processed (eligible) entries.
struct LoadReport {
  std::uint32_t kappa = 1;
  std::vector<WorkerAssignment> intervals;
  std::vector<std::uint64_t> worker_entries;
  std::uint64_t total_entries = 0;
  std::uint64_t outer_products = 0;
  /// Sum over products of |a| + |b|.
  std::uint64_t input_nnz = 0;

  // Filled when EngineConfig::record_product_loads is set.
  std::vector<std::uint64_t> product_entries;
  std::vector<std::uint64_t> product_input_nnz;
  /// products x workers, row-major.
  std::vector<std::uint64_t> product_worker_entries;

  std::uint32_t workers() const noexcept {
    return static_cast<std::uint32_t>(intervals.size());
  }
  /// W = total / K.
  double expected_load() const noexcept;
  /// Expected load of worker c scaled by its interval size.
  double expected_load(std::uint32_t c) const noexcept;
  double max_over_avg() const noexcept;
  /// max_c |X_c - W_c| / W_c.
  double max_deviation() const noexcept;
};

struct RunResult {
  SketchState state;
  std::vector<LoadReport> loads;
};

/// Processes the stream with all K workers of every instance. Each worker
/// sees every outer product and touches only its own buckets.
RunResult run(OuterProductStream& stream, const EngineConfig& config);

/// Runs only worker `worker` of every instance: one shared-nothing process of
/// a multi-process job. Merge the parts with merge_states.
RunResult run_worker(OuterProductStream& stream, const EngineConfig& config,
                     std::uint32_t worker);

struct EntryEstimate {
  /// Intersection of the per-instance Space-Saving bounds.
  std::optional<WeightBounds> bounds;
  /// Median of per-instance Count-Sketch estimates.
  std::optional<double> cs_estimate;
  /// Instances whose bucket summary records the entry.
  std::uint32_t recorded_in = 0;
};

/// Requires a complete (merged) state.
EntryEstimate query(const SketchState& state, const Entry& e);

struct TopEntry {
  Entry entry;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> cs_estimate;
};

/// Entries recorded in at least ceil(t/2) instances, ranked by (upper desc,
/// lower desc, row asc, col asc), truncated to k.
std::vector<TopEntry> top_entries(const SketchState& state, std::size_t k);

enum class LoadCheckMode { kPerProduct, kAggregate };

struct LoadCheck {
  /// (product, worker) pairs, or workers in aggregate mode, deviating by
  /// more than lambda * W.
  std::uint64_t violations = 0;
  std::uint64_t trials = 0;
  /// Products skipped because W < (|a| + |b|) / lambda^2.
  std::uint64_t skipped = 0;
  double frequency = 0.0;
  /// Largest 1 / (|a| + |b|) over the checked products.
  double bound = 0.0;
};

/// Throws ConfigError for lambda <= 0, or for kPerProduct without recorded
/// product loads.
LoadCheck load_balance_check(const LoadReport& report, double lambda,
                             LoadCheckMode mode = LoadCheckMode::kPerProduct);

}  // namespace crop

#include "crop/engine.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <bit>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "crop/error.hpp"
#include "crop/kernels.hpp"

namespace crop {

void EngineConfig::validate() const {
  if (kappa == 0) throw ConfigError("kappa must be at least 1");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (workers > kappa) throw ConfigError("workers must not exceed kappa");
  if (instances == 0 || instances % 2 == 0) {
    throw ConfigError("instances must be odd");
  }
  if (ss_capacity == 0 && !cs_enabled) {
    throw ConfigError("enable Space-Saving or Count-Sketch");
  }
}

std::uint32_t suggest_kappa(std::uint64_t d_hint, std::uint32_t ss_capacity) {
  const std::uint64_t per = std::max<std::uint32_t>(ss_capacity, 1);
  const std::uint64_t need = std::max<std::uint64_t>((d_hint + per - 1) / per, 1);
  const std::uint64_t k = std::bit_ceil(need);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(k, std::uint64_t{1} << 31));
}

std::uint64_t instance_seed(std::uint64_t master, std::uint32_t i) noexcept {
  return derive_seed(master, "instance", i);
}

// ---------------------------------------------------------------------------
// InstanceState / SketchState

InstanceState::InstanceState(HashFamily h, WorkerAssignment r,
                             std::uint32_t capacity, bool cs_enabled)
    : hashes(std::move(h)), range(r), ss_capacity(capacity) {
  if (ss_capacity > 0) summaries.assign(range.size(), SpaceSavingSummary(ss_capacity));
  if (cs_enabled) sketch.emplace(range.kappa, range.q, range.size());
}

void InstanceState::write(std::ostream& out) const {
  out << hashes.serialize();
  out << "range " << range.q << ' ' << range.r << ' ' << range.kappa << '\n';
  out << "ss " << ss_capacity << ' ' << summaries.size() << '\n';
  for (const auto& s : summaries) s.write(out);
  out << "cs " << (sketch ? 1 : 0) << '\n';
  if (sketch) sketch->write(out);
}

namespace {

void expect_token(std::istream& in, const char* want) {
  std::string tok;
  if (!(in >> tok) || tok != want) {
    throw ParseError(std::string("state: expected `") + want + "`", 0);
  }
}

}  // namespace

InstanceState InstanceState::read(std::istream& in) {
  InstanceState st;
  st.hashes = HashFamily::read(in);
  std::uint32_t q = 0, r = 0, kappa = 0;
  expect_token(in, "range");
  if (!(in >> q >> r >> kappa)) throw ParseError("state: bad range", 0);
  st.range = WorkerAssignment(q, r, kappa);
  if (kappa != st.hashes.kappa()) throw ParseError("state: kappa mismatch", 0);
  std::size_t n = 0;
  expect_token(in, "ss");
  if (!(in >> st.ss_capacity >> n)) throw ParseError("state: bad ss header", 0);
  if (n != (st.ss_capacity ? st.range.size() : 0)) {
    throw ParseError("state: summary count does not match range", 0);
  }
  st.summaries.reserve(n);
  for (std::size_t k = 0; k < n; ++k) st.summaries.push_back(SpaceSavingSummary::read(in));
  int has_cs = 0;
  expect_token(in, "cs");
  if (!(in >> has_cs)) throw ParseError("state: bad cs flag", 0);
  if (has_cs) {
    st.sketch = CountSketchArray::read(in);
    if (st.sketch->offset() != q || st.sketch->cells().size() != st.range.size()) {
      throw ParseError("state: count-sketch range mismatch", 0);
    }
  }
  return st;
}

InstanceState merge_parts(std::vector<InstanceState> parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
    return a.range.q < b.range.q;
  });
  InstanceState out = std::move(parts.front());
  for (std::size_t k = 1; k < parts.size(); ++k) {
    InstanceState& p = parts[k];
    if (!(p.hashes == out.hashes) || p.ss_capacity != out.ss_capacity ||
        p.sketch.has_value() != out.sketch.has_value()) {
      throw ConfigError("worker states come from different configurations");
    }
    if (p.range.q != out.range.r) {
      throw ConfigError("worker intervals overlap or leave a gap");
    }
    for (auto& s : p.summaries) out.summaries.push_back(std::move(s));
    if (out.sketch) out.sketch->append(*p.sketch);
    out.range = WorkerAssignment(out.range.q, p.range.r, out.range.kappa);
  }
  return out;
}

bool SketchState::complete() const noexcept {
  return !instances.empty() &&
         std::all_of(instances.begin(), instances.end(),
                     [](const InstanceState& s) { return s.complete(); });
}

std::uint32_t SketchState::kappa() const {
  if (instances.empty()) throw ConfigError("empty sketch state");
  return instances.front().range.kappa;
}

void SketchState::write(std::ostream& out) const {
  out << "crop-state v1\ninstances " << instances.size() << '\n';
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out << "instance " << i << '\n';
    instances[i].write(out);
  }
}

SketchState SketchState::read(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "crop-state" || version != "v1") {
    throw ParseError("state: bad magic", 0);
  }
  std::size_t n = 0;
  expect_token(in, "instances");
  if (!(in >> n)) throw ParseError("state: bad instance count", 0);
  SketchState st;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = 0;
    expect_token(in, "instance");
    if (!(in >> idx) || idx != i) throw ParseError("state: instances out of order", 0);
    st.instances.push_back(InstanceState::read(in));
  }
  return st;
}

SketchState merge_states(std::vector<SketchState> parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  const std::size_t t = parts.front().instances.size();
  SketchState out;
  for (std::size_t i = 0; i < t; ++i) {
    std::vector<InstanceState> slice;
    for (auto& p : parts) {
      if (p.instances.size() != t) throw ConfigError("instance counts differ");
      slice.push_back(std::move(p.instances[i]));
    }
    out.instances.push_back(merge_parts(std::move(slice)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LoadReport

double LoadReport::expected_load() const noexcept {
  return intervals.empty() ? 0.0
                           : static_cast<double>(total_entries) / intervals.size();
}

double LoadReport::expected_load(std::uint32_t c) const noexcept {
  return static_cast<double>(total_entries) * intervals[c].size() / kappa;
}

double LoadReport::max_over_avg() const noexcept {
  if (worker_entries.empty() || total_entries == 0) return 1.0;
  const double avg = static_cast<double>(total_entries) / worker_entries.size();
  return static_cast<double>(*std::max_element(worker_entries.begin(),
                                               worker_entries.end())) / avg;
}

double LoadReport::max_deviation() const noexcept {
  double worst = 0.0;
  for (std::uint32_t c = 0; c < worker_entries.size(); ++c) {
    const double w = expected_load(c);
    if (w <= 0.0) continue;
    worst = std::max(worst, std::abs(static_cast<double>(worker_entries[c]) - w) / w);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::uint64_t eligible_entries(const OuterProduct& p, EntryFilter filter) {
  if (filter == EntryFilter::kAll) return outer_product_nnz(p.column, p.row);
  // Pairs (i, j) with i < j: for each i, the number of row indices above it.
  const auto a = p.column.indices();
  const auto b = p.row.indices();
  std::uint64_t total = 0;
  std::size_t j = 0;
  for (Index i : a) {
    while (j < b.size() && b[j] <= i) ++j;
    total += b.size() - j;
  }
  return total;
}

bool same_sign(std::span<const double> v, bool positive) {
  return std::all_of(v.begin(), v.end(),
                     [&](double x) { return positive ? x > 0.0 : x < 0.0; });
}

class Worker {
 public:
  Worker(std::uint32_t instance, std::uint32_t index, InstanceState state,
         const EngineConfig& config)
      : instance_(instance), index_(index), state_(std::move(state)),
        config_(config) {}

  void process(const OuterProduct& p) {
    const HashFamily& h = state_.hashes;
    const std::size_t budget = p.column.nnz() + p.row.nnz();
    bucket_sort_indices(p.column, h.row_hash(), ha_, scratch_, budget);
    bucket_sort_indices(p.row, h.col_hash(), hb_, scratch_, budget);
    rows_.clear();
    cols_.clear();
    values_.clear();
    buckets_.clear();
    auto sink = [this](Index row, Index col, double value, std::uint32_t bucket) {
      rows_.push_back(row);
      cols_.push_back(col);
      values_.push_back(value);
      buckets_.push_back(bucket);
    };
    if (config_.filter == EntryFilter::kUpperTriangle) {
      enumerate_sorted<EntryFilter::kUpperTriangle>(ha_, hb_, state_.range, sink);
    } else {
      enumerate_sorted<EntryFilter::kAll>(ha_, hb_, state_.range, sink);
    }
    const std::size_t n = rows_.size();
    if (state_.sketch) {
      signs_.resize(n);
      kernels::sign_entries(rows_, cols_, h.sign_hash(), signs_);
    }
    const std::uint32_t q = state_.range.q;
    for (std::size_t k = 0; k < n; ++k) {
      if (!state_.summaries.empty()) {
        state_.summaries[buckets_[k] - q].update(Entry{rows_[k], cols_[k]}, values_[k]);
      }
      if (state_.sketch) state_.sketch->update(buckets_[k], values_[k], signs_[k]);
    }
    processed_ += n;
    if (config_.record_product_loads) product_loads_.push_back(n);
  }

  std::uint32_t instance() const noexcept { return instance_; }
  std::uint32_t index() const noexcept { return index_; }
  std::uint64_t processed() const noexcept { return processed_; }
  const std::vector<std::uint64_t>& product_loads() const noexcept { return product_loads_; }
  InstanceState& state() noexcept { return state_; }

 private:
  std::uint32_t instance_;
  std::uint32_t index_;
  InstanceState state_;
  const EngineConfig& config_;
  SortScratch scratch_;
  HashedIndexArray ha_, hb_;
  std::vector<Index> rows_, cols_;
  std::vector<double> values_;
  std::vector<std::uint32_t> buckets_;
  std::vector<std::int8_t> signs_;
  std::uint64_t processed_ = 0;
  std::vector<std::uint64_t> product_loads_;
};

// Persistent threads stepping through batches in lockstep with the reader.
// Thread u handles workers u, u + T, u + 2T, ...
class BatchPool {
 public:
  BatchPool(std::vector<Worker>& workers, std::uint32_t threads)
      : workers_(workers), sync_(static_cast<std::ptrdiff_t>(threads) + 1),
        errors_(threads) {
    for (std::uint32_t u = 0; u < threads; ++u) {
      threads_.emplace_back([this, u, threads] { loop(u, threads); });
    }
  }

  ~BatchPool() {
    done_.store(true);
    sync_.arrive_and_wait();
    for (auto& t : threads_) t.join();
  }

  void run(const std::vector<OuterProduct>& batch) {
    batch_ = &batch;
    sync_.arrive_and_wait();
    sync_.arrive_and_wait();
    for (auto& e : errors_) {
      if (e) std::rethrow_exception(std::exchange(e, nullptr));
    }
  }

 private:
  void loop(std::uint32_t u, std::uint32_t threads) {
    for (;;) {
      sync_.arrive_and_wait();
      if (done_.load()) return;
      try {
        for (std::size_t w = u; w < workers_.size(); w += threads) {
          for (const auto& p : *batch_) workers_[w].process(p);
        }
      } catch (...) {
        errors_[u] = std::current_exception();
      }
      sync_.arrive_and_wait();
    }
  }

  std::vector<Worker>& workers_;
  std::barrier<> sync_;
  std::atomic<bool> done_{false};
  const std::vector<OuterProduct>* batch_ = nullptr;
  std::vector<std::exception_ptr> errors_;
  std::vector<std::thread> threads_;
};

constexpr std::size_t kBatchSize = 256;

RunResult execute(OuterProductStream& stream, const EngineConfig& config,
                  std::optional<std::uint32_t> only_worker) {
  config.validate();
  if (only_worker && *only_worker >= config.workers) {
    throw ConfigError("worker index out of range");
  }
  const std::uint32_t K = config.workers;
  const std::uint32_t t = config.instances;

  std::vector<HashFamily> families;
  for (std::uint32_t i = 0; i < t; ++i) {
    families.push_back(make_hashes({config.kappa, instance_seed(config.seed, i)}));
  }
  std::vector<Worker> workers;
  for (std::uint32_t i = 0; i < t; ++i) {
    for (std::uint32_t c = 0; c < K; ++c) {
      if (only_worker && c != *only_worker) continue;
      workers.emplace_back(i, c,
                           InstanceState(families[i],
                                         WorkerAssignment::part(c, K, config.kappa),
                                         config.ss_capacity, config.cs_enabled),
                           config);
    }
  }

  std::uint32_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::uint32_t>(threads, static_cast<std::uint32_t>(workers.size()));

  std::vector<std::uint64_t> product_entries, product_input;
  std::uint64_t total = 0, input_nnz = 0, products = 0;

  std::optional<BatchPool> pool;
  if (threads > 1) pool.emplace(workers, threads);

  std::vector<OuterProduct> batch;
  batch.reserve(kBatchSize);
  auto flush = [&] {
    if (batch.empty()) return;
    if (pool) {
      pool->run(batch);
    } else {
      for (auto& w : workers) {
        for (const auto& p : batch) w.process(p);
      }
    }
    batch.clear();
  };

  while (auto p = stream.next()) {
    if (p->column.dim() != stream.rows() || p->row.dim() != stream.cols()) {
      throw DimensionError("outer product " + std::to_string(products) +
                           " has dimensions " + std::to_string(p->column.dim()) +
                           "x" + std::to_string(p->row.dim()) + ", stream is " +
                           std::to_string(stream.rows()) + "x" +
                           std::to_string(stream.cols()));
    }
    if (config.ss_capacity > 0 && !p->column.empty() && !p->row.empty()) {
      const bool pos = same_sign(p->column.values(), true) && same_sign(p->row.values(), true);
      const bool neg = same_sign(p->column.values(), false) && same_sign(p->row.values(), false);
      if (!pos && !neg) {
        throw ValueError("outer product " + std::to_string(products) +
                         " has non-positive entries; Space-Saving needs "
                         "positive updates (use ss_capacity = 0)");
      }
    }
    const std::uint64_t eligible = eligible_entries(*p, config.filter);
    const std::uint64_t side = p->column.nnz() + p->row.nnz();
    total += eligible;
    input_nnz += side;
    ++products;
    if (config.record_product_loads) {
      product_entries.push_back(eligible);
      product_input.push_back(side);
    }
    batch.push_back(std::move(*p));
    if (batch.size() == kBatchSize) flush();
  }
  flush();
  pool.reset();

  RunResult result;
  result.loads.resize(t);
  for (std::uint32_t i = 0; i < t; ++i) {
    LoadReport& rep = result.loads[i];
    rep.kappa = config.kappa;
    rep.total_entries = total;
    rep.input_nnz = input_nnz;
    rep.outer_products = products;
    if (config.record_product_loads) {
      rep.product_entries = product_entries;
      rep.product_input_nnz = product_input;
    }
  }
  const std::uint32_t per_instance = only_worker ? 1 : K;
  for (auto& load : result.loads) {
    if (config.record_product_loads) {
      load.product_worker_entries.assign(products * per_instance, 0);
    }
  }
  std::vector<std::vector<InstanceState>> parts(t);
  for (auto& w : workers) {
    LoadReport& rep = result.loads[w.instance()];
    const std::uint32_t slot = static_cast<std::uint32_t>(rep.intervals.size());
    rep.intervals.push_back(w.state().range);
    rep.worker_entries.push_back(w.processed());
    if (config.record_product_loads) {
      const auto& pl = w.product_loads();
      for (std::size_t k = 0; k < pl.size(); ++k) {
        rep.product_worker_entries[k * per_instance + slot] = pl[k];
      }
    }
    parts[w.instance()].push_back(std::move(w.state()));
  }
  for (auto& p : parts) result.state.instances.push_back(merge_parts(std::move(p)));
  return result;
}

}  // namespace

RunResult run(OuterProductStream& stream, const EngineConfig& config) {
  return execute(stream, config, std::nullopt);
}

RunResult run_worker(OuterProductStream& stream, const EngineConfig& config,
                     std::uint32_t worker) {
  return execute(stream, config, worker);
}

// ---------------------------------------------------------------------------
// Queries

EntryEstimate query(const SketchState& state, const Entry& e) {
  if (!state.complete()) throw ConfigError("query needs a merged sketch state");
  EntryEstimate est;
  std::vector<double> cs;
  for (const InstanceState& inst : state.instances) {
    const std::uint32_t bucket = inst.hashes.bucket(e);
    if (inst.ss_capacity > 0) {
      const SpaceSavingSummary& s = inst.summary(bucket);
      WeightBounds b = s.query(e);
      if (s.contains(e)) ++est.recorded_in;
      if (!est.bounds) {
        est.bounds = b;
      } else {
        est.bounds->lower = std::max(est.bounds->lower, b.lower);
        est.bounds->upper = std::min(est.bounds->upper, b.upper);
      }
    }
    if (inst.sketch) cs.push_back(inst.sketch->query(inst.hashes, e));
  }
  // count - over is rounded, so bounds from different instances can cross
  // by an ulp on fractional weights.
  if (est.bounds && est.bounds->lower > est.bounds->upper) {
    est.bounds->lower = est.bounds->upper;
  }
  if (!cs.empty()) est.cs_estimate = median(std::move(cs));
  return est;
}

std::vector<TopEntry> top_entries(const SketchState& state, std::size_t k) {
  if (!state.complete()) throw ConfigError("top_entries needs a merged sketch state");
  if (state.instances.front().ss_capacity == 0) {
    throw ConfigError("top_entries needs Space-Saving summaries");
  }
  const auto t = static_cast<std::uint32_t>(state.instances.size());
  std::unordered_map<Entry, std::uint32_t, EntryHash> seen;
  for (const InstanceState& inst : state.instances) {
    for (const auto& s : inst.summaries) {
      for (const auto& r : s.records()) ++seen[r.item];
    }
  }
  std::vector<TopEntry> out;
  for (const auto& [entry, count] : seen) {
    if (count < majority_threshold(t)) continue;
    EntryEstimate est = query(state, entry);
    out.push_back({entry, est.bounds->lower, est.bounds->upper, est.cs_estimate});
  }
  std::sort(out.begin(), out.end(), [](const TopEntry& a, const TopEntry& b) {
    if (a.upper != b.upper) return a.upper > b.upper;
    if (a.lower != b.lower) return a.lower > b.lower;
    return a.entry < b.entry;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

// ---------------------------------------------------------------------------
// Load balance

LoadCheck load_balance_check(const LoadReport& report, double lambda,
                             LoadCheckMode mode) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  LoadCheck check;
  const std::uint32_t K = report.workers();
  if (K == 0) return check;
  const double lambda2 = lambda * lambda;
  auto expected = [&](std::uint64_t entries, std::uint32_t c) {
    return static_cast<double>(entries) * report.intervals[c].size() / report.kappa;
  };

  if (mode == LoadCheckMode::kAggregate) {
    const double w = static_cast<double>(report.total_entries) / K;
    if (w < static_cast<double>(report.input_nnz) / lambda2) {
      check.skipped = 1;
      return check;
    }
    for (std::uint32_t c = 0; c < K; ++c) {
      const double wc = expected(report.total_entries, c);
      ++check.trials;
      if (std::abs(static_cast<double>(report.worker_entries[c]) - wc) > lambda * wc) {
        ++check.violations;
      }
    }
    check.bound = report.input_nnz ? 1.0 / static_cast<double>(report.input_nnz) : 0.0;
  } else {
    if (report.product_entries.size() != report.outer_products ||
        report.product_worker_entries.size() != report.outer_products * K) {
      throw ConfigError("per-product loads were not recorded");
    }
    for (std::size_t p = 0; p < report.outer_products; ++p) {
      const std::uint64_t entries = report.product_entries[p];
      const std::uint64_t side = report.product_input_nnz[p];
      const double w = static_cast<double>(entries) / K;
      if (entries == 0 || w < static_cast<double>(side) / lambda2) {
        ++check.skipped;
        continue;
      }
      check.bound = std::max(check.bound, 1.0 / static_cast<double>(side));
      for (std::uint32_t c = 0; c < K; ++c) {
        const double wc = expected(entries, c);
        const double x = static_cast<double>(report.product_worker_entries[p * K + c]);
        ++check.trials;
        if (std::abs(x - wc) > lambda * wc) ++check.violations;
      }
    }
  }
  if (check.trials) {
    check.frequency = static_cast<double>(check.violations) / check.trials;
  }
  return check;
}

}  // namespace crop

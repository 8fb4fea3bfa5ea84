#include "crop/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crop/engine.hpp"
#include "crop/error.hpp"
#include "crop/kernels.hpp"
#include "crop/oracle.hpp"
#include "crop/pair_miner.hpp"
#include "crop/sparse.hpp"
#include "crop/transactions.hpp"
#include "json.hpp"

namespace crop::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << x;
  return s.str();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return "fnv1a64:" + hex64(h);
}

/// Files produced by a command, written only once everything succeeded.
class Outputs {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  void commit(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<fs::path> temps;
    try {
      for (const auto& [name, content] : files_) {
        fs::path tmp = dir / ("." + name + ".tmp");
        std::ofstream out(tmp, std::ios::binary);
        temps.push_back(tmp);
        out << content;
        out.close();
        if (!out) throw IoError("cannot write " + tmp.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) {
        fs::rename(temps[i], dir / files_[i].first);
      }
    } catch (...) {
      for (const auto& t : temps) fs::remove(t, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct EngineFlags {
  std::optional<std::uint32_t> kappa;
  std::uint32_t workers = 1;
  std::uint32_t ss_capacity = 2;
  std::uint32_t instances = 11;
  std::uint64_t seed = 0;
  std::size_t top = 100;
  std::uint32_t threads = 0;
  bool no_cs = false;
  std::optional<std::uint64_t> d_hint;
};

void add_engine_flags(CLI::App* app, EngineFlags& f) {
  app->add_option("--kappa", f.kappa, "Number of hash buckets");
  app->add_option("--workers", f.workers, "Logical workers K")
      ->envname("CROP_WORKERS")
      ->check(CLI::PositiveNumber);
  app->add_option("--ss-capacity", f.ss_capacity,
                  "Space-Saving records per bucket (0 disables)");
  app->add_option("--instances", f.instances, "Independent instances t (odd)");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--top", f.top, "Rows in the top-k report");
  app->add_option("--threads", f.threads, "Execution threads (0 = all cores)");
  app->add_flag("--no-cs", f.no_cs, "Disable Count-Sketch");
  app->add_option("--d-hint", f.d_hint,
                  "Expected distinct entries; picks kappa when --kappa is absent");
}

EngineConfig to_config(const EngineFlags& f) {
  EngineConfig c;
  if (f.kappa) {
    c.kappa = *f.kappa;
  } else if (f.d_hint) {
    c.kappa = suggest_kappa(*f.d_hint, std::max<std::uint32_t>(f.ss_capacity, 1));
  }
  c.workers = f.workers;
  c.ss_capacity = f.ss_capacity;
  c.cs_enabled = !f.no_cs;
  c.instances = f.instances;
  c.seed = f.seed;
  c.d_hint = f.d_hint;
  c.threads = f.threads;
  c.validate();
  return c;
}

json config_json(const EngineConfig& c) {
  json j;
  j["kappa"] = c.kappa;
  j["workers"] = c.workers;
  j["ss_capacity"] = c.ss_capacity;
  j["cs_enabled"] = c.cs_enabled;
  j["instances"] = c.instances;
  j["seed"] = c.seed;
  j["d_hint"] = c.d_hint ? json(*c.d_hint) : json(nullptr);
  j["filter"] = c.filter == EntryFilter::kAll ? "all" : "upper_triangle";
  json seeds = json::array();
  for (std::uint32_t i = 0; i < c.instances; ++i) seeds.push_back(instance_seed(c.seed, i));
  j["instance_seeds"] = seeds;
  return j;
}

json loads_json(const std::vector<LoadReport>& loads) {
  json arr = json::array();
  for (const auto& L : loads) {
    json j;
    j["total_entries"] = L.total_entries;
    j["outer_products"] = L.outer_products;
    j["input_nnz"] = L.input_nnz;
    j["worker_entries"] = L.worker_entries;
    j["max_over_avg"] = L.max_over_avg();
    arr.push_back(j);
  }
  return arr;
}

std::string load_csv(const std::vector<LoadReport>& loads) {
  std::ostringstream s;
  s << "instance,worker,q,r,entries,expected\n";
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const auto& L = loads[i];
    for (std::uint32_t c = 0; c < L.workers(); ++c) {
      s << i << ',' << c << ',' << L.intervals[c].q << ',' << L.intervals[c].r << ','
        << L.worker_entries[c] << ',' << format_double(L.expected_load(c)) << '\n';
    }
  }
  return s.str();
}

std::string top_csv(const std::vector<TopEntry>& top, bool pairs,
                    const ExactProduct* truth) {
  std::ostringstream s;
  s << (pairs ? "rank,item_i,item_j" : "rank,row,col")
    << ",lower,upper,cs_estimate" << (truth ? ",true" : "") << '\n';
  for (std::size_t k = 0; k < top.size(); ++k) {
    const auto& t = top[k];
    s << k + 1 << ',' << t.entry.row << ',' << t.entry.col << ','
      << format_double(t.lower) << ',' << format_double(t.upper) << ','
      << (t.cs_estimate ? format_double(*t.cs_estimate) : "");
    if (truth) s << ',' << format_double(truth->weight(t.entry));
    s << '\n';
  }
  return s.str();
}

std::string state_text(const SketchState& state) {
  std::ostringstream s;
  state.write(s);
  return s.str();
}

std::vector<TopEntry> safe_top(const SketchState& state, std::size_t k) {
  if (state.instances.empty() || state.instances.front().ss_capacity == 0) return {};
  return top_entries(state, k);
}

/// Arguments minus `--out`, kept in the manifest for `crop rerun`.
std::vector<std::string> replay_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

json manifest_head(const std::vector<std::string>& args) {
  json m;
  m["tool"] = "crop";
  m["format"] = 1;
  m["command"] = args.empty() ? "" : args.front();
  m["args"] = replay_args(args);
  m["simd"] = std::string(kernels::isa_name(kernels::active_isa()));
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct MultiplyFlags {
  std::string a, b, out;
  std::optional<std::uint32_t> worker;
  EngineFlags engine;
};

int cmd_multiply(const MultiplyFlags& f, const std::vector<std::string>& args,
                 std::ostream& out) {
  EngineConfig cfg = to_config(f.engine);
  json m = manifest_head(args);
  m["config"] = config_json(cfg);
  m["inputs"] = {{"a", {{"path", f.a}, {"digest", file_digest(f.a)}}},
                 {"b", {{"path", f.b}, {"digest", file_digest(f.b)}}}};

  auto t0 = Clock::now();
  TripleFileStream stream(f.a, f.b);
  RunResult res = f.worker ? run_worker(stream, cfg, *f.worker) : run(stream, cfg);
  const double run_ms = ms_since(t0);

  auto t1 = Clock::now();
  Outputs files;
  std::vector<TopEntry> top;
  if (!f.worker) top = safe_top(res.state, f.engine.top);
  const double report_ms = ms_since(t1);

  m["worker"] = f.worker ? json(*f.worker) : json(nullptr);
  m["dimensions"] = {{"rows", stream.rows()}, {"cols", stream.cols()}};
  m["warnings"] = {{"dropped_zero_values", stream.warnings()}};
  m["loads"] = loads_json(res.loads);
  m["timings_ms"] = {{"run", run_ms}, {"report", report_ms}};
  files.add("manifest.json", dump(m));
  if (!f.worker) files.add("top.csv", top_csv(top, false, nullptr));
  files.add("state.txt", state_text(res.state));
  files.add("load.csv", load_csv(res.loads));
  files.commit(f.out);
  out << "entries " << res.loads.front().total_entries << ", wrote " << f.out << '\n';
  return kOk;
}

struct MineFlags {
  std::string fimi, out;
  std::uint64_t universe = kDefaultUniverse;
  bool exact_oracle = false;
  std::uint64_t oracle_cap = kDefaultOracleCap;
  EngineFlags engine;
};

int cmd_mine(const MineFlags& f, const std::vector<std::string>& args,
             std::ostream& out) {
  EngineConfig cfg = to_config(f.engine);
  cfg.filter = EntryFilter::kUpperTriangle;
  json m = manifest_head(args);
  m["config"] = config_json(cfg);
  m["inputs"] = {{"fimi", {{"path", f.fimi}, {"digest", file_digest(f.fimi)}}}};
  m["universe"] = f.universe;

  auto t0 = Clock::now();
  TransactionStream stream(std::make_unique<FimiReader>(f.fimi, f.universe));
  RunResult res = run(stream, cfg);
  const double run_ms = ms_since(t0);

  auto t1 = Clock::now();
  std::optional<ExactProduct> truth;
  if (f.exact_oracle) {
    auto tx = read_fimi(f.fimi, f.universe);
    truth = exact_pair_supports(tx, f.oracle_cap);
  }
  const double oracle_ms = ms_since(t1);

  auto t2 = Clock::now();
  auto top = safe_top(res.state, f.engine.top);
  Outputs files;
  m["pair_occurrences"] = res.loads.front().total_entries;
  m["transactions"] = res.loads.front().outer_products;
  m["warnings"] = {{"duplicate_items", stream.warnings()}};
  if (truth) {
    const std::size_t k = f.engine.top;
    auto oracle_top = exact_top(*truth, k);
    auto report = bound_ratio_report(res.state, *truth, k);
    m["oracle"] = {{"distinct_pairs", truth->size()},
                   {"recall_at_k", recall_at_k(res.state, oracle_top, k)},
                   {"k", k},
                   {"fraction_tight", report.fraction_tight},
                   {"mean_tightness", report.mean_tightness}};
    std::ostringstream b;
    b << "rank,item_i,item_j,true,lower,upper,lower_ratio,upper_ratio,tightness\n";
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
      const auto& row = report.rows[r];
      b << r + 1 << ',' << row.entry.row << ',' << row.entry.col << ','
        << format_double(row.truth) << ',' << format_double(row.lower) << ','
        << format_double(row.upper) << ',' << format_double(row.lower_ratio()) << ','
        << format_double(row.upper_ratio()) << ',' << format_double(row.tightness())
        << '\n';
    }
    files.add("bounds.csv", b.str());
  }
  m["loads"] = loads_json(res.loads);
  m["timings_ms"] = {{"run", run_ms}, {"oracle", oracle_ms}, {"report", ms_since(t2)}};
  files.add("manifest.json", dump(m));
  files.add("top.csv", top_csv(top, true, truth ? &*truth : nullptr));
  files.add("state.txt", state_text(res.state));
  files.add("load.csv", load_csv(res.loads));
  files.commit(f.out);
  out << "pair occurrences " << res.loads.front().total_entries;
  if (truth) out << ", recall@" << f.engine.top << " " << m["oracle"]["recall_at_k"].get<double>();
  out << ", wrote " << f.out << '\n';
  return kOk;
}

struct BenchFlags {
  std::string a, b, fimi, out;
  std::uint64_t universe = kDefaultUniverse;
  std::vector<std::uint32_t> worker_counts = {1, 2, 4, 8};
  EngineFlags engine;
};

int cmd_bench(const BenchFlags& f, const std::vector<std::string>& args,
              std::ostream& out) {
  const bool pairs = !f.fimi.empty();
  if (pairs == !f.a.empty()) throw ConfigError("bench needs either --fimi or --a/--b");
  if (!pairs && f.b.empty()) throw ConfigError("bench needs --b with --a");
  auto open = [&]() -> std::unique_ptr<OuterProductStream> {
    if (pairs) {
      return std::make_unique<TransactionStream>(
          std::make_unique<FimiReader>(f.fimi, f.universe));
    }
    return std::make_unique<TripleFileStream>(f.a, f.b);
  };

  json m = manifest_head(args);
  m["inputs"] = pairs ? json{{"fimi", {{"path", f.fimi}, {"digest", file_digest(f.fimi)}}}}
                      : json{{"a", {{"path", f.a}, {"digest", file_digest(f.a)}}},
                             {"b", {{"path", f.b}, {"digest", file_digest(f.b)}}}};
  json runs = json::array();
  std::ostringstream summary, loads;
  summary << "workers,avg,max,max_over_avg,wall_ms\n";
  loads << "workers,worker,entries\n";
  out << "workers        avg        max  max/avg    wall ms\n";
  for (std::uint32_t K : f.worker_counts) {
    EngineFlags ef = f.engine;
    ef.workers = K;
    if (ef.threads == 0) ef.threads = K;
    EngineConfig cfg = to_config(ef);
    if (pairs) cfg.filter = EntryFilter::kUpperTriangle;
    auto stream = open();
    auto t0 = Clock::now();
    RunResult res = run(*stream, cfg);
    const double wall = ms_since(t0);
    const auto& L = res.loads.front();
    const double avg = L.expected_load();
    const auto mx = *std::max_element(L.worker_entries.begin(), L.worker_entries.end());
    summary << K << ',' << format_double(avg) << ',' << mx << ','
            << format_double(L.max_over_avg()) << ',' << format_double(wall) << '\n';
    for (std::uint32_t c = 0; c < K; ++c) {
      loads << K << ',' << c << ',' << L.worker_entries[c] << '\n';
    }
    char line[128];
    std::snprintf(line, sizeof line, "%7u %10.1f %10llu %8.4f %10.1f\n", K, avg,
                  static_cast<unsigned long long>(mx), L.max_over_avg(), wall);
    out << line;
    runs.push_back({{"config", config_json(cfg)},
                    {"loads", loads_json(res.loads)},
                    {"wall_ms", wall}});
  }
  m["runs"] = runs;
  if (!f.out.empty()) {
    Outputs files;
    files.add("manifest.json", dump(m));
    files.add("bench.csv", summary.str());
    files.add("load.csv", loads.str());
    files.commit(f.out);
  }
  return kOk;
}

struct ZipfFlags {
  std::size_t rows = 1000, cols = 1000, outer = 0;
  std::uint64_t distinct = 1000, seed = 0;
  double scale = 1.0, exponent = 1.0;
  std::string out;
};

int cmd_generate_zipf(const ZipfFlags& f, const std::vector<std::string>& args,
                      std::ostream& out) {
  const std::uint64_t sub = derive_seed(f.seed, "generate-zipf");
  auto z = gen_zipf_stream({f.scale, f.exponent, f.distinct}, f.rows, f.cols, f.outer, sub);
  std::ostringstream a, b, truth;
  write_triples(a, b, f.rows, f.cols, z.products);
  truth << "rank,row,col,weight\n";
  for (std::size_t r = 0; r < z.truth.size(); ++r) {
    truth << r + 1 << ',' << z.truth[r].entry.row << ',' << z.truth[r].entry.col << ','
          << format_double(z.truth[r].weight) << '\n';
  }
  json m = manifest_head(args);
  m["seed"] = f.seed;
  m["sub_seeds"] = {{"generate-zipf", sub}};
  m["model"] = {{"scale", f.scale}, {"exponent", f.exponent}, {"distinct", f.distinct}};
  m["rows"] = f.rows;
  m["cols"] = f.cols;
  m["outer_products"] = z.products.size();
  Outputs files;
  files.add("manifest.json", dump(m));
  files.add("a.txt", a.str());
  files.add("b.txt", b.str());
  files.add("truth.csv", truth.str());
  files.commit(f.out);
  out << z.products.size() << " outer products, wrote " << f.out << '\n';
  return kOk;
}

struct TxFlags {
  TransactionModel model;
  std::uint64_t seed = 0;
  std::uint64_t oracle_cap = kDefaultOracleCap;
  std::string out;
};

int cmd_generate_transactions(const TxFlags& f, const std::vector<std::string>& args,
                              std::ostream& out) {
  const std::uint64_t sub = derive_seed(f.seed, "generate-transactions");
  auto tx = gen_zipf_transactions(f.model, sub);
  std::ostringstream fimi, truth;
  write_fimi(fimi, tx);
  auto supports = exact_pair_supports(tx, f.oracle_cap);
  auto ranked = exact_top(supports, supports.size());
  truth << "rank,item_i,item_j,support\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    truth << r + 1 << ',' << ranked[r].entry.row << ',' << ranked[r].entry.col << ','
          << format_double(ranked[r].weight) << '\n';
  }
  json m = manifest_head(args);
  m["seed"] = f.seed;
  m["sub_seeds"] = {{"generate-transactions", sub}};
  m["model"] = {{"items", f.model.item_count},
                {"transactions", f.model.tx_count},
                {"exponent", f.model.exponent},
                {"min_length", f.model.min_length},
                {"max_length", f.model.max_length}};
  m["distinct_pairs"] = supports.size();
  if (ranked.size() >= 20) {
    std::vector<double> w;
    for (const auto& e : ranked) w.push_back(e.weight);
    auto fit = fit_power_law(w, 1, w.size());
    m["support_power_law"] = {{"exponent", fit.exponent}, {"r_squared", fit.r_squared}};
  }
  Outputs files;
  files.add("manifest.json", dump(m));
  files.add("transactions.dat", fimi.str());
  files.add("truth.csv", truth.str());
  files.commit(f.out);
  out << tx.size() << " transactions, " << supports.size() << " distinct pairs, wrote "
      << f.out << '\n';
  return kOk;
}

SketchState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return SketchState::read(in);
}

Entry parse_entry(const std::string& s) {
  auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(s);
    std::size_t u1 = 0, u2 = 0;
    const auto row = std::stoul(s.substr(0, comma), &u1);
    const auto col = std::stoul(s.substr(comma + 1), &u2);
    if (u1 != comma || u2 != s.size() - comma - 1) throw std::invalid_argument(s);
    return {static_cast<Index>(row), static_cast<Index>(col)};
  } catch (const std::logic_error&) {
    throw ConfigError("expected an entry as `row,col`, got `" + s + "`");
  }
}

struct ReportFlags {
  std::string state;
  std::size_t top = 100;
  std::vector<std::string> queries;
  bool pairs = false;
};

int cmd_report(const ReportFlags& f, std::ostream& out) {
  auto state = load_state(f.state);
  if (f.queries.empty()) {
    out << top_csv(top_entries(state, f.top), f.pairs, nullptr);
    return kOk;
  }
  out << "row,col,lower,upper,cs_estimate,recorded_in\n";
  for (const auto& q : f.queries) {
    const Entry e = parse_entry(q);
    auto est = query(state, e);
    out << e.row << ',' << e.col << ','
        << (est.bounds ? format_double(est.bounds->lower) : "") << ','
        << (est.bounds ? format_double(est.bounds->upper) : "") << ','
        << (est.cs_estimate ? format_double(*est.cs_estimate) : "") << ','
        << est.recorded_in << '\n';
  }
  return kOk;
}

struct MergeFlags {
  std::vector<std::string> parts;
  std::string out;
  std::size_t top = 100;
  bool pairs = false;
};

int cmd_merge(const MergeFlags& f, const std::vector<std::string>& args,
              std::ostream& out) {
  std::vector<SketchState> parts;
  json inputs = json::array();
  for (const auto& p : f.parts) {
    parts.push_back(load_state(p));
    inputs.push_back({{"path", p}, {"digest", file_digest(p)}});
  }
  auto merged = merge_states(std::move(parts));
  if (!merged.complete()) throw ConfigError("worker parts do not cover every bucket");
  json m = manifest_head(args);
  m["inputs"] = inputs;
  Outputs files;
  files.add("manifest.json", dump(m));
  files.add("top.csv", top_csv(safe_top(merged, f.top), f.pairs, nullptr));
  files.add("state.txt", state_text(merged));
  files.commit(f.out);
  out << "merged " << f.parts.size() << " parts, wrote " << f.out << '\n';
  return kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what(), 0);
  }
  if (!m.contains("args") || !m["args"].is_array()) {
    throw ParseError(manifest_path + ": no recorded arguments", 0);
  }
  auto args = m["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "rerun") {
    throw ParseError(manifest_path + ": cannot replay this manifest", 0);
  }
  args.push_back("--out");
  args.push_back(out_dir);
  return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Column-row parallel sparse matrix products with sketches", "crop"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  MultiplyFlags mf;
  auto* multiply = app.add_subcommand("multiply", "Heavy entries of A*B from triple files");
  multiply->add_option("--a", mf.a, "Column-major triple file of A")->required();
  multiply->add_option("--b", mf.b, "Row-major triple file of B")->required();
  multiply->add_option("--out", mf.out, "Output directory")->required();
  multiply->add_option("--worker", mf.worker,
                       "Run only this worker; merge the parts with `crop merge`");
  add_engine_flags(multiply, mf.engine);

  MineFlags nf;
  auto* mine_cmd = app.add_subcommand("mine", "Frequent item pairs of a FIMI file");
  mine_cmd->add_option("--fimi", nf.fimi, "Transactions, one per line")->required();
  mine_cmd->add_option("--out", nf.out, "Output directory")->required();
  mine_cmd->add_option("--universe", nf.universe, "Item ids must be below this");
  mine_cmd->add_flag("--exact-oracle", nf.exact_oracle,
                     "Also count supports exactly and report recall and bound ratios");
  mine_cmd->add_option("--oracle-cap", nf.oracle_cap, "Largest oracle workload");
  add_engine_flags(mine_cmd, nf.engine);

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Per-worker loads and wall time over K");
  bench->add_option("--a", bf.a, "Column-major triple file of A");
  bench->add_option("--b", bf.b, "Row-major triple file of B");
  bench->add_option("--fimi", bf.fimi, "Transactions instead of triple files");
  bench->add_option("--universe", bf.universe, "Item ids must be below this");
  bench->add_option("--worker-counts", bf.worker_counts, "Values of K")->delimiter(',');
  bench->add_option("--out", bf.out, "Optional output directory");
  add_engine_flags(bench, bf.engine);

  auto* generate = app.add_subcommand("generate", "Synthetic workloads with ground truth");
  generate->require_subcommand(1);
  ZipfFlags zf;
  auto* zipf = generate->add_subcommand("zipf", "Zipf-weighted matrix product");
  zipf->add_option("--rows", zf.rows, "Rows of A*B");
  zipf->add_option("--cols", zf.cols, "Columns of A*B");
  zipf->add_option("--distinct", zf.distinct, "Distinct nonzero entries d");
  zipf->add_option("--scale", zf.scale, "Weight of the top entry C");
  zipf->add_option("--exponent", zf.exponent, "Skew z");
  zipf->add_option("--outer-count", zf.outer, "Outer products (0: one per entry)");
  zipf->add_option("--seed", zf.seed, "Master seed");
  zipf->add_option("--out", zf.out, "Output directory")->required();
  TxFlags tf;
  auto* txs = generate->add_subcommand("transactions", "Zipf-skewed transactions");
  txs->add_option("--items", tf.model.item_count, "Item universe size");
  txs->add_option("--transactions", tf.model.tx_count, "Number of transactions");
  txs->add_option("--exponent", tf.model.exponent, "Item popularity skew");
  txs->add_option("--min-length", tf.model.min_length, "Shortest transaction");
  txs->add_option("--max-length", tf.model.max_length, "Longest transaction");
  txs->add_option("--seed", tf.seed, "Master seed");
  txs->add_option("--oracle-cap", tf.oracle_cap, "Largest oracle workload");
  txs->add_option("--out", tf.out, "Output directory")->required();

  ReportFlags rf;
  auto* report = app.add_subcommand("report", "Top entries or point queries of a state");
  report->add_option("--state", rf.state, "state.txt from multiply, mine, or merge")
      ->required();
  report->add_option("--top", rf.top, "Rows to print");
  report->add_option("--query", rf.queries, "Entry `row,col` to query (repeatable)");
  report->add_flag("--pairs", rf.pairs, "Label columns as item pairs");

  MergeFlags gf;
  auto* merge = app.add_subcommand("merge", "Combine per-worker states");
  merge->add_option("parts", gf.parts, "Worker state files")->required();
  merge->add_option("--out", gf.out, "Output directory")->required();
  merge->add_option("--top", gf.top, "Rows in the top-k report");
  merge->add_flag("--pairs", gf.pairs, "Label columns as item pairs");

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json to replay")->required();
  rerun->add_option("--out", rerun_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  if (*multiply) return cmd_multiply(mf, args, out);
  if (*mine_cmd) return cmd_mine(nf, args, out);
  if (*bench) return cmd_bench(bf, args, out);
  if (*zipf) return cmd_generate_zipf(zf, args, out);
  if (*txs) return cmd_generate_transactions(tf, args, out);
  if (*report) return cmd_report(rf, out);
  if (*merge) return cmd_merge(gf, args, out);
  if (*rerun) return cmd_rerun(manifest_path, rerun_out, out, err);
  return kConfigError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ResourceError& e) {
    err << "crop: " << e.what() << '\n';
    return kResourceError;
  } catch (const ConfigError& e) {
    err << "crop: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "crop: " << e.what() << '\n';
    return kInputError;
  } catch (const std::bad_alloc&) {
    err << "crop: out of memory\n";
    return kResourceError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "crop: " << e.what() << '\n';
    return kInputError;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace crop::cli

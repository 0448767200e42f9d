#pragma once

#include "bwkm/baselines.hpp"
#include "bwkm/bwkm.hpp"
#include "bwkm/metrics.hpp"
#include "bwkm/record.hpp"
#include "bwkm/rng.hpp"
#include "bwkm/types.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace bwkm {

struct NamedDataset {
  std::string id;
  Dataset data;
};

// A comparison method with its knobs; `name` selects the algorithm.
struct MethodSpec {
  std::string name;        // lloyd-forgy | lloyd-kmpp | lloyd-kmc2 | minibatch | grid-rpkm | kmpp-init
  Index b = 100;           // minibatch batch size
  int iterations = 100;    // minibatch iteration cap
  Index chain = 200;       // kmc2 chain length
  double eps = -1;         // Lloyd threshold (-1: 1e-4 * E0 / n)
  int max_iters = 100;     // Lloyd iteration cap
  int grid_levels = 10;    // grid-rpkm level cap
};

enum class BudgetPolicy { MinOfBaselines, Fixed };

struct ExperimentConfig {
  std::vector<Index> k_list = {3, 9, 27};
  int repetitions = 40;
  std::vector<MethodSpec> baselines;  // run to their own stopping rules
  bool include_bwkm = true;

  // Boundary-method knobs (negative values select the size-based defaults).
  Index m = -1, m_prime = -1, s = -1, r = 5;
  StopSpec bwkm_stop;

  // MinOfBaselines assigns, per repetition, the smallest baseline ledger
  // count as the boundary method's distance budget; Fixed uses fixed_budget.
  BudgetPolicy policy = BudgetPolicy::MinOfBaselines;
  std::uint64_t fixed_budget = 0;

  std::uint64_t base_seed = 1;
  int jobs = 1;
  bool test_mode = false;   // per-iteration exact-error channel for the boundary method
  bool wall_clock = false;  // off by default: wall_ms stays 0 and outputs stay byte-stable

  void validate() const {
    if (k_list.empty()) throw std::invalid_argument("experiment: empty k list");
    if (repetitions < 1) throw std::invalid_argument("experiment: repetitions < 1");
    if (jobs < 1) throw std::invalid_argument("experiment: jobs < 1");
    if (policy == BudgetPolicy::Fixed && fixed_budget == 0)
      throw std::invalid_argument("experiment: fixed budget policy needs a positive budget");
    for (const auto& m : baselines)
      if (m.name == "bwkm")
        throw std::invalid_argument("experiment: bwkm is scheduled by the harness, not as a baseline");
  }
};

namespace detail {

inline MethodResult run_baseline(const MethodSpec& spec, const Dataset& data, Index k, RngStream& rng,
                                 DistanceLedger& ledger, const Instrumentation* instr) {
  if (spec.name == "lloyd-forgy" || spec.name == "lloyd-kmpp" || spec.name == "lloyd-kmc2") {
    BaselineConfig cfg;
    cfg.k = k;
    cfg.seeder = spec.name == "lloyd-forgy"  ? Seeder::Forgy
                 : spec.name == "lloyd-kmpp" ? Seeder::KmeansPP
                                             : Seeder::Kmc2;
    cfg.eps = spec.eps;
    cfg.max_iters = spec.max_iters;
    cfg.chain_length = spec.chain;
    return lloyd_full(data, cfg, rng, ledger, instr);
  }
  if (spec.name == "minibatch") {
    MinibatchConfig cfg;
    cfg.k = k;
    cfg.b = spec.b;
    cfg.iterations = spec.iterations;
    return minibatch(data, cfg, rng, ledger, instr);
  }
  if (spec.name == "grid-rpkm") {
    GridRpkmConfig cfg;
    cfg.k = k;
    cfg.max_levels = spec.grid_levels;
    cfg.eps = spec.eps;
    cfg.max_iters = spec.max_iters;
    return grid_rpkm(data, cfg, rng, ledger, instr);
  }
  if (spec.name == "kmpp-init") return kmpp_init(data, k, rng, ledger, instr);
  throw std::invalid_argument("unknown method: " + spec.name);
}

}  // namespace detail

// Runs every baseline under its own stopping rules, then the boundary method
// under the per-repetition budget policy, for each (dataset, k, repetition).
// Trials use independent rng streams and ledgers, so --jobs parallelism
// cannot change any result; output order is (dataset, k, seed, method).
// Every trial's final row carries the full-data error for the summary.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                               const std::vector<NamedDataset>& datasets) {
  cfg.validate();
  if (datasets.empty()) throw std::invalid_argument("experiment: no datasets");
  for (const auto& ds : datasets) ds.data.validate();

  struct Task {
    std::size_t di;
    std::size_t ki;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t di = 0; di < datasets.size(); ++di)
    for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki)
      for (int rep = 0; rep < cfg.repetitions; ++rep) tasks.push_back({di, ki, rep});

  std::vector<std::vector<TrialRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      const NamedDataset& ds = datasets[task.di];
      const Index k = cfg.k_list[task.ki];
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(task.rep);
      const std::uint64_t stream_base =
          (static_cast<std::uint64_t>(task.di) * cfg.k_list.size() + task.ki) * 64;

      Instrumentation final_exact;
      final_exact.exact_error = [&ds](const CentroidSet& c) { return exact_error(ds.data, c); };

      std::vector<TrialRecord>& out = results[t];
      std::uint64_t budget_min = std::numeric_limits<std::uint64_t>::max();

      auto stamp = [&](TrialRecord& rec, std::chrono::steady_clock::time_point t0) {
        rec.dataset = ds.id;
        rec.seed = seed;
        if (cfg.wall_clock)
          rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
      };

      for (std::size_t mi = 0; mi < cfg.baselines.size(); ++mi) {
        RngStream rng(seed, stream_base + mi);
        DistanceLedger ledger;
        auto t0 = std::chrono::steady_clock::now();
        MethodResult res = detail::run_baseline(cfg.baselines[mi], ds.data, k, rng, ledger, &final_exact);
        stamp(res.record, t0);
        budget_min = std::min(budget_min, ledger.count);
        out.push_back(std::move(res.record));
      }

      if (cfg.include_bwkm) {
        BwkmConfig bc;
        bc.k = k;
        bc.m = cfg.m;
        bc.m_prime = cfg.m_prime;
        bc.s = cfg.s;
        bc.r = cfg.r;
        bc.stop = cfg.bwkm_stop;
        if (cfg.policy == BudgetPolicy::Fixed)
          bc.stop.budget = cfg.fixed_budget;
        else if (!cfg.baselines.empty())
          bc.stop.budget = bc.stop.budget ? std::min(*bc.stop.budget, budget_min) : budget_min;

        RngStream rng(seed, stream_base + cfg.baselines.size());
        DistanceLedger ledger;
        auto t0 = std::chrono::steady_clock::now();
        auto res = bwkm(ds.data, bc, rng, ledger, cfg.test_mode ? &final_exact : nullptr);
        if (!res.record.rows.empty() && !res.record.rows.back().exact_error && res.centers.rows() == k)
          res.record.rows.back().exact_error = exact_error(ds.data, res.centers);
        stamp(res.record, t0);
        out.push_back(std::move(res.record));
      }
    }
  };

  int jobs = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<TrialRecord> records;
  for (auto& chunk : results)
    for (auto& rec : chunk) records.push_back(std::move(rec));
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.dataset, a.k, a.seed, a.method) < std::tie(b.dataset, b.k, b.seed, b.method);
  });
  return records;
}

struct SummaryRow {
  std::string dataset;
  std::int64_t k = 0;
  std::string method;
  double mean_rel_err = 0;    // mean over repetitions of (E - E_best) / E_best
  double mean_exact = 0;      // mean final full-data error
  double mean_distances = 0;  // mean final ledger count
  int trials = 0;
};

// Per-(dataset, k, method) averages; the relative error compares each
// method's final full-data error against the best method in the same
// repetition.  Trials lacking a final error are skipped.
inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::tuple<std::string, std::int64_t, std::uint64_t>, std::map<std::string, const TrialRecord*>>
      reps;
  for (const auto& rec : records) {
    if (rec.rows.empty() || !rec.rows.back().exact_error) continue;
    reps[{rec.dataset, rec.k, rec.seed}][rec.method] = &rec;
  }
  std::map<std::tuple<std::string, std::int64_t, std::string>, SummaryRow> acc;
  for (const auto& [key, methods] : reps) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [name, rec] : methods) best = std::min(best, *rec->rows.back().exact_error);
    if (!(best > 0)) continue;
    for (const auto& [name, rec] : methods) {
      SummaryRow& row = acc[{std::get<0>(key), std::get<1>(key), name}];
      row.dataset = std::get<0>(key);
      row.k = std::get<1>(key);
      row.method = name;
      double e = *rec->rows.back().exact_error;
      row.mean_rel_err += (e - best) / best;
      row.mean_exact += e;
      row.mean_distances += static_cast<double>(rec->rows.back().distances);
      row.trials += 1;
    }
  }
  std::vector<SummaryRow> out;
  for (auto& [key, row] : acc) {
    row.mean_rel_err /= row.trials;
    row.mean_exact /= row.trials;
    row.mean_distances /= row.trials;
    out.push_back(row);
  }
  return out;
}

inline std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "dataset" << std::setw(5) << "k" << std::setw(14) << "method"
     << std::right << std::setw(12) << "mean_rel" << std::setw(16) << "mean_error" << std::setw(16)
     << "mean_dists" << std::setw(8) << "trials" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(16) << r.dataset << std::setw(5) << r.k << std::setw(14) << r.method
       << std::right << std::setw(12) << std::fixed << std::setprecision(5) << r.mean_rel_err
       << std::setw(16) << std::setprecision(4) << std::scientific << r.mean_exact << std::setw(16)
       << std::setprecision(4) << r.mean_distances << std::setw(8) << r.trials << '\n';
    os.unsetf(std::ios::floatfield);
  }
  return os.str();
}

}  // namespace bwkm

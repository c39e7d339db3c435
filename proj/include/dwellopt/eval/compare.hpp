#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <thread>
#include <vector>

#include "dwellopt/adaptive_config.hpp"
#include "dwellopt/eval/reevaluate.hpp"
#include "dwellopt/eval/report.hpp"
#include "dwellopt/moea/gomea.hpp"

namespace dwellopt::eval {

struct EmbraceOnlyResult {
  moea::OptimizerState state;  // population without dose caches
  ReevaluationResult reevaluated;
};

/// Non-adaptive run on the EMBRACE aims only: g_max generations at n_dc_max
/// points, then re-evaluation on n_dc_reeval points (all aims evaluated).
inline EmbraceOnlyResult run_embrace_only(const PatientCase& c, const ProtocolConfig& protocol, const moea::OptimizerConfig& opt,
                                          const AdaptiveRunConfig& cfg, std::uint64_t seed, const EvaluationSettings& settings = {},
                                          const ProgressCallback& progress = {}) {
  cfg.validate();
  EvaluationSettings es = settings;
  es.dc_seed = derive_seed(seed, {fnv1a("dc")});
  PlanEvaluator ev(c, protocol, initial_aim_state(protocol), detail::evaluator_options(ObjectiveMode::embrace_only, cfg.n_dc_max, es));
  moea::OptimizerConfig oc = opt;
  oc.seed = derive_seed(seed, {fnv1a("embrace")});
  EmbraceOnlyResult r;
  r.state = moea::init_state(oc, ev, moea::build_linkage_tree(c));
  moea::run_generations(r.state, ev, cfg.g_max);
  if (progress) progress("final", r.state);
  r.reevaluated = reevaluate_front(r.state.archive, reevaluation_evaluator(c, ev, cfg.n_dc_reeval));
  detail::drop_dose_caches(r.state);
  return r;
}

struct CompareConfig {
  moea::OptimizerConfig optimizer;
  AdaptiveRunConfig adaptive;
  EvaluationSettings settings;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;
};

struct ComparisonReport {
  std::vector<RunReport> embrace_runs;
  std::vector<RunReport> full_runs;
  ModeSummary embrace;
  ModeSummary full;
};

/// Plain run at one fidelity: `generations` generations at `n_dc_points`
/// under the initial aim state, then re-evaluation of the archive.
struct FixedFidelityResult {
  moea::OptimizerState state;  // population without dose caches
  ReevaluationResult reevaluated;
};

inline FixedFidelityResult run_fixed_fidelity(const PatientCase& c, const ProtocolConfig& protocol, const moea::OptimizerConfig& opt,
                                              ObjectiveMode mode, std::size_t n_dc_points, std::size_t generations, std::size_t n_dc_reeval,
                                              std::uint64_t seed, const EvaluationSettings& settings = {}) {
  if (n_dc_points == 0 || n_dc_reeval == 0) throw ConfigError("fixed-fidelity run: point counts must be positive");
  EvaluationSettings es = settings;
  es.dc_seed = derive_seed(seed, {fnv1a("dc")});
  PlanEvaluator ev(c, protocol, initial_aim_state(protocol), detail::evaluator_options(mode, n_dc_points, es));
  moea::OptimizerConfig oc = opt;
  oc.seed = derive_seed(seed, {fnv1a("fixed")});
  FixedFidelityResult r;
  r.state = moea::init_state(oc, ev, moea::build_linkage_tree(c));
  moea::run_generations(r.state, ev, generations);
  r.reevaluated = reevaluate_front(r.state.archive, reevaluation_evaluator(c, ev, n_dc_reeval));
  detail::drop_dose_caches(r.state);
  return r;
}

inline RunReport run_one(const PatientCase& c, const ProtocolConfig& p, const CompareConfig& cfg, bool full, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  if (full) {
    const auto res = run_adaptive(c, p, cfg.optimizer, cfg.adaptive, seed, cfg.settings);
    r = make_run_report("F", seed, res.reevaluated, p);
    r.rounds = res.rounds;
    for (const auto& e : res.aims.entries) r.eliminations += e.eliminated ? 1 : 0;
  } else {
    const auto res = run_embrace_only(c, p, cfg.optimizer, cfg.adaptive, seed, cfg.settings);
    r = make_run_report("E", seed, res.reevaluated, p);
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Runs modes E and F once per seed and aggregates them. Runs are
/// independent, so with jobs > 1 they execute on worker threads; results do
/// not depend on scheduling.
inline ComparisonReport compare_approaches(const PatientCase& c, const ProtocolConfig& p, const CompareConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("compare: at least one run is required");
  const std::size_t n = cfg.seeds.size();
  std::vector<RunReport> reports(2 * n);
  std::vector<std::exception_ptr> errors(2 * n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < 2 * n;) {
      try {
        reports[k] = run_one(c, p, cfg, k >= n, cfg.seeds[k % n]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(2 * n)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  ComparisonReport out;
  out.embrace_runs.assign(reports.begin(), reports.begin() + static_cast<std::ptrdiff_t>(n));
  out.full_runs.assign(reports.begin() + static_cast<std::ptrdiff_t>(n), reports.end());
  out.embrace = summarize("E", out.embrace_runs, p);
  out.full = summarize("F", out.full_runs, p);
  return out;
}

}  // namespace dwellopt::eval

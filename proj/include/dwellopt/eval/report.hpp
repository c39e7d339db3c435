#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dwellopt/eval/reevaluate.hpp"
#include "dwellopt/objective_model.hpp"

namespace dwellopt::eval {

/// Outcome of one optimization run after re-evaluation.
struct RunReport {
  std::string mode;  // "E" (EMBRACE aims only) or "F" (full, adaptive)
  std::uint64_t seed = 0;
  std::size_t archive_size = 0;
  std::size_t n_plans_satisfying_embrace = 0;
  bool embrace_all_satisfied = false;  // at least one plan meets every EMBRACE aim
  std::vector<std::string> adjustable_ids;
  std::vector<std::vector<double>> satisfying_dvis;  // per satisfying plan, values of adjustable_ids
  double mean_abs_fallback_lci = 0.0;
  double mean_abs_fallback_lsi = 0.0;
  double runtime_seconds = 0.0;
  std::size_t rounds = 0;
  std::size_t eliminations = 0;
};

inline std::vector<std::size_t> adjustable_indices(const ProtocolConfig& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.aims.size(); ++i)
    if (p.aims[i].adjustable) out.push_back(i);
  return out;
}

inline RunReport make_run_report(std::string mode, std::uint64_t seed, const ReevaluationResult& re, const ProtocolConfig& p) {
  RunReport r;
  r.mode = std::move(mode);
  r.seed = seed;
  r.archive_size = re.solutions.size();
  const auto adj = adjustable_indices(p);
  for (std::size_t i : adj) r.adjustable_ids.push_back(p.aims[i].id);
  for (const auto& s : re.solutions) {
    if (!embrace_satisfied(s.dvi_values, p)) continue;
    ++r.n_plans_satisfying_embrace;
    std::vector<double> v;
    for (std::size_t i : adj) v.push_back(s.dvi_values[i]);
    r.satisfying_dvis.push_back(std::move(v));
  }
  r.embrace_all_satisfied = r.n_plans_satisfying_embrace > 0;
  r.mean_abs_fallback_lci = re.mean_abs_fallback_lci();
  r.mean_abs_fallback_lsi = re.mean_abs_fallback_lsi();
  return r;
}

inline std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Sample standard deviation (divisor n - 1); 0 for a single value.
inline std::optional<double> stdev(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() == 1) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct DviSummary {
  std::string aim_id;
  std::size_t count = 0;
  std::optional<double> median;  // empty: no run produced a satisfying plan
  std::optional<double> stdev;
};

/// Aggregate of one mode over its runs. DVI statistics pool the satisfying
/// plans of all runs.
struct ModeSummary {
  std::string mode;
  std::size_t n_runs = 0;
  double pct_embrace_satisfied = 0.0;
  double mean_plans = 0.0;
  std::vector<DviSummary> dvis;
};

inline ModeSummary summarize(const std::string& mode, const std::vector<RunReport>& runs, const ProtocolConfig& p) {
  ModeSummary m;
  m.mode = mode;
  m.n_runs = runs.size();
  const auto adj = adjustable_indices(p);
  std::vector<std::vector<double>> pooled(adj.size());
  std::size_t satisfied = 0, plans = 0;
  for (const auto& r : runs) {
    satisfied += r.embrace_all_satisfied ? 1 : 0;
    plans += r.n_plans_satisfying_embrace;
    for (const auto& row : r.satisfying_dvis)
      for (std::size_t k = 0; k < adj.size(); ++k) pooled[k].push_back(row[k]);
  }
  if (!runs.empty()) {
    m.pct_embrace_satisfied = 100.0 * static_cast<double>(satisfied) / static_cast<double>(runs.size());
    m.mean_plans = static_cast<double>(plans) / static_cast<double>(runs.size());
  }
  for (std::size_t k = 0; k < adj.size(); ++k) m.dvis.push_back({p.aims[adj[k]].id, pooled[k].size(), median(pooled[k]), stdev(pooled[k])});
  return m;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "n.a."; }

/// Table with columns mode, pct_embrace_satisfied, mean_plans, then
/// <aim>_median and <aim>_std for every adjustable aim.
inline std::string summary_table_csv(const std::vector<ModeSummary>& rows, const ProtocolConfig& p) {
  std::ostringstream os;
  os << "mode,pct_embrace_satisfied,mean_plans";
  for (std::size_t i : adjustable_indices(p)) os << ',' << p.aims[i].id << "_median," << p.aims[i].id << "_std";
  os << '\n';
  for (const auto& m : rows) {
    os << m.mode << ',' << format_number(m.pct_embrace_satisfied) << ',' << format_number(m.mean_plans);
    for (const auto& d : m.dvis) os << ',' << format_optional(d.median) << ',' << format_optional(d.stdev);
    os << '\n';
  }
  return os.str();
}

inline std::string run_reports_csv(const std::vector<RunReport>& runs) {
  std::ostringstream os;
  os << "mode,seed,archive_size,n_plans_satisfying_embrace,embrace_all_satisfied,rounds,eliminations,mean_abs_fallback_lci,"
        "mean_abs_fallback_lsi,runtime_seconds\n";
  for (const auto& r : runs)
    os << r.mode << ',' << r.seed << ',' << r.archive_size << ',' << r.n_plans_satisfying_embrace << ',' << (r.embrace_all_satisfied ? 1 : 0)
       << ',' << r.rounds << ',' << r.eliminations << ',' << format_number(r.mean_abs_fallback_lci) << ','
       << format_number(r.mean_abs_fallback_lsi) << ',' << format_number(r.runtime_seconds) << '\n';
  return os.str();
}

}  // namespace dwellopt::eval

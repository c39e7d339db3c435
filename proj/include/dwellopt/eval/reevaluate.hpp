#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dwellopt/evaluator.hpp"
#include "dwellopt/moea/archive.hpp"

namespace dwellopt::eval {

/// Archive plans evaluated again on a larger DC point set. `fallback_*` is
/// the old minus the new objective value, per plan.
struct ReevaluationResult {
  std::vector<Solution> solutions;  // summaries, in archive order
  std::vector<double> fallback_lci;
  std::vector<double> fallback_lsi;
  std::size_t n_dc_points = 0;

  double mean_abs_fallback_lci() const { return mean_abs(fallback_lci); }
  double mean_abs_fallback_lsi() const { return mean_abs(fallback_lsi); }

 private:
  static double mean_abs(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s / static_cast<double>(v.size());
  }
};

/// Re-evaluates every plan with `evaluator`, which should be configured with
/// the target number of DC points and with `evaluate_all_aims` set.
inline ReevaluationResult reevaluate(std::span<const Solution> plans, const PlanEvaluator& evaluator) {
  ReevaluationResult r;
  r.n_dc_points = evaluator.options().n_dc_points;
  r.solutions.reserve(plans.size());
  for (const auto& p : plans) {
    Solution fresh = evaluator.make_solution(p.dwell_times);
    r.fallback_lci.push_back(p.objectives.lci - fresh.objectives.lci);
    r.fallback_lsi.push_back(p.objectives.lsi - fresh.objectives.lsi);
    r.solutions.push_back(fresh.summary());
  }
  return r;
}

inline ReevaluationResult reevaluate_front(const moea::ElitistArchive& archive, const PlanEvaluator& evaluator) {
  if (archive.empty()) throw ContractError("reevaluate_front: empty archive");
  std::vector<Solution> plans;
  plans.reserve(archive.size());
  for (const auto& e : archive.members()) plans.push_back(e.solution);
  return reevaluate(plans, evaluator);
}

/// Builds a re-evaluation evaluator matching `base` except for the point count.
inline PlanEvaluator reevaluation_evaluator(const PatientCase& c, const PlanEvaluator& base, std::size_t n_dc_points) {
  auto opts = base.options();
  opts.n_dc_points = n_dc_points;
  opts.evaluate_all_aims = true;
  return PlanEvaluator(c, base.protocol(), base.aim_state(), opts);
}

}  // namespace dwellopt::eval

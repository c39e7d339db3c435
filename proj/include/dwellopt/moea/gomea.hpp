#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dwellopt/error.hpp"
#include "dwellopt/evaluator.hpp"
#include "dwellopt/moea/archive.hpp"
#include "dwellopt/moea/clustering.hpp"
#include "dwellopt/moea/distribution.hpp"
#include "dwellopt/moea/dominance.hpp"
#include "dwellopt/moea/linkage_tree.hpp"
#include "dwellopt/rng.hpp"

namespace dwellopt::moea {

/// Adaptive variance scaling and anticipated mean shift. Each cluster keeps
/// one covariance multiplier per linkage set; it grows while improvements land
/// far from the mean and shrinks after `max_stall` generations without any.
struct VarianceScalingConfig {
  bool enabled = true;
  double increase = 1.0 / 0.9;
  double decrease = 0.9;
  double sdr_threshold = 1.0;
  std::size_t max_stall = 25;
  double shift_fraction = 0.5;  // chance that a plan also tries the mean shift
  double shift_step = 2.0;      // multiple of the cluster mean's last move

  void validate() const {
    if (!(increase >= 1.0 && decrease > 0.0 && decrease <= 1.0 && sdr_threshold > 0.0))
      throw ConfigError("variance scaling: need increase >= 1, 0 < decrease <= 1, sdr_threshold > 0");
    if (!(shift_fraction >= 0.0 && shift_fraction <= 1.0 && shift_step >= 0.0))
      throw ConfigError("variance scaling: shift_fraction must lie in [0, 1] and shift_step be non-negative");
  }
};

struct OptimizerConfig {
  std::size_t population_size = 96;
  double selection_fraction = 0.35;
  std::size_t n_clusters = 5;
  std::size_t archive_capacity = 1000;
  double init_lo = 0.0;  // seconds
  double init_hi = 2.0;
  double t_max = 60.0;
  std::uint64_t seed = 1;
  std::size_t init_retries = 100;
  VarianceScalingConfig scaling;

  void validate() const {
    scaling.validate();
    if (n_clusters == 0) throw ConfigError("optimizer: n_clusters must be positive");
    if (population_size < n_clusters) throw ConfigError("optimizer: population_size must be at least n_clusters");
    if (!(selection_fraction > 0.0 && selection_fraction <= 1.0)) throw ConfigError("optimizer: selection_fraction must lie in (0, 1]");
    if (selection_size(population_size, selection_fraction) < n_clusters)
      throw ConfigError("optimizer: selection is smaller than the number of clusters");
    if (archive_capacity == 0) throw ConfigError("optimizer: archive_capacity must be positive");
    if (!(init_lo >= 0.0 && init_hi > init_lo && t_max >= init_hi)) throw ConfigError("optimizer: need 0 <= init_lo < init_hi <= t_max");
  }
};

/// What a cluster carries over to the next generation.
struct ClusterMemory {
  ClusterRole role = ClusterRole::middle;
  ObjectivePair mean_objectives;
  std::vector<double> mean_times;
  std::vector<double> multipliers;  // one per linkage set
  std::size_t stall = 0;            // generations without an archive improvement
};

/// Resumable optimizer state: continuing a run is calling run_generations again.
struct OptimizerState {
  OptimizerConfig config;
  LinkageTree tree;
  std::vector<Solution> population;
  ElitistArchive archive{1000};
  Rng rng;
  std::size_t generation = 0;
  std::uint64_t evaluations = 0;
  std::vector<double> best_lci_trace;       // archive max LCI after each generation
  std::vector<double> best_balanced_trace;  // archive max min(LCI, LSI) after each generation
  std::vector<ClusterMemory> clusters;      // last generation's clusters, for variance scaling
};

inline double best_lci(const ElitistArchive& a) {
  return a.empty() ? -std::numeric_limits<double>::infinity() : a.members().back().solution.objectives.lci;
}

inline double best_balanced(const ElitistArchive& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : a.members()) best = std::max(best, std::min(e.solution.objectives.lci, e.solution.objectives.lsi));
  return best;
}

namespace detail {

// Scales needle dwell times so the plan meets the contribution restriction.
inline bool scale_needles_to_feasibility(std::vector<double>& times, const PlanEvaluator& ev) {
  const auto& groups = ev.needle_groups();
  const auto& cfg = ev.options().constraints;
  std::vector<char> is_needle(times.size(), 0);
  double needles = 0.0;
  std::vector<double> group_sum;
  for (const auto& g : groups) {
    double s = 0.0;
    for (std::size_t j : g) {
      s += times[j];
      is_needle[j] = 1;
    }
    group_sum.push_back(s);
    needles += s;
  }
  double others = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j)
    if (!is_needle[j]) others += times[j];
  if (!(others > 0.0)) return false;
  double factor = needles > 0.0 ? cfg.cr_total * others / ((1.0 - cfg.cr_total) * needles) : 1.0;
  for (double g : group_sum) {
    const double excess = g - cfg.cr_single * needles;
    if (excess > 0.0) factor = std::min(factor, cfg.cr_single * others / excess);
  }
  factor = std::min(1.0, factor * (1.0 - 1e-9));
  for (std::size_t j = 0; j < times.size(); ++j)
    if (is_needle[j]) times[j] *= factor;
  return ev.cr_feasible(times);
}

}  // namespace detail

/// Population of uniformly initialized plans. Plans violating the catheter
/// restriction are redrawn up to `init_retries` times, then repaired by
/// shrinking their needle times.
inline std::vector<Solution> init_population(const OptimizerConfig& cfg, const PlanEvaluator& ev, Rng& rng) {
  cfg.validate();
  std::vector<Solution> pop;
  pop.reserve(cfg.population_size);
  std::vector<double> times(ev.n_dwells());
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    bool feasible = false;
    for (std::size_t attempt = 0; attempt <= cfg.init_retries && !feasible; ++attempt) {
      for (auto& t : times) t = rng.uniform(cfg.init_lo, cfg.init_hi);
      feasible = ev.cr_feasible(times);
    }
    if (!feasible && !detail::scale_needles_to_feasibility(times, ev))
      throw InfeasibleError("init_population: no plan satisfies the catheter contribution restriction");
    pop.push_back(ev.make_solution(times));
  }
  return pop;
}

inline OptimizerState init_state(const OptimizerConfig& cfg, const PlanEvaluator& ev, LinkageTree tree) {
  cfg.validate();
  OptimizerState st;
  st.config = cfg;
  st.tree = std::move(tree);
  st.archive = ElitistArchive(cfg.archive_capacity);
  st.rng = Rng(derive_seed(cfg.seed, {fnv1a("optimizer")}));
  st.population = init_population(cfg, ev, st.rng);
  st.evaluations = st.population.size();
  for (const auto& s : st.population) st.archive.update(s);
  return st;
}

// Scratch buffers reused across GOM steps.
struct GomWorkspace {
  std::vector<Eigen::VectorXd> dose_backup;
  std::vector<double> dvi_backup;
  std::vector<double> old_times;
  std::vector<std::size_t> all_dwells;
  Eigen::VectorXd sample;
};

/// Per linkage set: number of changes that entered the archive and the sum of
/// their sampled values.
struct SetImprovements {
  std::vector<std::size_t> count;
  std::vector<Eigen::VectorXd> sum;

  void reset(const LinkageTree& tree) {
    count.assign(tree.size(), 0);
    sum.resize(tree.size());
    for (std::size_t k = 0; k < tree.size(); ++k) sum[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tree.sets[k].size()));
  }
};

struct ChangeOutcome {
  bool accepted = false;
  bool stored = false;
};

namespace detail {

inline bool improves(ClusterRole role, const ObjectivePair& after, const ObjectivePair& before, bool stored) {
  switch (role) {
    case ClusterRole::extreme_lci: return after.lci > before.lci;
    case ClusterRole::extreme_lsi: return after.lsi > before.lsi;
    case ClusterRole::middle: return dominates(after, before) || (stored && !dominates(before, after));
  }
  return false;
}

// `s` already holds the new times of `changed`; the previous ones are in
// `old_times`. Keeps the change when it is catheter-feasible and improves
// under `role`, otherwise restores the plan exactly.
inline ChangeOutcome settle_change(Solution& s, std::span<const std::size_t> changed, std::span<const double> old_times, ClusterRole role,
                                   const PlanEvaluator& ev, ElitistArchive& archive, GomWorkspace& ws, std::uint64_t* evaluations) {
  auto restore_times = [&] {
    for (std::size_t a = 0; a < changed.size(); ++a) s.dwell_times[changed[a]] = old_times[a];
  };
  if (!ev.cr_feasible(s.dwell_times)) {
    restore_times();
    return {};
  }
  ws.dose_backup.resize(s.dose.size());
  for (std::size_t r = 0; r < s.dose.size(); ++r) ws.dose_backup[r] = s.dose[r];
  ws.dvi_backup = s.dvi_values;
  const ObjectivePair before = s.objectives;

  ev.evaluate_partial(s, changed, old_times);
  if (evaluations) ++*evaluations;
  ChangeOutcome out;
  out.stored = archive.update(s);
  out.accepted = improves(role, s.objectives, before, out.stored);
  if (out.accepted) return out;
  restore_times();
  for (std::size_t r = 0; r < s.dose.size(); ++r) s.dose[r].swap(ws.dose_backup[r]);
  s.dvi_values.swap(ws.dvi_backup);
  s.objectives = before;
  s.cr_feasible = true;
  return out;
}

}  // namespace detail

/// Gene-pool optimal mixing of one solution. Every linkage set is resampled
/// in turn; a change is kept only if the plan stays catheter-feasible and
/// improves under the cluster's role. `multipliers` scales each set's
/// covariance (empty: unscaled). Returns the number of kept changes.
inline std::size_t gom_variation(Solution& s, const ClusterModel& model, ClusterRole role, const LinkageTree& tree, const PlanEvaluator& ev,
                                 ElitistArchive& archive, Rng& rng, double t_max, GomWorkspace& ws, std::uint64_t* evaluations = nullptr,
                                 std::span<const double> multipliers = {}, SetImprovements* improvements = nullptr) {
  std::size_t kept = 0;
  for (std::size_t k = 0; k < tree.size(); ++k) {
    const auto& set = tree.sets[k];
    sample_set(model.sets[k], rng, ws.sample, multipliers.empty() ? 1.0 : multipliers[k]);
    ws.old_times.resize(set.size());
    bool changed = false;
    for (std::size_t a = 0; a < set.size(); ++a) {
      ws.old_times[a] = s.dwell_times[set[a]];
      const double v = std::clamp(ws.sample[static_cast<Eigen::Index>(a)], 0.0, t_max);
      changed = changed || v != ws.old_times[a];
      s.dwell_times[set[a]] = v;
    }
    if (!changed) continue;
    const auto out = detail::settle_change(s, set, ws.old_times, role, ev, archive, ws, evaluations);
    if (!out.accepted) continue;
    ++kept;
    if (improvements && out.stored) {
      ++improvements->count[k];
      for (std::size_t a = 0; a < set.size(); ++a) improvements->sum[k][static_cast<Eigen::Index>(a)] += s.dwell_times[set[a]];
    }
  }
  return kept;
}

/// Moves the whole plan by `shift` (clamped to [0, t_max]) and keeps the move
/// under the same rule as a mixing step.
inline ChangeOutcome shift_plan(Solution& s, std::span<const double> shift, ClusterRole role, const PlanEvaluator& ev, ElitistArchive& archive,
                                double t_max, GomWorkspace& ws, std::uint64_t* evaluations = nullptr) {
  const std::size_t n = s.dwell_times.size();
  if (ws.all_dwells.size() != n) {
    ws.all_dwells.resize(n);
    for (std::size_t j = 0; j < n; ++j) ws.all_dwells[j] = j;
  }
  ws.old_times = s.dwell_times;
  bool changed = false;
  for (std::size_t j = 0; j < n; ++j) {
    s.dwell_times[j] = std::clamp(s.dwell_times[j] + shift[j], 0.0, t_max);
    changed = changed || s.dwell_times[j] != ws.old_times[j];
  }
  if (!changed) return {};
  return detail::settle_change(s, ws.all_dwells, ws.old_times, role, ev, archive, ws, evaluations);
}

namespace detail {

// Carries the previous generation's memory over to the new clusters: each
// new cluster inherits from the closest old cluster with the same role.
inline std::vector<ClusterMemory> match_clusters(const std::vector<Cluster>& clusters, const std::vector<ClusterMemory>& previous,
                                                 const ObjectiveScale& scale, std::size_t n_sets) {
  std::vector<ClusterMemory> out;
  out.reserve(clusters.size());
  for (const auto& cl : clusters) {
    const ClusterMemory* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : previous) {
      if (p.role != cl.role || p.multipliers.size() != n_sets) continue;
      const double d = scale.distance(cl.mean, p.mean_objectives);
      if (d < best_d) {
        best_d = d;
        best = &p;
      }
    }
    ClusterMemory m = best ? *best : ClusterMemory{};
    if (!best) m.multipliers.assign(n_sets, 1.0);
    m.role = cl.role;
    out.push_back(std::move(m));
  }
  return out;
}

inline void update_multipliers(ClusterMemory& m, const ClusterModel& model, const SetImprovements& imp, const VarianceScalingConfig& cfg) {
  bool any = false;
  for (std::size_t k = 0; k < m.multipliers.size(); ++k) any = any || imp.count[k] > 0;
  if (any)
    m.stall = 0;
  else if (*std::max_element(m.multipliers.begin(), m.multipliers.end()) <= 1.0)
    ++m.stall;
  for (std::size_t k = 0; k < m.multipliers.size(); ++k) {
    double& c = m.multipliers[k];
    if (imp.count[k] > 0) {
      c = std::max(c, 1.0);
      const Eigen::VectorXd mean_improvement = imp.sum[k] / static_cast<double>(imp.count[k]);
      if (standardized_distance(model.sets[k], mean_improvement) > cfg.sdr_threshold) c *= cfg.increase;
    } else {
      if (c > 1.0 || m.stall >= cfg.max_stall) c *= cfg.decrease;
      if (c < 1.0 && m.stall < cfg.max_stall) c = 1.0;
    }
  }
}

}  // namespace detail

using GenerationCallback = std::function<void(const OptimizerState&)>;

/// Runs `g` generations of select, cluster, estimate and mix on a resumable state.
inline void run_generations(OptimizerState& st, const PlanEvaluator& ev, std::size_t g, const GenerationCallback& on_generation = {}) {
  const auto& cfg = st.config;
  const auto& vs = cfg.scaling;
  const std::size_t n = ev.n_dwells();
  std::vector<ObjectivePair> objs(st.population.size());
  GomWorkspace ws;
  std::vector<double> shift(n);
  for (std::size_t gen = 0; gen < g; ++gen) {
    for (std::size_t i = 0; i < st.population.size(); ++i) objs[i] = st.population[i].objectives;
    const auto selected = select(objs, cfg.selection_fraction);
    std::vector<ObjectivePair> sel_objs;
    sel_objs.reserve(selected.size());
    for (std::size_t i : selected) sel_objs.push_back(objs[i]);
    const auto clusters = cluster_selection(sel_objs, cfg.n_clusters);
    const ObjectiveScale scale = ObjectiveScale::fit(objs);

    std::vector<ClusterModel> models;
    models.reserve(clusters.size());
    std::vector<std::vector<double>> mean_times(clusters.size(), std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      std::vector<const std::vector<double>*> samples;
      samples.reserve(clusters[c].members.size());
      for (std::size_t m : clusters[c].members) samples.push_back(&st.population[selected[m]].dwell_times);
      models.push_back(estimate_distributions(samples, st.tree));
      for (const auto* x : samples)
        for (std::size_t j = 0; j < n; ++j) mean_times[c][j] += (*x)[j] / static_cast<double>(samples.size());
    }
    std::vector<ClusterMemory> memory;
    std::vector<SetImprovements> improvements(clusters.size());
    if (vs.enabled) {
      memory = detail::match_clusters(clusters, st.clusters, scale, st.tree.size());
      for (auto& imp : improvements) imp.reset(st.tree);
    }

    std::vector<std::size_t> assignment(st.population.size());
    for (std::size_t i = 0; i < st.population.size(); ++i) assignment[i] = nearest_cluster(objs[i], clusters, scale);
    for (std::size_t i = 0; i < st.population.size(); ++i) {
      const std::size_t c = assignment[i];
      if (!vs.enabled) {
        gom_variation(st.population[i], models[c], clusters[c].role, st.tree, ev, st.archive, st.rng, cfg.t_max, ws, &st.evaluations);
        continue;
      }
      gom_variation(st.population[i], models[c], clusters[c].role, st.tree, ev, st.archive, st.rng, cfg.t_max, ws, &st.evaluations,
                    memory[c].multipliers, &improvements[c]);
      const bool try_shift = st.rng.uniform(0.0, 1.0) < vs.shift_fraction;
      if (try_shift && memory[c].mean_times.size() == n) {
        for (std::size_t j = 0; j < n; ++j) shift[j] = vs.shift_step * (mean_times[c][j] - memory[c].mean_times[j]);
        shift_plan(st.population[i], shift, clusters[c].role, ev, st.archive, cfg.t_max, ws, &st.evaluations);
      }
    }
    if (vs.enabled) {
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        detail::update_multipliers(memory[c], models[c], improvements[c], vs);
        memory[c].mean_objectives = clusters[c].mean;
        memory[c].mean_times = std::move(mean_times[c]);
      }
      st.clusters = std::move(memory);
    }
    ++st.generation;
    st.best_lci_trace.push_back(best_lci(st.archive));
    st.best_balanced_trace.push_back(best_balanced(st.archive));
    if (on_generation) on_generation(st);
  }
}

/// Recomputes objectives after the evaluator's aim state changed: DVI values
/// are kept, the archive drops members that became dominated and then takes
/// in population members that are now non-dominated.
inline void recompute_objectives(OptimizerState& st, const PlanEvaluator& ev) {
  for (auto& s : st.population) ev.refresh_objectives(s);
  for (auto& e : st.archive.mutable_members()) ev.refresh_objectives(e.solution);
  st.archive.remove_dominated();
  for (const auto& s : st.population) st.archive.update(s);
}

}  // namespace dwellopt::moea

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dwellopt/eval/reevaluate.hpp"
#include "dwellopt/evaluator.hpp"
#include "dwellopt/moea/gomea.hpp"
#include "dwellopt/objective_model.hpp"

namespace dwellopt {

struct AdaptiveRunConfig {
  int min_steps = 4;
  std::size_t n_dc_min = 2500;
  std::size_t n_dc_max = 20000;
  std::size_t g_min = 350;
  std::size_t g_max = 490;
  std::size_t n_dc_reeval = 50000;
  // Keep the final run going (in chunks of g_min generations, at most
  // embrace_extra_chunks of them) until some plan meets every EMBRACE aim.
  bool embrace_stop = false;
  std::size_t embrace_extra_chunks = 4;

  void validate() const {
    if (min_steps <= 0 || n_dc_min == 0 || n_dc_max == 0 || g_min == 0 || g_max == 0 || n_dc_reeval == 0)
      throw ConfigError("adaptive config: all parameters must be positive");
    if (n_dc_min > n_dc_max || n_dc_max > n_dc_reeval) throw ConfigError("adaptive config: need n_dc_min <= n_dc_max <= n_dc_reeval");
  }
};

/// Archive member maximizing min(LCI, LSI); ties go to the larger LCI + LSI,
/// then to the earliest inserted.
inline const moea::ArchiveEntry& select_best_balanced(std::span<const moea::ArchiveEntry> members) {
  if (members.empty()) throw ContractError("select_best_balanced: empty archive");
  const moea::ArchiveEntry* best = &members[0];
  auto key = [](const moea::ArchiveEntry& e) {
    const auto& o = e.solution.objectives;
    return std::pair{std::min(o.lci, o.lsi), o.lci + o.lsi};
  };
  for (const auto& e : members.subspan(1)) {
    const auto k = key(e), kb = key(*best);
    if (k > kb || (k == kb && e.sequence < best->sequence)) best = &e;
  }
  return *best;
}

inline const moea::ArchiveEntry& select_best_balanced(const moea::ElitistArchive& archive) {
  return select_best_balanced(std::span<const moea::ArchiveEntry>(archive.members()));
}

enum class AdjustOutcome { adjusted, eliminated };

/// Aspiration step for an aim of priority `priority` given the current p_low.
inline double aspiration_step(const AimSpec& aim, int p_low, int min_steps) {
  return (aim.aspiration_loose - aim.aspiration_strict) / (static_cast<double>(min_steps) * static_cast<double>(p_low - aim.priority + 1));
}

/// Moves a violated added aim one step towards its loose aspiration, or
/// eliminates it if it is already there. Landing within 1e-9 of the range
/// width from the loose value counts as reaching it, so that the intended
/// number of steps is not broken by rounding.
inline AdjustOutcome adjust_aim(const AimSpec& aim, AimStateEntry& entry, int p_low, int min_steps) {
  if (aim.protocol != AimProtocol::added || !aim.adjustable) throw ContractError("adjust_aim: aim " + aim.id + " is not adjustable");
  if (entry.eliminated) throw ContractError("adjust_aim: aim " + aim.id + " is already eliminated");
  if (min_steps <= 0) throw ContractError("adjust_aim: min_steps must be positive");
  if (p_low < aim.priority) throw ContractError("adjust_aim: p_low below the aim's priority");
  if (entry.current_aspiration == aim.aspiration_loose) {
    entry.eliminated = true;
    return AdjustOutcome::eliminated;
  }
  const double range = aim.aspiration_loose - aim.aspiration_strict;
  double next = entry.current_aspiration + aspiration_step(aim, p_low, min_steps);
  // Orientation-aware: `range` and the remaining gap share a sign until loose is reached.
  if ((aim.aspiration_loose - next) * range <= 1e-9 * range * range) next = aim.aspiration_loose;
  entry.current_aspiration = next;
  ++entry.steps_taken;
  return AdjustOutcome::adjusted;
}

/// Highest priority number among added aims that are still in play; 0 if none.
inline int lowest_priority(const ProtocolConfig& protocol, const AimState& state) {
  int p_low = 0;
  for (std::size_t i = 0; i < protocol.aims.size(); ++i)
    if (protocol.aims[i].protocol == AimProtocol::added && !state.entries[i].eliminated) p_low = std::max(p_low, protocol.aims[i].priority);
  return p_low;
}

struct AuditRecord {
  int round = 0;
  std::string aim_id;
  double old_aspiration = 0.0;
  double new_aspiration = 0.0;
  bool eliminated = false;
  int p_low = 0;
  ObjectivePair s_star;

  std::string to_line() const {
    std::ostringstream os;
    os.precision(17);
    os << "round=" << round << " aim=" << aim_id << " old=" << old_aspiration << " new=";
    if (eliminated)
      os << "ELIMINATED";
    else
      os << new_aspiration;
    os << " p_low=" << p_low << " s_lci=" << s_star.lci << " s_lsi=" << s_star.lsi;
    return os.str();
  }
};

inline std::string audit_log_text(std::span<const AuditRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.to_line() + "\n";
  return out;
}

/// One pass of the adjustment step on the chosen plan `s_star`: every added,
/// non-eliminated aim it violates is stepped or eliminated. Returns the
/// records of the changes made (empty when nothing changed).
inline std::vector<AuditRecord> adjust_round(const ProtocolConfig& protocol, AimState& state, std::span<const double> s_star_dvis,
                                             const ObjectivePair& s_star_objectives, int round, int min_steps) {
  std::vector<AuditRecord> records;
  const int p_low = lowest_priority(protocol, state);
  if (p_low == 0) return records;
  for (std::size_t i = 0; i < protocol.aims.size(); ++i) {
    const auto& aim = protocol.aims[i];
    auto& entry = state.entries[i];
    if (aim.protocol != AimProtocol::added || entry.eliminated) continue;
    if (!(delta(aim, entry, s_star_dvis[i]) < 0.0)) continue;
    AuditRecord rec{round, aim.id, entry.current_aspiration, 0.0, false, p_low, s_star_objectives};
    rec.eliminated = adjust_aim(aim, entry, p_low, min_steps) == AdjustOutcome::eliminated;
    rec.new_aspiration = entry.current_aspiration;
    records.push_back(std::move(rec));
  }
  return records;
}

/// Upper bound on adjustment rounds: every round advances or eliminates at
/// least one aim.
inline std::size_t adjustment_round_bound(const ProtocolConfig& protocol, int min_steps) {
  int p_max = 0;
  for (const auto& a : protocol.aims)
    if (a.protocol == AimProtocol::added) p_max = std::max(p_max, a.priority);
  std::size_t bound = 0;
  for (const auto& a : protocol.aims)
    if (a.protocol == AimProtocol::added) bound += static_cast<std::size_t>(min_steps * (p_max - a.priority + 1) + 1);
  return bound;
}

/// Settings shared by every evaluator of one run.
struct EvaluationSettings {
  std::uint64_t dc_seed = 1;
  DoseKernelConfig kernel;
  ConstraintConfig constraints;
};

struct AdaptiveResult {
  AimState aims;
  std::vector<AuditRecord> audit;
  std::size_t rounds = 0;               // low-fidelity rounds executed
  std::size_t low_generations = 0;
  std::vector<double> low_best_lci_trace;
  std::vector<double> last_s_star_dvis;  // DVIs of s* in the round that ended the loop
  moea::OptimizerState final_state;     // high-fidelity run; population without dose caches
  eval::ReevaluationResult reevaluated;
  bool embrace_reached = false;         // some final plan met every EMBRACE aim (before re-evaluation)
};

namespace detail {

inline void drop_dose_caches(moea::OptimizerState& st) {
  for (auto& s : st.population) s = s.summary();
}

inline bool archive_meets_embrace(const moea::ElitistArchive& a, const ProtocolConfig& p) {
  for (const auto& e : a.members())
    if (embrace_satisfied(e.solution.dvi_values, p)) return true;
  return false;
}

inline PlanEvaluator::Options evaluator_options(ObjectiveMode mode, std::size_t n, const EvaluationSettings& s) {
  PlanEvaluator::Options o;
  o.mode = mode;
  o.n_dc_points = n;
  o.dc_seed = s.dc_seed;
  o.kernel = s.kernel;
  o.constraints = s.constraints;
  return o;
}

}  // namespace detail

using ProgressCallback = std::function<void(const std::string& phase, const moea::OptimizerState&)>;

/// Adaptive aspiration configuration: low-fidelity rounds that resume one
/// optimizer state, stepping violated added aims after each round, until a
/// round changes nothing; then a fresh high-fidelity run under the final aim
/// state, whose archive is re-evaluated on n_dc_reeval points.
inline AdaptiveResult run_adaptive(const PatientCase& c, const ProtocolConfig& protocol, const moea::OptimizerConfig& opt,
                                   const AdaptiveRunConfig& cfg, std::uint64_t seed, const EvaluationSettings& settings = {},
                                   const ProgressCallback& progress = {}) {
  cfg.validate();
  opt.validate();
  EvaluationSettings es = settings;
  es.dc_seed = derive_seed(seed, {fnv1a("dc")});
  AdaptiveResult result;
  result.aims = initial_aim_state(protocol);
  const auto tree = moea::build_linkage_tree(c);

  PlanEvaluator low(c, protocol, result.aims, detail::evaluator_options(ObjectiveMode::full, cfg.n_dc_min, es));
  moea::OptimizerConfig low_cfg = opt;
  low_cfg.seed = derive_seed(seed, {fnv1a("low")});
  moea::OptimizerState st = moea::init_state(low_cfg, low, tree);
  for (;;) {
    ++result.rounds;
    moea::run_generations(st, low, cfg.g_min);
    if (progress) progress("round " + std::to_string(result.rounds), st);
    const auto& s_star = select_best_balanced(st.archive).solution;
    auto records = adjust_round(protocol, result.aims, s_star.dvi_values, s_star.objectives, static_cast<int>(result.rounds), cfg.min_steps);
    if (records.empty()) {
      result.last_s_star_dvis = s_star.dvi_values;
      break;
    }
    result.audit.insert(result.audit.end(), records.begin(), records.end());
    low.set_aim_state(result.aims);
    moea::recompute_objectives(st, low);
  }
  result.low_generations = st.generation;
  result.low_best_lci_trace = st.best_lci_trace;

  PlanEvaluator high(c, protocol, result.aims, detail::evaluator_options(ObjectiveMode::full, cfg.n_dc_max, es));
  moea::OptimizerConfig high_cfg = opt;
  high_cfg.seed = derive_seed(seed, {fnv1a("high")});
  result.final_state = moea::init_state(high_cfg, high, tree);
  moea::run_generations(result.final_state, high, cfg.g_max);
  result.embrace_reached = detail::archive_meets_embrace(result.final_state.archive, protocol);
  if (cfg.embrace_stop && !result.embrace_reached) {
    // Without success the archive from the regular budget is presented.
    moea::OptimizerState extended = result.final_state;
    for (std::size_t k = 0; k < cfg.embrace_extra_chunks; ++k) {
      moea::run_generations(extended, high, cfg.g_min);
      if (detail::archive_meets_embrace(extended.archive, protocol)) {
        result.final_state = std::move(extended);
        result.embrace_reached = true;
        break;
      }
    }
  }
  if (progress) progress("final", result.final_state);
  result.reevaluated = eval::reevaluate_front(result.final_state.archive, eval::reevaluation_evaluator(c, high, cfg.n_dc_reeval));
  detail::drop_dose_caches(result.final_state);
  return result;
}

}  // namespace dwellopt

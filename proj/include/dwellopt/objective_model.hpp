#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dwellopt/dvi.hpp"
#include "dwellopt/error.hpp"
#include "dwellopt/patient_model.hpp"

namespace dwellopt {

enum class AimGroup { coverage, sparing };
enum class AimProtocol { embrace, added };
enum class ObjectiveMode { embrace_only, full };

constexpr std::string_view to_string(AimGroup g) { return g == AimGroup::coverage ? "coverage" : "sparing"; }
constexpr std::string_view to_string(AimProtocol p) { return p == AimProtocol::embrace ? "embrace" : "added"; }

/// One clinical aim: a DVI with a direction and aspiration value(s).
/// Adjustable aims start at `aspiration_strict` and may be relaxed towards
/// `aspiration_loose`.
struct AimSpec {
  std::string id;
  DviSpec dvi;
  AimGroup group = AimGroup::coverage;
  AimProtocol protocol = AimProtocol::embrace;
  int priority = 1;
  double aspiration_strict = 0.0;
  double aspiration_loose = 0.0;
  bool adjustable = false;

  friend bool operator==(const AimSpec&, const AimSpec&) = default;
};

struct ProtocolConfig {
  std::vector<AimSpec> aims;
  double prescribed_dose_gy = 7.0;

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < aims.size(); ++i)
      if (aims[i].id == id) return i;
    throw ContractError("protocol has no aim '" + std::string(id) + "'");
  }
};

inline void validate(const AimSpec& a) {
  if (a.id.empty()) throw ValidationError("aim: empty id");
  const auto where = "aim " + a.id + ": ";
  if (a.protocol == AimProtocol::embrace) {
    if (a.priority != 1) throw ValidationError(where + "embrace aims have priority 1");
    if (a.adjustable) throw ValidationError(where + "embrace aims are not adjustable");
    if (a.aspiration_loose != a.aspiration_strict) throw ValidationError(where + "embrace aims have a single aspiration value");
  } else {
    if (a.priority < 2 || a.priority > 4) throw ValidationError(where + "added aims have priority 2, 3 or 4");
    if (!a.adjustable) throw ValidationError(where + "added aims are adjustable");
  }
  if (a.dvi.direction == Direction::maximize && a.aspiration_loose > a.aspiration_strict)
    throw ValidationError(where + "loose aspiration must not exceed strict for a maximized index");
  if (a.dvi.direction == Direction::minimize && a.aspiration_loose < a.aspiration_strict)
    throw ValidationError(where + "loose aspiration must not be below strict for a minimized index");
  if ((a.group == AimGroup::coverage) != (a.dvi.direction == Direction::maximize))
    throw ValidationError(where + "coverage aims maximize, sparing aims minimize");
  if (a.dvi.kind == DviKind::V_d && !(a.dvi.param > 0.0)) throw ValidationError(where + "V_d dose level must be positive");
  if (a.dvi.kind == DviKind::D_v && !(a.dvi.param > 0.0 && (a.dvi.absolute_volume || a.dvi.param <= 1.0)))
    throw ValidationError(where + "D_v volume must lie in (0, 1] or be a positive absolute volume");
  if (a.dvi.kind == DviKind::D_point && a.dvi.point.empty()) throw ValidationError(where + "D_point needs a reference point");
}

/// Checks the protocol itself and, when given, that every referenced ROI and
/// reference point exists in the case.
inline void validate(const ProtocolConfig& p, const PatientCase* c = nullptr) {
  if (!(p.prescribed_dose_gy > 0.0)) throw ValidationError("protocol: prescribed_dose_gy must be positive");
  std::vector<std::string> ids;
  for (const auto& a : p.aims) {
    validate(a);
    if (std::find(ids.begin(), ids.end(), a.id) != ids.end()) throw ValidationError("protocol: duplicate aim id " + a.id);
    ids.push_back(a.id);
    if (c) {
      if (a.dvi.kind == DviKind::D_point) {
        if (!c->find_point(a.dvi.point)) throw ValidationError("protocol: aim " + a.id + " references missing point " + a.dvi.point);
      } else if (!c->find_roi(a.dvi.roi)) {
        throw ValidationError("protocol: aim " + a.id + " references missing ROI " + std::string(to_string(a.dvi.roi)));
      }
    }
  }
}

namespace detail {

inline AimSpec embrace(std::string id, AimGroup g, DviSpec dvi, double aspiration) {
  return {std::move(id), std::move(dvi), g, AimProtocol::embrace, 1, aspiration, aspiration, false};
}

inline AimSpec added(std::string id, AimGroup g, DviSpec dvi, int priority, double strict, double loose) {
  return {std::move(id), std::move(dvi), g, AimProtocol::added, priority, strict, loose, true};
}

inline DviSpec d_v(RoiName roi, double v, Direction dir, bool absolute = false) {
  return {DviKind::D_v, roi, {}, v, absolute, dir};
}

inline DviSpec v_d(RoiName roi, double d, Direction dir) { return {DviKind::V_d, roi, {}, d, false, dir}; }

}  // namespace detail

/// EMBRACE II aims followed by the added aims, in objective term order.
inline ProtocolConfig default_protocol(double prescribed_dose_gy = 7.0) {
  using detail::added;
  using detail::d_v;
  using detail::embrace;
  using detail::v_d;
  constexpr auto max = Direction::maximize;
  constexpr auto min = Direction::minimize;
  constexpr auto cov = AimGroup::coverage;
  constexpr auto spa = AimGroup::sparing;
  ProtocolConfig p;
  p.prescribed_dose_gy = prescribed_dose_gy;
  p.aims = {
      embrace("CTV_HR_D90_min", cov, d_v(RoiName::CTV_HR, 0.90, max), 111.0),
      embrace("CTV_HR_D98", cov, d_v(RoiName::CTV_HR, 0.98, max), 83.0),
      embrace("GTV_RES_D98", cov, d_v(RoiName::GTV_RES, 0.98, max), 119.0),
      embrace("CTV_IR_D98", cov, d_v(RoiName::CTV_IR, 0.98, max), 50.0),
      added("CTV_HR_V100", cov, v_d(RoiName::CTV_HR, 100.0, max), 2, 99.9, 90.0),
      added("CTV_IR_V50", cov, v_d(RoiName::CTV_IR, 50.0, max), 3, 99.9, 90.0),
      embrace("CTV_HR_D90_max", spa, d_v(RoiName::CTV_HR, 0.90, min), 119.0),
      embrace("bladder_D2cc", spa, d_v(RoiName::bladder, 2.0, min, true), 78.0),
      embrace("rectum_D2cc", spa, d_v(RoiName::rectum, 2.0, min, true), 56.0),
      embrace("ICRU_rectovaginal", spa, DviSpec{DviKind::D_point, RoiName::CTV_HR, std::string(kIcruRectovaginal), 0.0, false, min}, 56.0),
      embrace("sigmoid_D2cc", spa, d_v(RoiName::sigmoid, 2.0, min, true), 64.0),
      embrace("bowel_D2cc", spa, d_v(RoiName::bowel, 2.0, min, true), 64.0),
      added("mid_CTV_IR_V100", spa, v_d(RoiName::mid_CTV_IR, 100.0, min), 3, 25.0, 35.0),
      added("mid_normal_tissue_V100", spa, v_d(RoiName::mid_normal_tissue, 100.0, min), 4, 0.1, 1.5),
      added("top_normal_tissue_V100", spa, v_d(RoiName::top_normal_tissue, 100.0, min), 4, 0.2, 7.0),
  };
  return p;
}

/// Live adjustment state, one entry per protocol aim (fixed aims keep their
/// strict aspiration and are never touched).
struct AimStateEntry {
  double current_aspiration = 0.0;
  bool eliminated = false;
  int steps_taken = 0;
  friend bool operator==(const AimStateEntry&, const AimStateEntry&) = default;
};

struct AimState {
  std::vector<AimStateEntry> entries;
  friend bool operator==(const AimState&, const AimState&) = default;
};

inline AimState initial_aim_state(const ProtocolConfig& p) {
  AimState s;
  for (const auto& a : p.aims) s.entries.push_back({a.aspiration_strict, false, 0});
  return s;
}

// Whether an aim contributes to the objectives under the given mode and state.
inline bool is_active(const AimSpec& a, const AimStateEntry& e, ObjectiveMode mode) {
  if (a.protocol == AimProtocol::added && mode == ObjectiveMode::embrace_only) return false;
  return !e.eliminated;
}

/// Signed margin: positive when the aim is met.
inline double delta(const AimSpec& aim, const AimStateEntry& state, double value) {
  if (state.eliminated) throw ContractError("delta: aim " + aim.id + " is eliminated");
  const double aspiration = aim.adjustable ? state.current_aspiration : aim.aspiration_strict;
  return aim.dvi.direction == Direction::maximize ? value - aspiration : aspiration - value;
}

/// Weights 10^rank where rank 0 is the largest (least violated) margin; equal
/// margins are ranked in input order. Normalized to sum to one.
inline std::vector<double> compute_weights(std::span<const double> deltas) {
  const std::size_t n = deltas.size();
  if (n == 0) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] > deltas[b]; });
  std::vector<double> w(n);
  double scale = 1.0, total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    w[order[r]] = scale;
    total += scale;
    scale *= 10.0;
  }
  for (auto& x : w) x /= total;
  return w;
}

// Weighted worst-case sum of one group's margins.
inline double weighted_index(std::span<const double> deltas) {
  const auto w = compute_weights(deltas);
  double sum = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) sum += w[i] * deltas[i];
  return sum;
}

/// Objective pair. `lci` and `lsi` already include the soft-constraint
/// deduction alpha * constraint; `constraint` is the unscaled magnitude.
struct ObjectivePair {
  double lci = 0.0;
  double lsi = 0.0;
  double constraint = 0.0;
  friend bool operator==(const ObjectivePair&, const ObjectivePair&) = default;
};

/// LCI and LSI from per-aim DVI values (parallel to protocol.aims). Entries for
/// inactive aims are ignored.
inline ObjectivePair compute_objectives(std::span<const double> dvi_values, const ProtocolConfig& protocol, const AimState& state,
                                        ObjectiveMode mode) {
  if (dvi_values.size() != protocol.aims.size() || state.entries.size() != protocol.aims.size())
    throw ContractError("compute_objectives: value and state lists must match the protocol");
  std::array<double, 32> buf_c{}, buf_s{};
  std::vector<double> heap_c, heap_s;
  std::size_t nc = 0, ns = 0;
  const bool small = protocol.aims.size() <= buf_c.size();
  if (!small) {
    heap_c.resize(protocol.aims.size());
    heap_s.resize(protocol.aims.size());
  }
  double* cov = small ? buf_c.data() : heap_c.data();
  double* spa = small ? buf_s.data() : heap_s.data();
  for (std::size_t i = 0; i < protocol.aims.size(); ++i) {
    const auto& aim = protocol.aims[i];
    if (!is_active(aim, state.entries[i], mode)) continue;
    if (!std::isfinite(dvi_values[i])) throw ContractError("compute_objectives: missing value for aim " + aim.id);
    const double d = delta(aim, state.entries[i], dvi_values[i]);
    if (aim.group == AimGroup::coverage)
      cov[nc++] = d;
    else
      spa[ns++] = d;
  }
  return {weighted_index({cov, nc}), weighted_index({spa, ns}), 0.0};
}

/// Margins of the active aims, NaN for inactive ones.
inline std::vector<double> aim_deltas(std::span<const double> dvi_values, const ProtocolConfig& protocol, const AimState& state,
                                      ObjectiveMode mode) {
  std::vector<double> out(protocol.aims.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < protocol.aims.size(); ++i)
    if (is_active(protocol.aims[i], state.entries[i], mode)) out[i] = delta(protocol.aims[i], state.entries[i], dvi_values[i]);
  return out;
}

/// True iff every given margin is strictly positive; NaN entries (inactive
/// aims) are skipped.
inline bool all_aims_met(std::span<const double> deltas) {
  for (double d : deltas)
    if (!std::isnan(d) && !(d > 0.0)) return false;
  return true;
}

/// Every EMBRACE aim strictly met at its fixed aspiration.
inline bool embrace_satisfied(std::span<const double> dvi_values, const ProtocolConfig& protocol) {
  for (std::size_t i = 0; i < protocol.aims.size(); ++i) {
    const auto& aim = protocol.aims[i];
    if (aim.protocol != AimProtocol::embrace) continue;
    if (!(delta(aim, {aim.aspiration_strict, false, 0}, dvi_values[i]) > 0.0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Constraints

struct ConstraintConfig {
  double dtmr_alpha = 0.01;
  double dtmr_numerator = 2.0;
  double dtmr_offset = 5.0;
  double cr_single = 0.20;
  double cr_total = 0.30;
  double ratio_floor = 0.01;  // seconds

  void validate() const {
    if (!(dtmr_alpha > 0 && dtmr_numerator > 0 && dtmr_offset > 0 && cr_single > 0 && cr_total > 0 && ratio_floor > 0))
      throw ConfigError("constraint config: all parameters must be positive");
    if (cr_single > cr_total) throw ConfigError("constraint config: cr_single must not exceed cr_total");
  }

  // Allowed relative deviation between neighbouring dwell times.
  double modulation_limit(double t) const { return dtmr_numerator / (dtmr_offset + t); }
};

inline constexpr std::size_t kNoNeighbor = std::numeric_limits<std::size_t>::max();

/// Nearest dwell (Euclidean) within the same channel, lowest index on ties;
/// kNoNeighbor for single-dwell channels.
inline std::vector<std::size_t> nearest_neighbor_map(const PatientCase& c) {
  std::vector<std::size_t> out(c.n_dwells(), kNoNeighbor);
  for (std::size_t i = 0; i < c.n_dwells(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.n_dwells(); ++j) {
      if (j == i || c.dwell_positions[j].channel_id != c.dwell_positions[i].channel_id) continue;
      const double d = distance(c.dwell_positions[i].position, c.dwell_positions[j].position);
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

/// Dwell-time modulation penalty. A dwell violates the restriction when the
/// ratio r = t_hi / t_lo of its time and its neighbour's satisfies
/// r - 1 > f(t_lo); it then contributes (r - f(t_lo)) / n_dwells.
inline double dtmr_penalty(std::span<const double> plan, std::span<const std::size_t> neighbors, const ConstraintConfig& cfg) {
  const std::size_t n = plan.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = neighbors[i];
    if (j == kNoNeighbor) continue;
    const double lo = std::max(std::min(plan[i], plan[j]), cfg.ratio_floor);
    const double hi = std::max(plan[i], plan[j]);
    const double ratio = hi / lo;
    const double f = cfg.modulation_limit(lo);
    if (ratio - 1.0 > f) total += (ratio - f) / static_cast<double>(n);
  }
  return total;
}

inline ObjectivePair apply_soft_constraint(ObjectivePair p, double constraint, const ConstraintConfig& cfg) {
  p.constraint = constraint;
  p.lci -= cfg.dtmr_alpha * constraint;
  p.lsi -= cfg.dtmr_alpha * constraint;
  return p;
}

/// Catheter contribution restriction on needle channels (given as dwell index
/// groups). A plan with zero total time is feasible.
inline bool check_catheter_contribution(std::span<const double> plan, const std::vector<std::vector<std::size_t>>& needle_groups,
                                        const ConstraintConfig& cfg) {
  if (needle_groups.empty()) return true;
  double total = 0.0;
  for (double t : plan) total += t;
  if (total <= 0.0) return true;
  double needles = 0.0;
  for (const auto& g : needle_groups) {
    double s = 0.0;
    for (std::size_t j : g) s += plan[j];
    if (s > cfg.cr_single * total) return false;
    needles += s;
  }
  return needles <= cfg.cr_total * total;
}

inline bool check_catheter_contribution(std::span<const double> plan, const PatientCase& c, const ConstraintConfig& cfg) {
  return check_catheter_contribution(plan, c.needle_groups(), cfg);
}

}  // namespace dwellopt

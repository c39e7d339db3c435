#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dwellopt/dose_engine.hpp"
#include "dwellopt/dvi.hpp"
#include "dwellopt/objective_model.hpp"
#include "dwellopt/patient_model.hpp"

namespace dwellopt {

/// A dwell-time plan with its cached evaluation state. `dose` holds one vector
/// per evaluator ROI slot and may be empty for archived copies.
struct Solution {
  std::vector<double> dwell_times;
  std::vector<Eigen::VectorXd> dose;
  std::vector<double> dvi_values;  // parallel to protocol aims, NaN when not evaluated
  ObjectivePair objectives;
  bool cr_feasible = true;

  // Copy without the per-point dose cache.
  Solution summary() const {
    Solution s;
    s.dwell_times = dwell_times;
    s.dvi_values = dvi_values;
    s.objectives = objectives;
    s.cr_feasible = cr_feasible;
    return s;
  }
};

/// Everything needed to turn dwell times into DVIs and objectives at one
/// fidelity (number of DC points per ROI). Dose-rate matrices are built once
/// and shared read-only.
class PlanEvaluator {
 public:
  struct Options {
    ObjectiveMode mode = ObjectiveMode::full;
    std::size_t n_dc_points = 2500;
    std::uint64_t dc_seed = 1;
    DoseKernelConfig kernel;
    ConstraintConfig constraints;
    // Evaluate every protocol aim, including those inactive in `mode`.
    bool evaluate_all_aims = false;
  };

  PlanEvaluator(const PatientCase& c, ProtocolConfig protocol, AimState state, Options options)
      : protocol_(std::move(protocol)), state_(std::move(state)), options_(options) {
    validate(protocol_, &c);
    options_.kernel.validate();
    options_.constraints.validate();
    if (state_.entries.size() != protocol_.aims.size()) throw ContractError("PlanEvaluator: aim state does not match protocol");
    n_dwells_ = c.n_dwells();
    neighbors_ = nearest_neighbor_map(c);
    needle_groups_ = c.needle_groups();

    bindings_.resize(protocol_.aims.size());
    for (std::size_t i = 0; i < protocol_.aims.size(); ++i) {
      const auto& aim = protocol_.aims[i];
      if (!options_.evaluate_all_aims && options_.mode == ObjectiveMode::embrace_only && aim.protocol == AimProtocol::added) continue;
      Binding& b = bindings_[i];
      if (aim.dvi.kind == DviKind::D_point) {
        b.point = static_cast<int>(point_rows_.size());
        point_rows_.push_back(point_dose_rates(c, c.find_point(aim.dvi.point)->position, options_.kernel));
        continue;
      }
      auto it = std::find(rois_.begin(), rois_.end(), aim.dvi.roi);
      if (it == rois_.end()) {
        const DCPointSet dc = sample_dc_points(c, aim.dvi.roi, options_.n_dc_points, derive_seed(options_.dc_seed, {options_.n_dc_points}));
        matrices_.push_back(std::make_shared<const DoseRateMatrix>(build_dose_rate_matrix(c, dc, options_.kernel)));
        rois_.push_back(aim.dvi.roi);
        it = rois_.end() - 1;
      }
      b.slot = static_cast<int>(it - rois_.begin());
      if (aim.dvi.kind == DviKind::D_v) b.fraction = resolved_fraction(aim.dvi, c.roi(aim.dvi.roi).volume_cm3);
    }
    for (std::size_t i = 0; i < bindings_.size(); ++i) {
      const auto& di = protocol_.aims[i].dvi;
      for (std::size_t j = 0; j < i && bindings_[i].slot >= 0; ++j) {
        const auto& dj = protocol_.aims[j].dvi;
        if (bindings_[j].slot == bindings_[i].slot && bindings_[j].same_as < 0 && dj.kind == di.kind && dj.param == di.param &&
            dj.absolute_volume == di.absolute_volume) {
          bindings_[i].same_as = static_cast<int>(j);
          break;
        }
      }
    }
  }

  const ProtocolConfig& protocol() const { return protocol_; }
  const AimState& aim_state() const { return state_; }
  void set_aim_state(AimState s) {
    if (s.entries.size() != protocol_.aims.size()) throw ContractError("set_aim_state: size mismatch");
    state_ = std::move(s);
  }
  const Options& options() const { return options_; }
  ObjectiveMode mode() const { return options_.mode; }
  std::size_t n_dwells() const { return n_dwells_; }
  const std::vector<RoiName>& rois() const { return rois_; }
  const DoseRateMatrix& matrix(std::size_t slot) const { return *matrices_[slot]; }
  const std::vector<std::vector<std::size_t>>& needle_groups() const { return needle_groups_; }
  const std::vector<std::size_t>& neighbors() const { return neighbors_; }

  bool cr_feasible(std::span<const double> plan) const {
    return check_catheter_contribution(plan, needle_groups_, options_.constraints);
  }

  /// Full (re)evaluation from the dwell times.
  void evaluate(Solution& s) const {
    check_dwell_times(s.dwell_times, n_dwells_);
    s.dose.resize(rois_.size());
    const auto t = as_eigen(s.dwell_times);
    for (std::size_t k = 0; k < rois_.size(); ++k) s.dose[k].noalias() = matrices_[k]->entries * t;
    finish(s);
  }

  /// Incremental evaluation after the dwells in `changed` moved from
  /// `old_times` to their current values in s.dwell_times.
  void evaluate_partial(Solution& s, std::span<const std::size_t> changed, std::span<const double> old_times) const {
    for (std::size_t k = 0; k < rois_.size(); ++k) {
      auto& dose = s.dose[k];
      const auto& m = matrices_[k]->entries;
      for (std::size_t c = 0; c < changed.size(); ++c) {
        const double d = s.dwell_times[changed[c]] - old_times[c];
        if (d != 0.0) dose.noalias() += d * m.col(static_cast<Eigen::Index>(changed[c]));
      }
    }
    finish(s);
  }

  /// Recomputes only the objectives from cached DVI values (used after an
  /// aspiration change).
  void refresh_objectives(Solution& s) const {
    const double cons = dtmr_penalty(s.dwell_times, neighbors_, options_.constraints);
    s.objectives = apply_soft_constraint(compute_objectives(s.dvi_values, protocol_, state_, options_.mode), cons, options_.constraints);
  }

  Solution make_solution(std::vector<double> times) const {
    Solution s;
    s.dwell_times = std::move(times);
    evaluate(s);
    return s;
  }

 private:
  struct Binding {
    int slot = -1;
    int point = -1;
    double fraction = 0.0;
    int same_as = -1;  // earlier aim with an identical index, reused
  };

  void finish(Solution& s) const {
    s.dvi_values.assign(protocol_.aims.size(), std::numeric_limits<double>::quiet_NaN());
    const auto t = as_eigen(s.dwell_times);
    for (std::size_t i = 0; i < protocol_.aims.size(); ++i) {
      const Binding& b = bindings_[i];
      const auto& dvi = protocol_.aims[i].dvi;
      if (b.same_as >= 0) {
        s.dvi_values[i] = s.dvi_values[static_cast<std::size_t>(b.same_as)];
      } else if (b.point >= 0) {
        s.dvi_values[i] = point_rows_[static_cast<std::size_t>(b.point)].dot(t);
      } else if (b.slot >= 0) {
        const auto& dose = s.dose[static_cast<std::size_t>(b.slot)];
        const std::span<const double> values{dose.data(), static_cast<std::size_t>(dose.size())};
        s.dvi_values[i] = dvi.kind == DviKind::V_d ? compute_v_d(values, dvi.param) : compute_d_v(values, b.fraction);
      }
    }
    s.cr_feasible = cr_feasible(s.dwell_times);
    refresh_objectives(s);
  }

  ProtocolConfig protocol_;
  AimState state_;
  Options options_;
  std::size_t n_dwells_ = 0;
  std::vector<std::size_t> neighbors_;
  std::vector<std::vector<std::size_t>> needle_groups_;
  std::vector<RoiName> rois_;
  std::vector<std::shared_ptr<const DoseRateMatrix>> matrices_;
  std::vector<Eigen::RowVectorXd> point_rows_;
  std::vector<Binding> bindings_;
};

}  // namespace dwellopt

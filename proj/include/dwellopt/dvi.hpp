#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dwellopt/dose_engine.hpp"
#include "dwellopt/error.hpp"

namespace dwellopt {

enum class DviKind { V_d, D_v, D_point };
enum class Direction { maximize, minimize };

constexpr std::string_view to_string(DviKind k) {
  switch (k) {
    case DviKind::V_d: return "V_d";
    case DviKind::D_v: return "D_v";
    case DviKind::D_point: return "D_point";
  }
  return "?";
}

constexpr std::string_view to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

/// A dose-volume index definition.
///   V_d:     `param` is the dose level d in % of prescription.
///   D_v:     `param` is a volume fraction in (0, 1], or an absolute volume in
///            cm^3 when `absolute_volume` is set.
///   D_point: `point` names a reference point; `param` is unused.
struct DviSpec {
  DviKind kind = DviKind::V_d;
  RoiName roi = RoiName::CTV_HR;
  std::string point;
  double param = 0.0;
  bool absolute_volume = false;
  Direction direction = Direction::maximize;

  friend bool operator==(const DviSpec&, const DviSpec&) = default;
};

/// Percentage of points receiving at least `d` percent.
inline double compute_v_d(std::span<const double> dose, double d) {
  if (dose.empty()) throw ContractError("compute_v_d: empty dose vector");
  std::size_t count = 0;
  for (double x : dose) count += (x >= d) ? 1 : 0;
  return 100.0 * static_cast<double>(count) / static_cast<double>(dose.size());
}

/// Minimum dose within the most irradiated fraction `v` of the points: the
/// descending order statistic at 0-based index ceil(v n) - 1.
inline double compute_d_v(std::span<const double> dose, double v) {
  if (!(v > 0.0 && v <= 1.0)) throw ContractError("compute_d_v: volume fraction must lie in (0, 1]");
  if (dose.empty()) throw ContractError("compute_d_v: empty dose vector");
  const std::size_t n = dose.size();
  const auto m = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(v * static_cast<double>(n))), 1, n);

  thread_local std::vector<double> scratch;
  scratch.assign(dose.begin(), dose.end());
  const auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(m - 1);
  std::nth_element(scratch.begin(), nth, scratch.end(), std::greater<>{});
  return *nth;
}

inline double absolute_to_fraction(double v_cm3, double roi_volume_cm3) {
  if (!(roi_volume_cm3 > 0.0)) throw ContractError("absolute_to_fraction: ROI volume must be positive");
  if (!(v_cm3 > 0.0)) throw ContractError("absolute_to_fraction: volume must be positive");
  return std::min(1.0, v_cm3 / roi_volume_cm3);
}

/// Dose (% of prescription) at a named reference point.
inline double compute_d_point(const PatientCase& c, std::span<const double> plan, std::string_view point_name,
                              const DoseKernelConfig& kernel) {
  const ReferencePoint* rp = c.find_point(point_name);
  if (!rp) throw ContractError("compute_d_point: unknown reference point '" + std::string(point_name) + "'");
  check_dwell_times(plan, c.n_dwells());
  return point_dose_rates(c, rp->position, kernel).dot(as_eigen(plan));
}

// Volume fraction used by a D_v index once absolute volumes are resolved.
inline double resolved_fraction(const DviSpec& spec, double roi_volume_cm3) {
  return spec.absolute_volume ? absolute_to_fraction(spec.param, roi_volume_cm3) : spec.param;
}

// Evaluates a V_d or D_v index on a dose vector.
inline double evaluate_volume_dvi(const DviSpec& spec, std::span<const double> dose, double roi_volume_cm3) {
  switch (spec.kind) {
    case DviKind::V_d: return compute_v_d(dose, spec.param);
    case DviKind::D_v: return compute_d_v(dose, resolved_fraction(spec, roi_volume_cm3));
    case DviKind::D_point: break;
  }
  throw ContractError("evaluate_volume_dvi: D_point needs a reference point, not a dose vector");
}

}  // namespace dwellopt

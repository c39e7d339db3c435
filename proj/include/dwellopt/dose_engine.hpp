#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dwellopt/error.hpp"
#include "dwellopt/patient_model.hpp"

namespace dwellopt {

/// Point-source kernel: dose rate falls off with the inverse square of the
/// distance, with unit radial dose function and unit anisotropy.
struct DoseKernelConfig {
  // Dose rate (Gy/s) at the reference distance for one second of dwell time.
  double dose_rate_constant = 0.125;
  double reference_distance_mm = 10.0;
  // Distances below this are clamped.
  double min_distance_mm = 1.0;

  void validate() const {
    if (!(dose_rate_constant > 0.0) || !(reference_distance_mm > 0.0) || !(min_distance_mm > 0.0))
      throw ConfigError("dose kernel: all parameters must be positive");
  }

  // Kernel constant expressed in % of the prescribed dose per second.
  double percent_constant(double prescribed_dose_gy) const { return 100.0 * dose_rate_constant / prescribed_dose_gy; }

  // Dose rate in % of prescription per second at distance r (mm).
  double rate(double r, double prescribed_dose_gy) const {
    const double q = reference_distance_mm / std::max(r, min_distance_mm);
    return percent_constant(prescribed_dose_gy) * q * q;
  }
};

/// Dense [n_points x n_dwells] dose-rate matrix in % of prescription per second.
/// Column-major storage makes the per-dwell update a contiguous axpy.
struct DoseRateMatrix {
  RoiName roi_name = RoiName::CTV_HR;
  Eigen::MatrixXd entries;

  std::size_t n_points() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t n_dwells() const { return static_cast<std::size_t>(entries.cols()); }
};

/// Dose per DC point in % of prescription.
struct DoseVector {
  RoiName roi_name = RoiName::CTV_HR;
  Eigen::VectorXd doses;

  std::span<const double> values() const { return {doses.data(), static_cast<std::size_t>(doses.size())}; }
};

inline DoseRateMatrix build_dose_rate_matrix(const PatientCase& c, std::span<const Vec3> points, RoiName roi,
                                             const DoseKernelConfig& kernel) {
  kernel.validate();
  DoseRateMatrix m{roi, Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(c.n_dwells()))};
  for (std::size_t j = 0; j < c.n_dwells(); ++j) {
    const Vec3 src = c.dwell_positions[j].position;
    for (std::size_t i = 0; i < points.size(); ++i)
      m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel.rate(distance(points[i], src), c.prescribed_dose_gy);
  }
  return m;
}

inline DoseRateMatrix build_dose_rate_matrix(const PatientCase& c, const DCPointSet& dc, const DoseKernelConfig& kernel) {
  return build_dose_rate_matrix(c, dc.points, dc.roi_name, kernel);
}

inline void check_dwell_times(std::span<const double> times, std::size_t n_dwells) {
  if (times.size() != n_dwells)
    throw ContractError("dwell time vector has " + std::to_string(times.size()) + " entries, expected " + std::to_string(n_dwells));
  for (double t : times)
    if (!(t >= 0.0)) throw ContractError("dwell times must be non-negative and finite");
}

inline Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline DoseVector compute_dose(const DoseRateMatrix& m, std::span<const double> dwell_times) {
  check_dwell_times(dwell_times, m.n_dwells());
  return {m.roi_name, m.entries * as_eigen(dwell_times)};
}

/// dose += sum over `changed` of (new_j - old_j) * column j.
inline void partial_update_dose_inplace(DoseVector& dose, const DoseRateMatrix& m, std::span<const std::size_t> changed,
                                        std::span<const double> old_times, std::span<const double> new_times) {
  for (std::size_t j : changed) {
    if (j >= m.n_dwells() || j >= old_times.size() || j >= new_times.size())
      throw ContractError("partial_update_dose: dwell index " + std::to_string(j) + " out of range");
    const double delta = new_times[j] - old_times[j];
    if (delta != 0.0) dose.doses.noalias() += delta * m.entries.col(static_cast<Eigen::Index>(j));
  }
}

inline DoseVector partial_update_dose(DoseVector dose, const DoseRateMatrix& m, std::span<const std::size_t> changed,
                                      std::span<const double> old_times, std::span<const double> new_times) {
  partial_update_dose_inplace(dose, m, changed, old_times, new_times);
  return dose;
}

// One row of dose rates for a single location.
inline Eigen::RowVectorXd point_dose_rates(const PatientCase& c, Vec3 location, const DoseKernelConfig& kernel) {
  kernel.validate();
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(c.n_dwells()));
  for (std::size_t j = 0; j < c.n_dwells(); ++j)
    row(static_cast<Eigen::Index>(j)) = kernel.rate(distance(location, c.dwell_positions[j].position), c.prescribed_dose_gy);
  return row;
}

}  // namespace dwellopt

#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "dwellopt/error.hpp"

namespace dwellopt::eval {

/// Convergence test on a per-generation best-LCI trace. The reference value
/// defaults to the last trace entry (the trace is assumed to span the
/// reference budget); `reference` overrides it, e.g. with a wall-clock run.
struct ConvergenceCriteria {
  double ratio_threshold = 0.99;
  double plateau_epsilon = 1e-4;
  std::size_t plateau_window = 20;
  std::optional<double> reference;

  void validate() const {
    if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) throw ConfigError("convergence: ratio_threshold must lie in (0, 1)");
    if (plateau_window < 1) throw ConfigError("convergence: plateau_window must be at least 1");
    if (!(plateau_epsilon > 0.0)) throw ConfigError("convergence: plateau_epsilon must be positive");
  }
};

/// First 1-based generation g whose gain over generation 1 exceeds the ratio
/// threshold of the reference gain and after which the next plateau_window
/// generations each change by less than plateau_epsilon. A trace with no gain
/// converges at generation 1.
inline std::optional<std::size_t> detect_convergence(std::span<const double> trace, const ConvergenceCriteria& c = {}) {
  c.validate();
  if (trace.size() < 2) throw ContractError("detect_convergence: trace needs at least two generations");
  const double first = trace.front();
  const double ref = c.reference.value_or(trace.back());
  const double gain = ref - first;
  if (gain == 0.0) return 1;
  // Length of the run of small changes starting right after each generation.
  const std::size_t n = trace.size();
  std::size_t calm = 0;  // small steps following generation g (counted backwards)
  std::optional<std::size_t> found;
  for (std::size_t g = n; g-- > 0;) {
    if (g + 1 < n) calm = std::abs(trace[g + 1] - trace[g]) < c.plateau_epsilon ? calm + 1 : 0;
    if ((trace[g] - first) / gain > c.ratio_threshold && calm >= c.plateau_window) found = g + 1;
  }
  return found;
}

}  // namespace dwellopt::eval

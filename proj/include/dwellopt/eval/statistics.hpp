#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "dwellopt/error.hpp"

namespace dwellopt::eval {

struct StatTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_effective = 0;
  double z = 0.0;      // Wilcoxon only
  double sigma = 0.0;  // Wilcoxon only
  bool reject = false; // p_value <= alpha (uncorrected)
};

// Upper tail of the standard normal.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Inverse standard normal CDF (Wichura's PPND16, about 1e-16 relative).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("normal_quantile: p must lie in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r + 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r + 4.2313330701600911252e+1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r + 4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r + 2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r + 5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace detail {

// c[0] + c[1] x + ... + c[n-1] x^(n-1)
inline double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

}  // namespace detail

/// Shapiro-Wilk W test using Royston's coefficient and p-value
/// approximations. Throws for n outside [3, 5000] or a zero-range sample.
inline StatTestResult shapiro_wilk(std::span<const double> sample, double alpha = 0.05) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) throw ContractError("shapiro_wilk: sample size must lie in [3, 5000]");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double median = n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
  for (auto& v : x) v -= median;
  const double range = x.back() - x.front();
  if (!(range >= 1e-19)) throw ValidationError("shapiro_wilk: sample has zero range, W is undefined");

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(half + 1);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(half + 1);
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = detail::poly(c1, rsn) - m[1] / ssumm2;
    std::size_t first = 2;
    double fac = 0.0;
    if (n > 5) {
      first = 3;
      const double a2 = -m[2] / ssumm2 + detail::poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = first; i <= half; ++i) a[i] = -m[i] / fac;
  }

  // Squared correlation between the ordered sample and the coefficients.
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    coef[i] = -a[i + 1];
    coef[n - 1 - i] = a[i + 1];
  }
  double sa = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += coef[i];
    sx += x[i] / range;
  }
  sa /= an;
  sx /= an;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = coef[i] - sa, dx = x[i] / range - sx;
    ssa += da * da;
    ssx += dx * dx;
    sax += da * dx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  StatTestResult r;
  r.statistic = 1.0 - w1;
  r.n_effective = n;

  if (n == 3) {
    r.p_value = std::max(0.0, 6.0 / std::numbers::pi * (std::asin(std::sqrt(r.statistic)) - std::asin(std::sqrt(0.75))));
  } else {
    double y = std::log(w1);
    const double lxx = std::log(an);
    double mean = 0.0, sd = 0.0;
    if (n <= 11) {
      const double gamma = -2.273 + 0.459 * an;
      if (y >= gamma) {
        r.p_value = 1e-99;
        r.reject = true;
        return r;
      }
      y = -std::log(gamma - y);
      static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
      static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
      mean = detail::poly(c3, an);
      sd = std::exp(detail::poly(c4, an));
    } else {
      static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
      static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
      mean = detail::poly(c5, lxx);
      sd = std::exp(detail::poly(c6, lxx));
    }
    r.p_value = normal_sf((y - mean) / sd);
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.reject = r.p_value <= alpha;
  return r;
}

/// Midranks (1-based) of `values`, and the sizes of tied groups.
inline std::vector<double> midranks(std::span<const double> values, std::vector<std::size_t>* tie_sizes = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    if (tie_sizes && j > i) tie_sizes->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

/// Standard deviation of the signed-rank sum under H0, corrected for ties.
inline double signed_rank_sigma(std::size_t n, std::span<const std::size_t> tie_sizes) {
  const double dn = static_cast<double>(n);
  double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
  for (std::size_t t : tie_sizes) {
    const double dt = static_cast<double>(t);
    var -= (dt * dt * dt - dt) / 48.0;
  }
  return std::sqrt(std::max(var, 0.0));
}

/// Two-sided Wilcoxon signed-rank test by the normal approximation. Zero
/// differences are dropped; the z-score is continuity corrected by 0.5/sigma
/// towards zero. The statistic is min(R+, R-).
inline StatTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05) {
  if (a.size() != b.size()) throw ContractError("wilcoxon_signed_rank: samples must be paired");
  if (a.empty()) throw ContractError("wilcoxon_signed_rank: empty samples");
  std::vector<double> diff, mag;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) {
      diff.push_back(d);
      mag.push_back(std::abs(d));
    }
  }
  StatTestResult r;
  r.n_effective = diff.size();
  if (diff.empty()) {
    r.p_value = 1.0;
    return r;
  }
  std::vector<std::size_t> ties;
  const auto ranks = midranks(mag, &ties);
  double r_plus = 0.0, r_minus = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? r_plus : r_minus) += ranks[i];
  const double n = static_cast<double>(diff.size());
  r.sigma = signed_rank_sigma(diff.size(), ties);
  r.statistic = std::min(r_plus, r_minus);
  if (!(r.sigma > 0.0)) {
    r.p_value = 1.0;
    return r;
  }
  double z = (r_plus - n * (n + 1.0) / 4.0) / r.sigma;
  z -= (z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0)) * 0.5 / r.sigma;
  r.z = z;
  r.p_value = std::clamp(2.0 * normal_sf(std::abs(z)), 0.0, 1.0);
  r.reject = r.p_value <= alpha;
  return r;
}

/// Holm's step-down procedure; decisions are in input order.
inline std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha = 0.05) {
  const std::size_t m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("holm_bonferroni: p-values must lie in [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(p_values[order[i]] <= alpha / static_cast<double>(m - i))) break;
    reject[order[i]] = true;
  }
  return reject;
}

}  // namespace dwellopt::eval

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dwellopt/error.hpp"
#include "dwellopt/objective_model.hpp"

namespace dwellopt::moea {

enum class ClusterRole { extreme_lci, extreme_lsi, middle };

constexpr std::string_view to_string(ClusterRole r) {
  switch (r) {
    case ClusterRole::extreme_lci: return "extreme_lci";
    case ClusterRole::extreme_lsi: return "extreme_lsi";
    case ClusterRole::middle: return "middle";
  }
  return "?";
}

struct Cluster {
  std::vector<std::size_t> members;  // indices into the clustered point list
  ClusterRole role = ClusterRole::middle;
  ObjectivePair mean;  // mean objectives of the members (unnormalized)
};

/// Min-max normalization of an objective cloud; a zero range maps to 0.
struct ObjectiveScale {
  double lo_lci = 0.0, range_lci = 0.0, lo_lsi = 0.0, range_lsi = 0.0;

  static ObjectiveScale fit(std::span<const ObjectivePair> points) {
    ObjectiveScale s;
    if (points.empty()) return s;
    double hi_c = -std::numeric_limits<double>::infinity(), hi_s = hi_c;
    s.lo_lci = s.lo_lsi = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      s.lo_lci = std::min(s.lo_lci, p.lci);
      s.lo_lsi = std::min(s.lo_lsi, p.lsi);
      hi_c = std::max(hi_c, p.lci);
      hi_s = std::max(hi_s, p.lsi);
    }
    s.range_lci = hi_c - s.lo_lci;
    s.range_lsi = hi_s - s.lo_lsi;
    return s;
  }

  bool degenerate() const { return !(range_lci > 0.0) && !(range_lsi > 0.0); }

  double distance(const ObjectivePair& a, const ObjectivePair& b) const {
    const double dc = range_lci > 0.0 ? (a.lci - b.lci) / range_lci : 0.0;
    const double ds = range_lsi > 0.0 ? (a.lsi - b.lsi) / range_lsi : 0.0;
    return std::sqrt(dc * dc + ds * ds);
  }
};

inline std::size_t cluster_size(std::size_t n_points, std::size_t k) {
  return std::min(n_points, (2 * n_points + k - 1) / k);
}

/// Balanced k-leader clustering in normalized objective space. Leaders are the
/// best-LCI point, the best-LSI point, then greedy farthest points. Each cluster
/// takes the cluster_size() points nearest its leader, so clusters overlap.
inline std::vector<Cluster> cluster_selection(std::span<const ObjectivePair> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k == 0) throw ContractError("cluster_selection: k must be positive");
  if (n < k) throw ContractError("cluster_selection: fewer points than clusters");
  const std::size_t size = cluster_size(n, k);
  const ObjectiveScale scale = ObjectiveScale::fit(points);
  std::vector<Cluster> clusters(k);

  if (scale.degenerate()) {
    // All points coincide: contiguous wrap-around blocks.
    const std::size_t stride = (n + k - 1) / k;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < size; ++i) clusters[c].members.push_back((c * stride + i) % n);
  } else {
    std::vector<std::size_t> leaders;
    auto argbest = [&](auto key) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (key(points[i]) > key(points[best])) best = i;
      return best;
    };
    leaders.push_back(argbest([](const ObjectivePair& p) { return p.lci; }));
    if (k >= 2) {
      std::size_t second = argbest([](const ObjectivePair& p) { return p.lsi; });
      if (second == leaders[0]) second = (leaders[0] + 1) % n;
      leaders.push_back(second);
    }
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    auto refresh = [&](std::size_t leader) {
      for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], scale.distance(points[i], points[leader]));
    };
    for (std::size_t l : leaders) refresh(l);
    while (leaders.size() < k) {
      std::size_t far = n;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(leaders.begin(), leaders.end(), i) != leaders.end()) continue;
        if (nearest[i] > best) {
          best = nearest[i];
          far = i;
        }
      }
      leaders.push_back(far);
      refresh(far);
    }
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < k; ++c) {
      std::iota(order.begin(), order.end(), 0);
      const ObjectivePair& lead = points[leaders[c]];
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scale.distance(points[a], lead) < scale.distance(points[b], lead); });
      clusters[c].members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(clusters[c].members.begin(), clusters[c].members.end());
    }
  }

  for (std::size_t c = 0; c < k; ++c) {
    Cluster& cl = clusters[c];
    if (k >= 2 && c == 0) cl.role = ClusterRole::extreme_lci;
    if (k >= 2 && c == 1) cl.role = ClusterRole::extreme_lsi;
    for (std::size_t i : cl.members) {
      cl.mean.lci += points[i].lci;
      cl.mean.lsi += points[i].lsi;
    }
    cl.mean.lci /= static_cast<double>(cl.members.size());
    cl.mean.lsi /= static_cast<double>(cl.members.size());
  }
  return clusters;
}

/// Index of the cluster whose mean objectives are nearest to `p` under `scale`.
inline std::size_t nearest_cluster(const ObjectivePair& p, std::span<const Cluster> clusters, const ObjectiveScale& scale) {
  std::size_t best = 0;
  double d_best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const double d = scale.distance(p, clusters[c].mean);
    if (d < d_best) {
      d_best = d;
      best = c;
    }
  }
  return best;
}

}  // namespace dwellopt::moea

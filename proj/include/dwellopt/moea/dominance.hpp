#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dwellopt/objective_model.hpp"

namespace dwellopt::moea {

// Both objectives are maximized.
inline bool dominates(const ObjectivePair& a, const ObjectivePair& b) {
  return a.lci >= b.lci && a.lsi >= b.lsi && (a.lci > b.lci || a.lsi > b.lsi);
}

/// Front index (0 = non-dominated) for every point.
inline std::vector<int> non_dominated_ranks(std::span<const ObjectivePair> points) {
  const std::size_t n = points.size();
  std::vector<int> rank(n, -1);
  std::vector<int> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> dominates_list(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominates_list[i].push_back(j);
        ++dominated_by[j];
      } else if (dominates(points[j], points[i])) {
        dominates_list[j].push_back(i);
        ++dominated_by[i];
      }
    }
  }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < n; ++i)
    if (dominated_by[i] == 0) front.push_back(i);
  int r = 0;
  while (!front.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : front) {
      rank[i] = r;
      for (std::size_t j : dominates_list[i])
        if (--dominated_by[j] == 0) next.push_back(j);
    }
    std::sort(next.begin(), next.end());
    front = std::move(next);
    ++r;
  }
  return rank;
}

/// NSGA-II crowding distance of the points listed in `members`. Boundary
/// points get +inf unless the objective's range is zero.
inline std::vector<double> crowding_distance(std::span<const ObjectivePair> points, std::span<const std::size_t> members) {
  const std::size_t m = members.size();
  std::vector<double> dist(m, 0.0);
  if (m == 0) return dist;
  std::vector<std::size_t> order(m);
  for (int obj = 0; obj < 2; ++obj) {
    auto value = [&](std::size_t k) { return obj == 0 ? points[members[k]].lci : points[members[k]].lsi; };
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    const double range = value(order.back()) - value(order.front());
    if (!(range > 0.0)) continue;
    dist[order.front()] = std::numeric_limits<double>::infinity();
    dist[order.back()] = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < m; ++k) dist[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
  }
  return dist;
}

inline std::size_t selection_size(std::size_t population, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(population)));
}

/// Truncation selection by non-domination rank; the front that straddles the
/// cut is filled by descending crowding distance, then ascending index.
inline std::vector<std::size_t> select(std::span<const ObjectivePair> points, double fraction) {
  const std::size_t target = selection_size(points.size(), fraction);
  const auto rank = non_dominated_ranks(points);
  std::vector<std::size_t> chosen;
  chosen.reserve(target);
  for (int r = 0; chosen.size() < target; ++r) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (rank[i] == r) front.push_back(i);
    if (front.empty()) break;
    if (chosen.size() + front.size() <= target) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      continue;
    }
    const auto crowd = crowding_distance(points, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return crowd[a] > crowd[b]; });
    for (std::size_t k = 0; chosen.size() < target; ++k) chosen.push_back(front[order[k]]);
  }
  return chosen;
}

}  // namespace dwellopt::moea

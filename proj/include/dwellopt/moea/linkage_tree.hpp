#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dwellopt/error.hpp"
#include "dwellopt/geometry.hpp"
#include "dwellopt/patient_model.hpp"

namespace dwellopt::moea {

/// Groups of dwell indices that are sampled jointly. Singletons come first
/// (in index order), followed by merged clusters in merge order; the root
/// (all dwells) is left out.
struct LinkageTree {
  std::vector<std::vector<std::size_t>> sets;

  std::size_t size() const { return sets.size(); }
};

/// Average-linkage (UPGMA) agglomeration on Euclidean distances. Clusters are
/// numbered 0..n-1 for leaves and n, n+1, ... as they are formed; among equal
/// distances the pair with the smallest (lower id, higher id) merges first.
inline LinkageTree build_linkage_tree(std::span<const Vec3> positions) {
  const std::size_t n = positions.size();
  if (n == 0) throw ContractError("build_linkage_tree: no dwell positions");
  LinkageTree tree;
  tree.sets.reserve(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) tree.sets.push_back({i});

  // Active clusters by id; dist is indexed by id and grows as clusters form.
  const std::size_t total = 2 * n - 1;
  std::vector<std::vector<double>> dist(total, std::vector<double>(total, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = distance(positions[i], positions[j]);
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<std::size_t> members(total, 1);

  std::vector<std::vector<std::size_t>> content(total);
  for (std::size_t i = 0; i < n; ++i) content[i] = {i};

  for (std::size_t next = n; active.size() > 1; ++next) {
    // `active` stays sorted by id, so the first strict minimum is the smallest pair.
    std::size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double d = dist[active[x]][active[y]];
        if (d < best) {
          best = d;
          ba = x;
          bb = y;
        }
      }
    const std::size_t a = active[ba], b = active[bb];
    members[next] = members[a] + members[b];
    content[next] = content[a];
    content[next].insert(content[next].end(), content[b].begin(), content[b].end());
    std::sort(content[next].begin(), content[next].end());
    const double wa = static_cast<double>(members[a]), wb = static_cast<double>(members[b]);
    for (std::size_t k : active) {
      if (k == a || k == b) continue;
      dist[next][k] = dist[k][next] = (wa * dist[a][k] + wb * dist[b][k]) / (wa + wb);
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(ba));
    active.push_back(next);
    if (active.size() > 1) tree.sets.push_back(content[next]);
  }
  return tree;
}

inline LinkageTree build_linkage_tree(const PatientCase& c) {
  std::vector<Vec3> positions;
  positions.reserve(c.n_dwells());
  for (const auto& d : c.dwell_positions) positions.push_back(d.position);
  return build_linkage_tree(positions);
}

}  // namespace dwellopt::moea

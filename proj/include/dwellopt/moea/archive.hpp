#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "dwellopt/evaluator.hpp"
#include "dwellopt/moea/dominance.hpp"

namespace dwellopt::moea {

struct ArchiveEntry {
  Solution solution;       // without dose cache
  std::uint64_t sequence;  // insertion order, for stable tie-breaking
};

/// Bounded store of mutually non-dominated, CR-feasible solutions.
///
/// For two maximized objectives a non-dominated set ordered by increasing LCI
/// has strictly decreasing LSI, so membership tests are binary searches. When
/// full, an objective-space grid locates the most crowded cell and one of its
/// members (or the newcomer) is dropped. The extreme members and the member
/// with the best min(LCI, LSI) are never dropped for crowding.
class ElitistArchive {
 public:
  static constexpr double kDuplicateTolerance = 1e-12;

  explicit ElitistArchive(std::size_t capacity = 1000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("archive capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<ArchiveEntry>& members() const { return members_; }
  std::uint64_t next_sequence() const { return next_sequence_; }

  // True when some member dominates `p` or coincides with it within tolerance.
  bool is_dominated_or_duplicate(const ObjectivePair& p) const {
    const std::size_t pos = lower_bound(p.lci);
    if (pos < members_.size() && members_[pos].solution.objectives.lsi >= p.lsi) return true;
    for (std::size_t k : {pos, pos - 1}) {
      if (k < members_.size()) {
        const auto& o = members_[k].solution.objectives;
        if (std::abs(o.lci - p.lci) <= kDuplicateTolerance && std::abs(o.lsi - p.lsi) <= kDuplicateTolerance) return true;
      }
    }
    return false;
  }

  /// Offers a solution; returns whether it was stored.
  bool update(const Solution& s) {
    if (!s.cr_feasible) return false;
    const ObjectivePair& p = s.objectives;
    if (!std::isfinite(p.lci) || !std::isfinite(p.lsi)) return false;
    if (is_dominated_or_duplicate(p)) return false;

    // Members dominated by p form a contiguous run ending just before the
    // first member with a larger LCI.
    std::size_t end = lower_bound(p.lci);
    if (end < members_.size() && members_[end].solution.objectives.lci == p.lci) ++end;
    std::size_t begin = end;
    while (begin > 0 && members_[begin - 1].solution.objectives.lsi <= p.lsi) --begin;
    members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(begin), members_.begin() + static_cast<std::ptrdiff_t>(end));
    const auto at = members_.insert(members_.begin() + static_cast<std::ptrdiff_t>(begin), ArchiveEntry{s.summary(), next_sequence_});
    const std::size_t inserted = static_cast<std::size_t>(at - members_.begin());
    if (members_.size() > capacity_) {
      const std::size_t victim = crowding_victim(inserted);
      members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
      if (victim == inserted) return false;
    }
    ++next_sequence_;
    return true;
  }

  /// Drops every member dominated by another (after objectives were recomputed).
  void remove_dominated() {
    std::vector<ArchiveEntry> all = std::move(members_);
    members_.clear();
    std::stable_sort(all.begin(), all.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.sequence < b.sequence; });
    const std::uint64_t seq = next_sequence_;
    for (auto& e : all) reinsert(std::move(e));
    next_sequence_ = seq;
  }

  // Mutable access for objective recomputation; call remove_dominated() afterwards.
  std::vector<ArchiveEntry>& mutable_members() { return members_; }

  void clear() { members_.clear(); }

  // Restores a member verbatim (checkpoint loading); the caller guarantees order.
  void restore(std::vector<ArchiveEntry> members, std::uint64_t next_sequence) {
    members_ = std::move(members);
    next_sequence_ = next_sequence;
    remove_dominated();
  }

 private:
  std::size_t lower_bound(double lci) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), lci,
                               [](const ArchiveEntry& e, double v) { return e.solution.objectives.lci < v; });
    return static_cast<std::size_t>(it - members_.begin());
  }

  void reinsert(ArchiveEntry e) {
    const ObjectivePair& p = e.solution.objectives;
    if (is_dominated_or_duplicate(p)) return;
    std::size_t end = lower_bound(p.lci);
    if (end < members_.size() && members_[end].solution.objectives.lci == p.lci) ++end;
    std::size_t begin = end;
    while (begin > 0 && members_[begin - 1].solution.objectives.lsi <= p.lsi) --begin;
    members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(begin), members_.begin() + static_cast<std::ptrdiff_t>(end));
    members_.insert(members_.begin() + static_cast<std::ptrdiff_t>(begin), std::move(e));
  }

  // Index of the member to drop when over capacity.
  std::size_t crowding_victim(std::size_t newcomer) const {
    const std::size_t n = members_.size();
    const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(capacity_))));
    double lo_c = members_.front().solution.objectives.lci, hi_c = members_.back().solution.objectives.lci;
    double lo_s = members_.back().solution.objectives.lsi, hi_s = members_.front().solution.objectives.lsi;
    const double rc = hi_c - lo_c, rs = hi_s - lo_s;
    auto cell_of = [&](std::size_t i) {
      const auto& o = members_[i].solution.objectives;
      auto bin = [&](double v, double lo, double range) {
        if (!(range > 0.0)) return std::size_t{0};
        return std::min(grid - 1, static_cast<std::size_t>((v - lo) / range * static_cast<double>(grid)));
      };
      return bin(o.lci, lo_c, rc) * grid + bin(o.lsi, lo_s, rs);
    };

    // Protected: both extremes and the best balanced member.
    std::size_t balanced = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = members_[i].solution.objectives;
      const double m = std::min(o.lci, o.lsi);
      if (m > best) {
        best = m;
        balanced = i;
      }
    }
    auto is_protected = [&](std::size_t i) { return i == 0 || i == n - 1 || i == balanced; };

    std::vector<std::size_t> cell(n);
    std::vector<std::size_t> counts(grid * grid, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[cell[i] = cell_of(i)];
    std::vector<std::size_t> cells(grid * grid);
    std::iota(cells.begin(), cells.end(), 0);
    std::stable_sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

    auto gap = [&](std::size_t i) {
      auto d = [&](std::size_t a, std::size_t b) {
        const auto& x = members_[a].solution.objectives;
        const auto& y = members_[b].solution.objectives;
        const double dc = rc > 0 ? (x.lci - y.lci) / rc : 0.0;
        const double ds = rs > 0 ? (x.lsi - y.lsi) / rs : 0.0;
        return std::sqrt(dc * dc + ds * ds);
      };
      return d(i - 1, i) + d(i, i + 1);
    };

    for (std::size_t c : cells) {
      if (counts[c] < 2) break;
      if (cell[newcomer] == c && !is_protected(newcomer)) return newcomer;
      std::size_t victim = n;
      double smallest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (cell[i] != c || is_protected(i)) continue;
        const double g = gap(i);
        if (g < smallest) {
          smallest = g;
          victim = i;
        }
      }
      if (victim < n) return victim;
    }
    // Every cell holds at most one removable member: drop the newcomer unless protected.
    if (!is_protected(newcomer)) return newcomer;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_protected(i)) return i;
    return newcomer;
  }

  std::size_t capacity_;
  std::vector<ArchiveEntry> members_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace dwellopt::moea

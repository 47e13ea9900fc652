// Copyright 2026 The Overbook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace overbook {

/// A fractional-weight item. For grouped problems each option also carries
/// the price it was quoted at.
struct KnapsackItem {
  double weight = 0.0;
  double value = 0.0;
  int owner = -1;
  double price = 0.0;
};

struct KnapsackSolution {
  /// Per group: chosen option index, or -1. For binary problems 0 = taken.
  std::vector<int> choice;
  double value = 0.0;
  double weight = 0.0;  // sum of true (unrounded) weights

  bool selected(std::size_t i) const { return choice.at(i) >= 0; }
};

/// Weights are placed on an integer grid of this many units per 1.0.
inline constexpr double kKnapsackScale = 1e4;

/// ceil(w * scale), bumped if the product was rounded below the true value.
inline std::int64_t knapsack_weight_units(double w) {
  const double scaled = w * kKnapsackScale;
  auto units = static_cast<std::int64_t>(std::ceil(scaled));
  if (std::fma(w, kKnapsackScale, -static_cast<double>(units)) > 0.0) ++units;
  return units;
}

inline std::int64_t knapsack_capacity_units(double c) {
  auto units = static_cast<std::int64_t>(std::floor(c * kKnapsackScale));
  if (std::fma(c, kKnapsackScale, -static_cast<double>(units)) < 0.0) --units;
  return std::max<std::int64_t>(units, 0);
}

namespace detail {

struct KnapState {
  std::int64_t w;
  double v;
  std::int32_t node;  // chain of (group, option) decisions, -1 = none
};

struct KnapNode {
  std::int32_t parent;
  std::int32_t group;
  std::int32_t option;
};

struct KnapCandidate {
  std::int64_t w;
  double v;
  int rank;  // option index; skipping ranks last
  std::int32_t node;
  std::int32_t option;
};

// Options that can never appear in a preferred solution: another option of
// the same group weighs no more and is worth at least as much.
inline std::vector<int> undominated_options(std::span<const KnapsackItem> opts,
                                            std::span<const std::int64_t> units) {
  std::vector<int> idx(opts.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) {
    if (units[x] != units[y]) return units[x] < units[y];
    if (opts[x].value != opts[y].value) return opts[x].value > opts[y].value;
    return x < y;
  });
  std::vector<int> keep;
  double best = -1.0;
  for (int k : idx) {
    if (opts[k].value > best) {
      keep.push_back(k);
      best = opts[k].value;
    }
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace detail

/// Exact multiple-choice knapsack: at most one option per group, total
/// grid weight within the grid capacity.
///
/// Weights round up and capacity rounds down, so the true weight of any
/// returned selection never exceeds the true capacity. The DP keeps, per
/// suffix of groups, the Pareto frontier of (weight, value) states; values
/// of a selection are always accumulated in the same order. Among optimal
/// selections the lighter one wins, then the lexicographically first,
/// where taking a lower option index ranks before a higher one and any
/// option ranks before skipping the group.
inline KnapsackSolution solve_grouped(std::span<const std::vector<KnapsackItem>> groups,
                                      double capacity) {
  if (capacity < 0.0) throw std::invalid_argument("knapsack capacity must be >= 0");
  for (const auto& g : groups) {
    for (const auto& it : g) {
      if (!(it.weight >= 0.0 && it.weight <= 1.0) || !(it.value >= 0.0)) {
        throw std::invalid_argument("knapsack option needs weight in [0,1], value >= 0");
      }
    }
  }
  const std::int64_t cap = knapsack_capacity_units(capacity);
  // Scratch buffers are reused across calls on the same thread.
  thread_local std::vector<detail::KnapNode> arena;
  thread_local std::vector<detail::KnapState> frontier, next;
  thread_local std::vector<detail::KnapCandidate> cand, shifted, merged;
  arena.clear();
  frontier.assign(1, {0, 0.0, -1});

  for (std::size_t gi = groups.size(); gi-- > 0;) {
    const auto& opts = groups[gi];
    std::vector<std::int64_t> units(opts.size());
    for (std::size_t k = 0; k < opts.size(); ++k) units[k] = knapsack_weight_units(opts[k].weight);
    const std::vector<int> keep = detail::undominated_options(opts, units);

    // Each list is already ordered by weight; merging keeps the order
    // (weight asc, value desc, rank asc) without a full sort.
    auto before = [](const detail::KnapCandidate& x, const detail::KnapCandidate& y) {
      if (x.w != y.w) return x.w < y.w;
      if (x.v != y.v) return x.v > y.v;
      return x.rank < y.rank;
    };
    cand.clear();
    for (const auto& s : frontier) {
      cand.push_back({s.w, s.v, static_cast<int>(opts.size()), s.node, -1});
    }
    for (int k : keep) {
      shifted.clear();
      for (const auto& s : frontier) {
        const std::int64_t w = s.w + units[k];
        if (w > cap) break;
        shifted.push_back({w, s.v + opts[k].value, k, s.node, k});
      }
      merged.resize(cand.size() + shifted.size());
      std::merge(cand.begin(), cand.end(), shifted.begin(), shifted.end(), merged.begin(),
                 before);
      cand.swap(merged);
    }
    next.clear();
    for (const auto& c : cand) {
      if (!next.empty() && !(c.v > next.back().v)) continue;
      std::int32_t node = c.node;
      if (c.option >= 0) {
        arena.push_back({c.node, static_cast<std::int32_t>(gi), c.option});
        node = static_cast<std::int32_t>(arena.size() - 1);
      }
      next.push_back({c.w, c.v, node});
    }
    frontier.swap(next);
  }

  // Highest value sits last; the frontier holds one lightest state per value.
  const detail::KnapState& best = frontier.back();
  KnapsackSolution sol;
  sol.choice.assign(groups.size(), -1);
  sol.value = best.v;
  for (std::int32_t n = best.node; n >= 0; n = arena[n].parent) {
    sol.choice[arena[n].group] = arena[n].option;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (sol.choice[g] >= 0) sol.weight += groups[g][sol.choice[g]].weight;
  }
  return sol;
}

inline KnapsackSolution solve_grouped(const std::vector<std::vector<KnapsackItem>>& groups,
                                      double capacity) {
  return solve_grouped(std::span<const std::vector<KnapsackItem>>(groups), capacity);
}

/// 0/1 knapsack; a special case of the grouped problem with one option each.
inline KnapsackSolution solve_binary(std::span<const KnapsackItem> items, double capacity) {
  std::vector<std::vector<KnapsackItem>> groups;
  groups.reserve(items.size());
  for (const auto& it : items) groups.push_back({it});
  return solve_grouped(groups, capacity);
}

inline KnapsackSolution solve_binary(const std::vector<KnapsackItem>& items, double capacity) {
  return solve_binary(std::span<const KnapsackItem>(items), capacity);
}

}  // namespace overbook

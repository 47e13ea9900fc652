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

// Brute-force reference computations used by the validate command and
// the test suites. They deliberately avoid the closed forms: binomial
// weights come from a trial-by-trial convolution, expectations from
// explicit enumeration or sampling, optima from exhaustive search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "overbook/knapsack.hpp"
#include "overbook/offload.hpp"
#include "overbook/params.hpp"
#include "overbook/realization.hpp"

namespace overbook::oracle {

/// Distribution of the number of successes in n Bernoulli(a) trials,
/// built one trial at a time.
inline std::vector<long double> binomial_by_convolution(int n, double a) {
  std::vector<long double> dist{1.0L};
  const long double pa = a, pb = 1.0L - static_cast<long double>(a);
  for (int t = 0; t < n; ++t) {
    std::vector<long double> next(dist.size() + 1, 0.0L);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      next[k] += dist[k] * pb;
      next[k + 1] += dist[k] * pa;
    }
    dist.swap(next);
  }
  return dist;
}

/// Realized seller futures revenue when k of kappa members hold a task.
inline long double seller_utility_at(const MarketParams& m, double p, double q, double r,
                                     int kappa, int k) {
  const long double d = m.compute_demand_dcomp;
  const int v = std::max(k - m.seller_capacity_S, 0);
  return p * d * k + q * d * (kappa - k) - (static_cast<long double>(p) + r) * d * v;
}

inline double expected_volunteers(const MarketParams& m, int kappa) {
  const auto dist = binomial_by_convolution(kappa, m.task_arrival_prob_a);
  long double acc = 0.0L;
  for (int k = 0; k <= kappa; ++k) acc += dist[k] * std::max(k - m.seller_capacity_S, 0);
  return static_cast<double>(acc);
}

/// Pr(a given member holds a task and more than S members do); each
/// overflow outcome with k performers displaces a given performer's slot
/// with weight k / kappa.
inline double volunteer_risk(const MarketParams& m, int kappa) {
  if (kappa == 0) return 0.0;
  const auto dist = binomial_by_convolution(kappa, m.task_arrival_prob_a);
  long double acc = 0.0L;
  for (int k = m.seller_capacity_S + 1; k <= kappa; ++k) {
    acc += dist[k] * static_cast<long double>(k) / kappa;
  }
  return static_cast<double>(acc);
}

inline double seller_utility(const MarketParams& m, double p, double q, double r, int kappa) {
  const auto dist = binomial_by_convolution(kappa, m.task_arrival_prob_a);
  long double acc = 0.0L;
  for (int k = 0; k <= kappa; ++k) acc += dist[k] * seller_utility_at(m, p, q, r, kappa, k);
  return static_cast<double>(acc);
}

/// Pr(realized utility <= xi2 * expected), given the expectation. Values
/// within 1e-12 (relative) of the threshold count as inside the event.
inline double seller_risk(const MarketParams& m, double p, double q, double r, int kappa,
                          double expected) {
  const auto dist = binomial_by_convolution(kappa, m.task_arrival_prob_a);
  const long double thr = static_cast<long double>(m.xi2) * expected;
  long double acc = 0.0L;
  for (int k = 0; k <= kappa; ++k) {
    const long double u = seller_utility_at(m, p, q, r, kappa, k);
    const long double scale = std::max({1.0L, std::fabs(u), std::fabs(thr)});
    if (u <= thr + 1e-12L * scale) acc += dist[k];
  }
  return static_cast<double>(acc);
}

/// Expected member-side sum utility by enumerating the number of
/// performers; a performer's offload utility enters through its mean.
inline double member_utility(const MarketParams& m, double p, double q, double r, int kappa,
                             double mean_pp) {
  const auto dist = binomial_by_convolution(kappa, m.task_arrival_prob_a);
  const long double d = m.compute_demand_dcomp;
  long double acc = 0.0L;
  for (int k = 0; k <= kappa; ++k) {
    const int v = std::max(k - m.seller_capacity_S, 0);
    const long double u = (k - v) * static_cast<long double>(mean_pp) - q * d * (kappa - k) +
                          r * d * v;
    acc += dist[k] * u;
  }
  return static_cast<double>(acc);
}

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

inline Estimate mc_pp_utility(const MarketParams& m, double p, std::int64_t samples,
                              std::uint64_t seed) {
  RoundStream rng(seed, 0x5eed);
  long double s = 0.0L, s2 = 0.0L;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double g = rng.uniform(m.gamma_low_eps1, m.gamma_high_eps2);
    const long double u = pp_utility(m, p, g);
    s += u;
    s2 += u * u;
  }
  const long double mean = s / samples;
  const long double var = std::max(0.0L, s2 / samples - mean * mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / samples))};
}

/// Samples the event alpha U^PP + (1 - alpha) U^DE <= xi1 U_min.
inline Estimate mc_member_risk(const MarketParams& m, double p, double q, std::int64_t samples,
                               std::uint64_t seed) {
  RoundStream rng(seed, 0x7157);
  const double thr = m.xi1 * m.u_min;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const int alpha = rng.bernoulli(m.task_arrival_prob_a);
    const double g = rng.uniform(m.gamma_low_eps1, m.gamma_high_eps2);
    const double u = alpha ? pp_utility(m, p, g) : -q * m.compute_demand_dcomp;
    if (u <= thr) ++hits;
  }
  const double mean = static_cast<double>(hits) / samples;
  return {mean, std::sqrt(mean * (1.0 - mean) / samples)};
}

/// Best utility over lambda in {0, step, 2 step, ..., 1}.
inline double grid_best_utility(const MarketParams& m, double g, double gamma, double step) {
  const OffloadProfile prof(m, gamma);
  const auto n = static_cast<std::int64_t>(std::llround(1.0 / step));
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i <= n; ++i) {
    best = std::max(best, prof.utility(g, std::min(1.0, static_cast<double>(i) * step)));
  }
  return best;
}

struct BruteKnapsack {
  double value = 0.0;
  double weight = 0.0;
};

namespace detail {

inline void grouped_dfs(const std::vector<std::vector<KnapsackItem>>& groups,
                        const std::vector<std::vector<std::int64_t>>& units, std::size_t g,
                        std::int64_t cap, std::int64_t w, double v, double tw,
                        BruteKnapsack& best) {
  if (g == groups.size()) {
    if (v > best.value) best = {v, tw};
    return;
  }
  grouped_dfs(groups, units, g + 1, cap, w, v, tw, best);
  for (std::size_t k = 0; k < groups[g].size(); ++k) {
    const std::int64_t nw = w + units[g][k];
    if (nw > cap) continue;
    grouped_dfs(groups, units, g + 1, cap, nw, v + groups[g][k].value,
                tw + groups[g][k].weight, best);
  }
}

}  // namespace detail

/// Best value over every choice of at most one option per group whose grid
/// weight fits the grid capacity. Walks the full choice tree.
inline BruteKnapsack exhaustive_grouped(const std::vector<std::vector<KnapsackItem>>& groups,
                                        double capacity) {
  std::vector<std::vector<std::int64_t>> units;
  for (const auto& g : groups) {
    auto& u = units.emplace_back();
    for (const auto& it : g) u.push_back(knapsack_weight_units(it.weight));
  }
  BruteKnapsack best;
  detail::grouped_dfs(groups, units, 0, knapsack_capacity_units(capacity), 0, 0.0, 0.0, best);
  return best;
}

/// Best value over all subsets whose grid weight fits the grid capacity.
inline BruteKnapsack exhaustive_binary(const std::vector<KnapsackItem>& items, double capacity) {
  std::vector<std::vector<KnapsackItem>> groups;
  for (const auto& it : items) groups.push_back({it});
  return exhaustive_grouped(groups, capacity);
}

}  // namespace overbook::oracle

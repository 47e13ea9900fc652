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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "overbook/knapsack.hpp"
#include "overbook/offload.hpp"
#include "overbook/params.hpp"
#include "overbook/realization.hpp"

namespace overbook {

/// Result of one spot session. Vectors are parallel to `buyers`, the
/// non-member indices handed to the engine.
struct SpotOutcome {
  std::vector<int> buyers;
  std::vector<int> trade_decision_X;
  std::vector<double> prices_G;
  std::vector<double> offload_rates_Lambda;
  /// Per-buyer quotation counts. Under uniform pricing the session total
  /// is spread evenly over the buyers holding a task, so entries may be
  /// fractional.
  std::vector<double> quote_counts;
  std::int64_t total_quotes = 0;
  double seller_spot_utility = 0.0;
  /// Uniform pricing only: the agreed price (0 when nothing traded).
  double uniform_price = 0.0;
};

namespace detail {

inline SpotOutcome empty_spot(std::span<const int> buyers) {
  SpotOutcome out;
  out.buyers.assign(buyers.begin(), buyers.end());
  out.trade_decision_X.assign(buyers.size(), 0);
  out.prices_G.assign(buyers.size(), 0.0);
  out.offload_rates_Lambda.assign(buyers.size(), 0.0);
  out.quote_counts.assign(buyers.size(), 0.0);
  return out;
}

// Ladder runaway guard; lambda reaches 0 long before this at sane params.
inline constexpr std::int64_t kMaxLadderSteps = 50'000'000;

inline double ladder_price(const MarketParams& m, std::int64_t i) {
  return m.seller_min_price + static_cast<double>(i) * m.delta_p;
}

}  // namespace detail

/// Uniform-price session: one price ladder for every non-member with a
/// task; at each price the seller fills capacity by maximizing the sum of
/// accepted offload fractions, and finally keeps the most profitable price
/// (lowest price on ties).
inline SpotOutcome spot_uniform(const MarketParams& m, const TradingRealization& rz,
                                std::span<const int> nonmembers, int capacity) {
  SpotOutcome out = detail::empty_spot(nonmembers);
  std::vector<std::size_t> tasked;
  for (std::size_t i = 0; i < nonmembers.size(); ++i) {
    if (rz.alpha.at(nonmembers[i]) == 1) tasked.push_back(i);
  }
  if (capacity <= 0 || tasked.empty()) return out;

  std::vector<OffloadProfile> prof;
  prof.reserve(tasked.size());
  for (std::size_t i : tasked) prof.emplace_back(m, rz.gamma.at(nonmembers[i]));

  std::vector<std::size_t> active(tasked.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

  // Quote the ladder first. Consecutive prices that produce the same
  // fraction vector form a band; the knapsack answer is constant within a
  // band, so revenue grows with the price and only the band's top price can
  // be the session optimum.
  struct Band {
    std::vector<double> lam;
    double top_price;
  };
  std::vector<Band> bands;
  std::vector<double> lam(tasked.size(), 0.0);
  std::int64_t count = 0;
  for (std::int64_t step = 0;; ++step) {
    if (step >= detail::kMaxLadderSteps) throw std::runtime_error("spot price ladder did not terminate");
    const double g = detail::ladder_price(m, step);
    std::fill(lam.begin(), lam.end(), 0.0);
    bool any = false;
    for (std::size_t a : active) {
      lam[a] = prof[a].optimal_lambda(g);
      ++count;
      any = any || lam[a] > 0.0;
    }
    if (step == 0) {
      // Buyers priced out at the opening quote leave the ladder.
      std::erase_if(active, [&](std::size_t a) { return lam[a] == 0.0; });
    }
    if (!any) break;
    if (!bands.empty() && bands.back().lam == lam) {
      bands.back().top_price = g;
    } else {
      bands.push_back({lam, g});
    }
  }

  // Highest bands first; a band whose revenue bound cannot reach the best
  // value found so far is never solved. Equal revenue keeps the lower price.
  bool have_best = false;
  double best_u = 0.0;
  double best_g = 0.0;
  const Band* best_band = nullptr;
  KnapsackSolution best_sol;
  for (auto it = bands.rbegin(); it != bands.rend(); ++it) {
    const double g = it->top_price;
    double total = 0.0;
    for (double x : it->lam) total += x;
    const double bound = g * m.compute_demand_dcomp * std::min<double>(total, capacity);
    if (have_best && bound * (1.0 + 1e-12) < best_u) continue;
    std::vector<KnapsackItem> items(it->lam.size());
    for (std::size_t a = 0; a < items.size(); ++a) {
      items[a] = {it->lam[a], it->lam[a], static_cast<int>(a), g};
    }
    KnapsackSolution sol = solve_binary(items, capacity);
    double sum = 0.0;
    for (std::size_t a = 0; a < items.size(); ++a) {
      if (sol.selected(a)) sum += it->lam[a];
    }
    const double u = g * m.compute_demand_dcomp * sum;
    if (!have_best || u > best_u || (u == best_u && g < best_g)) {
      have_best = true;
      best_u = u;
      best_g = g;
      best_band = &*it;
      best_sol = std::move(sol);
    }
  }
  const std::vector<double> best_lam = best_band ? best_band->lam : std::vector<double>{};

  out.total_quotes = count;
  const double per_buyer = static_cast<double>(count) / static_cast<double>(tasked.size());
  for (std::size_t a = 0; a < tasked.size(); ++a) {
    const std::size_t i = tasked[a];
    out.quote_counts[i] = per_buyer;
    if (have_best && best_sol.selected(a) && best_lam[a] > 0.0) {
      out.trade_decision_X[i] = 1;
      out.prices_G[i] = best_g;
      out.offload_rates_Lambda[i] = best_lam[a];
    }
  }
  if (have_best) {
    out.uniform_price = best_g;
    double rev = 0.0;
    for (std::size_t i = 0; i < nonmembers.size(); ++i) {
      if (out.trade_decision_X[i]) rev += out.prices_G[i] * out.offload_rates_Lambda[i];
    }
    out.seller_spot_utility = m.compute_demand_dcomp * rev;
  }
  for (double& p : out.prices_G) {
    if (out.uniform_price > 0.0) p = out.uniform_price;
  }
  return out;
}

/// Differential-price session: a private ladder per task-holding
/// non-member collects every (price, fraction) it accepts; the seller then
/// picks at most one pair per buyer maximizing revenue within capacity.
inline SpotOutcome spot_differential(const MarketParams& m, const TradingRealization& rz,
                                     std::span<const int> nonmembers, int capacity) {
  SpotOutcome out = detail::empty_spot(nonmembers);
  std::vector<std::size_t> tasked;
  for (std::size_t i = 0; i < nonmembers.size(); ++i) {
    if (rz.alpha.at(nonmembers[i]) == 1) tasked.push_back(i);
  }
  if (capacity <= 0 || tasked.empty()) return out;

  std::vector<std::vector<KnapsackItem>> groups(tasked.size());
  for (std::size_t a = 0; a < tasked.size(); ++a) {
    const std::size_t i = tasked[a];
    const OffloadProfile prof(m, rz.gamma.at(nonmembers[i]));
    for (std::int64_t step = 0;; ++step) {
      if (step >= detail::kMaxLadderSteps) throw std::runtime_error("spot price ladder did not terminate");
      const double g = detail::ladder_price(m, step);
      const double lam = prof.optimal_lambda(g);
      if (!(lam > 0.0)) break;
      groups[a].push_back({lam, g * lam * m.compute_demand_dcomp, static_cast<int>(i), g});
    }
    out.quote_counts[i] = static_cast<double>(groups[a].size());
    out.total_quotes += static_cast<std::int64_t>(groups[a].size());
  }

  const KnapsackSolution sol = solve_grouped(groups, capacity);
  double rev = 0.0;
  for (std::size_t a = 0; a < tasked.size(); ++a) {
    if (sol.choice[a] < 0) continue;
    const KnapsackItem& opt = groups[a][sol.choice[a]];
    const std::size_t i = tasked[a];
    out.trade_decision_X[i] = 1;
    out.prices_G[i] = opt.price;
    out.offload_rates_Lambda[i] = opt.weight;
    rev += opt.price * opt.weight;
  }
  out.seller_spot_utility = m.compute_demand_dcomp * rev;
  return out;
}

}  // namespace overbook

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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "overbook/oracles.hpp"
#include "overbook/spot.hpp"
#include "test_util.hpp"

namespace overbook {
namespace {

using testing::params_with;

TradingRealization realization(std::vector<int> alpha, std::vector<double> gamma) {
  TradingRealization rz;
  rz.e2e_delay.assign(alpha.size(), 0.005);
  rz.alpha = std::move(alpha);
  rz.gamma = std::move(gamma);
  return rz;
}

std::vector<int> all_buyers(std::size_t n) {
  std::vector<int> b(n);
  std::iota(b.begin(), b.end(), 0);
  return b;
}

// Straight ladder walk: at each price the best subset by exhaustive search.
double brute_uniform(const MarketParams& m, const TradingRealization& rz,
                     const std::vector<int>& buyers, int capacity) {
  double best = 0.0;
  for (long long i = 0;; ++i) {
    const double g = m.seller_min_price + static_cast<double>(i) * m.delta_p;
    std::vector<KnapsackItem> items;
    for (int b : buyers) {
      if (!rz.alpha[b]) continue;
      const double lam = optimal_lambda(m, g, rz.gamma[b]);
      if (lam > 0.0) items.push_back({lam, lam, b, g});
    }
    if (items.empty()) break;
    best = std::max(best, g * m.compute_demand_dcomp * oracle::exhaustive_binary(items, capacity).value);
  }
  return best;
}

double brute_differential(const MarketParams& m, const TradingRealization& rz,
                          const std::vector<int>& buyers, int capacity) {
  std::vector<std::vector<KnapsackItem>> groups;
  for (int b : buyers) {
    if (!rz.alpha[b]) continue;
    auto& g = groups.emplace_back();
    for (long long i = 0;; ++i) {
      const double price = m.seller_min_price + static_cast<double>(i) * m.delta_p;
      const double lam = optimal_lambda(m, price, rz.gamma[b]);
      if (!(lam > 0.0)) break;
      g.push_back({lam, price * lam * m.compute_demand_dcomp, b, price});
    }
  }
  return oracle::exhaustive_grouped(groups, capacity).value;
}

TEST(SpotUniformTest, NoTaskHoldersMeansNoTrade) {
  const MarketParams m = reference_params();
  const auto rz = realization({0, 0, 0}, {150, 150, 150});
  const auto out = spot_uniform(m, rz, all_buyers(3), 5);
  EXPECT_EQ(out.seller_spot_utility, 0.0);
  EXPECT_EQ(out.total_quotes, 0);
  for (int x : out.trade_decision_X) EXPECT_EQ(x, 0);
  EXPECT_EQ(spot_differential(m, rz, all_buyers(3), 5).total_quotes, 0);
}

TEST(SpotUniformTest, ZeroCapacityMeansNoTrade) {
  const MarketParams m = reference_params();
  const auto rz = realization({1, 1}, {150, 200});
  EXPECT_EQ(spot_uniform(m, rz, all_buyers(2), 0).seller_spot_utility, 0.0);
  EXPECT_EQ(spot_differential(m, rz, all_buyers(2), 0).seller_spot_utility, 0.0);
}

TEST(SpotUniformTest, TwoBuyersFullOffloadWhenTimeIsCheap) {
  // With a negligible time weight the breakpoint no longer pays, so full
  // offload is the best response until the price eats the energy saving.
  const MarketParams m = params_with({{"weight_w1", 1e-3}});
  const auto rz = realization({1, 1}, {150.0, 230.0});
  const auto out = spot_uniform(m, rz, all_buyers(2), 2);
  ASSERT_GT(out.uniform_price, 0.0);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(out.trade_decision_X[i], 1);
    EXPECT_EQ(out.offload_rates_Lambda[i], 1.0);
    EXPECT_EQ(out.prices_G[i], out.uniform_price);
    EXPECT_GT(nonmember_utility(m, out.uniform_price, 1.0, 1, rz.gamma[i]), 0.0);
  }
  EXPECT_NEAR(out.seller_spot_utility, 2 * out.uniform_price * m.compute_demand_dcomp, 1e-12);
  EXPECT_NEAR(out.seller_spot_utility, brute_uniform(m, rz, all_buyers(2), 2), 1e-12);
  EXPECT_EQ(out.quote_counts[0], out.quote_counts[1]);
  EXPECT_DOUBLE_EQ(out.quote_counts[0] * 2, static_cast<double>(out.total_quotes));
}

TEST(SpotUniformTest, MatchesExhaustiveLadderReplay) {
  const MarketParams m = reference_params();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> chan(m.gamma_low_eps1, m.gamma_high_eps2);
  for (int inst = 0; inst < 25; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<int> alpha(n);
    std::vector<double> gamma(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = rng() % 4 != 0;
      gamma[i] = chan(rng);
    }
    const auto rz = realization(alpha, gamma);
    const int cap = 1 + static_cast<int>(rng() % 8);
    const auto out = spot_uniform(m, rz, all_buyers(n), cap);
    const double want = brute_uniform(m, rz, all_buyers(n), cap);
    EXPECT_NEAR(out.seller_spot_utility, want, 1e-12 * std::max(1.0, want)) << inst;
    double load = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!out.trade_decision_X[i]) continue;
      EXPECT_EQ(alpha[i], 1);
      EXPECT_GT(nonmember_utility(m, out.prices_G[i], out.offload_rates_Lambda[i], 1, gamma[i]), 0.0);
      EXPECT_EQ(out.offload_rates_Lambda[i], optimal_lambda(m, out.prices_G[i], gamma[i]));
      EXPECT_GE(out.prices_G[i], m.seller_min_price);
      load += out.offload_rates_Lambda[i];
    }
    EXPECT_LE(load, cap);
  }
}

TEST(SpotDifferentialTest, SingleBuyerTakesTheBestPair) {
  const MarketParams m = reference_params();
  const auto rz = realization({1}, {180.0});
  const auto out = spot_differential(m, rz, all_buyers(1), 1);
  double best = 0.0;
  for (long long i = 0;; ++i) {
    const double g = m.seller_min_price + static_cast<double>(i) * m.delta_p;
    const double lam = optimal_lambda(m, g, 180.0);
    if (!(lam > 0.0)) break;
    best = std::max(best, g * lam * m.compute_demand_dcomp);
  }
  EXPECT_NEAR(out.seller_spot_utility, best, 1e-15);
  EXPECT_EQ(out.trade_decision_X[0], 1);
}

TEST(SpotDifferentialTest, MatchesExhaustiveOptionSearch) {
  // A coarse ladder keeps the option tree small enough to walk.
  const MarketParams ref = reference_params();
  const MarketParams m = params_with({{"delta_p", p_mem_max(ref) / 5}});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> chan(m.gamma_low_eps1, m.gamma_high_eps2);
  for (int inst = 0; inst < 30; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::vector<int> alpha(n, 1);
    std::vector<double> gamma(n);
    for (auto& g : gamma) g = chan(rng);
    const auto rz = realization(alpha, gamma);
    const int cap = 1 + static_cast<int>(rng() % 6);
    const auto out = spot_differential(m, rz, all_buyers(n), cap);
    EXPECT_NEAR(out.seller_spot_utility, brute_differential(m, rz, all_buyers(n), cap), 1e-12)
        << inst;
    for (int i = 0; i < n; ++i) {
      EXPECT_GE(out.quote_counts[i], 1.0);
      if (out.trade_decision_X[i]) {
        EXPECT_EQ(out.offload_rates_Lambda[i], optimal_lambda(m, out.prices_G[i], gamma[i]));
      }
    }
  }
}

TEST(SpotDifferentialTest, NeverBelowUniform) {
  const MarketParams m = reference_params();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> chan(m.gamma_low_eps1, m.gamma_high_eps2);
  for (int inst = 0; inst < 40; ++inst) {
    const int n = 15;
    std::vector<int> alpha(n);
    std::vector<double> gamma(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = rng() % 4 != 0;
      gamma[i] = chan(rng);
    }
    const auto rz = realization(alpha, gamma);
    const int cap = 1 + static_cast<int>(rng() % 15);
    const double u = spot_uniform(m, rz, all_buyers(n), cap).seller_spot_utility;
    const double d = spot_differential(m, rz, all_buyers(n), cap).seller_spot_utility;
    EXPECT_GE(d, u * (1 - 1e-12)) << inst;
  }
}

TEST(SpotDifferentialTest, IdenticalBuyersGainNothingFromDiscrimination) {
  const MarketParams m = reference_params();
  const auto rz = realization({1, 1, 1}, {200.0, 200.0, 200.0});
  const double u = spot_uniform(m, rz, all_buyers(3), 3).seller_spot_utility;
  const double d = spot_differential(m, rz, all_buyers(3), 3).seller_spot_utility;
  EXPECT_NEAR(d, u, 1e-12 * u);
}

}  // namespace
}  // namespace overbook

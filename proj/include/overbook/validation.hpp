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
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "overbook/analytics.hpp"
#include "overbook/knapsack.hpp"
#include "overbook/offload.hpp"
#include "overbook/oracles.hpp"
#include "overbook/params.hpp"
#include "overbook/quadrature.hpp"
#include "overbook/realization.hpp"

namespace overbook {

/// Tolerances of the validate suites; overridable through validate_* keys.
struct ValidationTolerances {
  double enum_tol = 1e-10;
  double quad_tol = 1e-9;
  double mc_sigmas = 3.0;
  double mc_samples = 1e6;
  double lambda_rel_tol = 1e-4;
  double lambda_grid_step = 1e-5;
  double lambda_pairs = 200;
  double knapsack_tol = 1e-9;
  double knapsack_instances = 200;
};

inline ValidationTolerances validation_tolerances(const RawConfig& raw) {
  ValidationTolerances t;
  auto take = [&](const char* key, double& field) {
    if (auto it = raw.find(key); it != raw.end()) field = it->second;
  };
  take("validate_enum_tol", t.enum_tol);
  take("validate_quad_tol", t.quad_tol);
  take("validate_mc_sigmas", t.mc_sigmas);
  take("validate_mc_samples", t.mc_samples);
  take("validate_lambda_rel_tol", t.lambda_rel_tol);
  take("validate_lambda_grid_step", t.lambda_grid_step);
  take("validate_lambda_pairs", t.lambda_pairs);
  take("validate_knapsack_tol", t.knapsack_tol);
  take("validate_knapsack_instances", t.knapsack_instances);
  return t;
}

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_deviation = 0.0;  // in the unit of `tolerance`
  double tolerance = 0.0;
  std::int64_t checks = 0;
};

namespace detail {

inline SuiteResult finish(std::string name, double dev, double tol, std::int64_t checks) {
  return {std::move(name), dev <= tol, dev, tol, checks};
}

// A spread of contract terms inside the admissible price window.
inline std::vector<std::array<double, 3>> sample_terms(const MarketParams& m) {
  const double lo = m.seller_min_price, hi = p_mem_max(m);
  std::vector<std::array<double, 3>> out;
  for (double fp : {0.1, 0.5, 0.9}) {
    const double p = lo + fp * (hi - lo);
    for (double fq : {0.2, 0.7}) {
      for (double fr : {0.3, 1.0}) out.push_back({p, fq * p, fr * hi});
    }
  }
  return out;
}

}  // namespace detail

/// Closed-form binomial quantities against enumeration over every count.
inline SuiteResult validate_enumeration(const MarketParams& m, const ValidationTolerances& tol) {
  const FuturesAnalytics fa(m);
  double dev = 0.0;
  std::int64_t n = 0;
  for (int k = 1; k <= m.num_buyers; ++k) {
    dev = std::max(dev, std::fabs(fa.expected_volunteers(k) - oracle::expected_volunteers(m, k)));
    dev = std::max(dev, std::fabs(fa.volunteer_risk(k) - oracle::volunteer_risk(m, k)));
    n += 2;
    for (const auto& [p, q, r] : detail::sample_terms(m)) {
      // Utilities are compared per task so the tolerance is unit-free.
      const double eu = fa.seller_utility(p, q, r, k);
      dev = std::max(dev, std::fabs(eu - oracle::seller_utility(m, p, q, r, k)) /
                              m.compute_demand_dcomp / std::max(p, 1e-300));
      dev = std::max(dev, std::fabs(fa.seller_risk(p, q, r, k) -
                                    oracle::seller_risk(m, p, q, r, k, eu)));
      n += 2;
    }
  }
  return detail::finish("binomial-enumeration", dev, tol.enum_tol, n);
}

inline SuiteResult validate_quadrature(const MarketParams& m, const ValidationTolerances& tol) {
  const auto f = [](double y) { return std::exp(y) / y; };
  const double c1 = std::log1p(m.tx_power_etran * m.gamma_low_eps1);
  const double c2 = std::log1p(m.tx_power_etran * m.gamma_high_eps2);
  double dev = std::fabs(exp_integral(c1, c2) - composite_simpson(f, c1, c2, 1'000'000));
  dev = std::max(dev, std::fabs(exp_integral(1.0, 2.0) - composite_simpson(f, 1.0, 2.0, 1'000'000)));
  return detail::finish("quadrature", dev, tol.quad_tol, 2);
}

/// Member risk and mean offload utility against sampling; deviation is in
/// standard errors.
inline SuiteResult validate_monte_carlo(const MarketParams& m, const ValidationTolerances& tol) {
  const FuturesAnalytics fa(m);
  const auto samples = static_cast<std::int64_t>(tol.mc_samples);
  const double lo = m.seller_min_price, hi = p_mem_max(m);
  double dev = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 11;
  for (double fp : {0.0, 0.5, 0.95}) {
    const double p = lo + fp * (hi - lo);
    const auto pp = oracle::mc_pp_utility(m, p, samples, seed++);
    dev = std::max(dev, std::fabs(fa.expected_pp_utility(p) - pp.mean) / pp.std_error);
    ++n;
    for (double fq : {0.3, 0.9}) {
      const double q = fq * p;
      const auto est = oracle::mc_member_risk(m, p, q, samples, seed++);
      const double exact = fa.member_risk(p, q);
      const double se = std::max(est.std_error, std::sqrt(exact * (1.0 - exact) / samples));
      dev = std::max(dev, se > 0.0 ? std::fabs(exact - est.mean) / se
                                   : (exact == est.mean ? 0.0 : HUGE_VAL));
      ++n;
    }
  }
  return detail::finish("monte-carlo", dev, tol.mc_sigmas, n);
}

/// Optimal offload fraction against a dense grid; deviation is the
/// shortfall relative to the grid optimum.
inline SuiteResult validate_offload_grid(const MarketParams& m, const ValidationTolerances& tol) {
  RoundStream rng(2024, 1);
  const double gmax = 1.2 * p_mem_max(m);
  double dev = 0.0;
  const auto pairs = static_cast<std::int64_t>(tol.lambda_pairs);
  for (std::int64_t i = 0; i < pairs; ++i) {
    const double g = rng.uniform(0.0, gmax);
    const double gamma = rng.uniform(m.gamma_low_eps1, m.gamma_high_eps2);
    const OffloadProfile prof(m, gamma);
    const double lam = prof.optimal_lambda(g);
    const double grid = oracle::grid_best_utility(m, g, gamma, tol.lambda_grid_step);
    const double shortfall = grid - prof.utility(g, lam);
    const double scale = std::max(std::fabs(grid), 1e-300);
    dev = std::max(dev, shortfall / scale);
    if (lam != 0.0 && lam != 1.0 && lam != prof.breakpoint()) dev = HUGE_VAL;
  }
  return detail::finish("offload-grid", dev, tol.lambda_rel_tol, pairs);
}

inline SuiteResult validate_knapsack(const ValidationTolerances& tol) {
  RoundStream rng(77, 3);
  double dev = 0.0;
  const auto count = static_cast<std::int64_t>(tol.knapsack_instances);
  for (std::int64_t t = 0; t < count; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform() * 12);
    std::vector<KnapsackItem> items(n);
    for (auto& it : items) it = {rng.uniform(), rng.uniform(0.0, 2.0)};
    const double cap = rng.uniform(0.0, 0.6 * n);
    const auto sol = solve_binary(items, cap);
    const auto brute = oracle::exhaustive_binary(items, cap);
    dev = std::max(dev, std::fabs(sol.value - brute.value));
    if (sol.weight > cap + 1e-12) dev = HUGE_VAL;

    const int ng = 1 + static_cast<int>(rng.uniform() * 6);
    std::vector<std::vector<KnapsackItem>> groups(ng);
    for (auto& g : groups) {
      g.resize(1 + static_cast<int>(rng.uniform() * 4));
      for (auto& it : g) it = {rng.uniform(), rng.uniform(0.0, 2.0)};
    }
    const double gcap = rng.uniform(0.0, 0.6 * ng);
    const auto gs = solve_grouped(groups, gcap);
    const auto gb = oracle::exhaustive_grouped(groups, gcap);
    dev = std::max(dev, std::fabs(gs.value - gb.value));
    if (gs.weight > gcap + 1e-12) dev = HUGE_VAL;
  }
  return detail::finish("knapsack-exhaustive", dev, tol.knapsack_tol, 2 * count);
}

inline std::vector<SuiteResult> run_validation(const MarketParams& m,
                                               const ValidationTolerances& tol) {
  return {validate_enumeration(m, tol), validate_quadrature(m, tol),
          validate_monte_carlo(m, tol), validate_offload_grid(m, tol), validate_knapsack(tol)};
}

}  // namespace overbook

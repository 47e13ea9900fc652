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
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "overbook/analytics.hpp"
#include "overbook/contract.hpp"
#include "overbook/params.hpp"

namespace overbook {

/// One stored candidate of the negotiation ("CTerm" entry).
struct CandidateTerm {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  int kappa = 0;
  double seller_eu = 0.0;
  double member_eu = 0.0;
  double srisk = 0.0;
  double mrisk = 0.0;
  double vrisk = 0.0;

  ForwardContract contract() const { return {p, q, r, kappa}; }
};

struct NegotiationOptions {
  /// Fixes the member count (equal booking). The risk screens on kappa are
  /// then bypassed; the member-risk and price constraints still apply.
  std::optional<int> forced_kappa;
  /// Keep every candidate in the trace (memory grows with the grid).
  bool keep_candidates = true;
  int workers = 1;
  /// Receives candidates in scan order (ascending p, then q, then r).
  std::function<void(const CandidateTerm&)> on_candidate;
};

struct NegotiationTrace {
  std::vector<CandidateTerm> candidate_terms;
  std::int64_t candidate_count = 0;
  std::int64_t quotation_count = 0;
  std::optional<ForwardContract> outcome;
  std::optional<CandidateTerm> best;

  bool failed() const { return !outcome.has_value(); }
};

/// Member counts whose volunteer risk is tolerable to the members' agent.
inline std::vector<int> member_kappa_range(const FuturesAnalytics& fa) {
  const MarketParams& m = fa.params();
  std::vector<int> out;
  for (int k = 1; k <= m.num_buyers; ++k) {
    if (fa.volunteer_risk(k) <= m.xi_volunteer) out.push_back(k);
  }
  return out;
}

inline std::vector<int> member_kappa_range(const MarketParams& m) {
  return member_kappa_range(FuturesAnalytics(m));
}

/// Member counts whose seller risk is tolerable at (p, q, r); full scan.
inline std::vector<int> seller_kappa_range(const FuturesAnalytics& fa, double p, double q,
                                           double r) {
  const MarketParams& m = fa.params();
  std::vector<int> out;
  for (int k = 1; k <= m.num_buyers; ++k) {
    if (fa.seller_risk(p, q, r, k) <= m.xi_seller) out.push_back(k);
  }
  return out;
}

inline std::vector<int> seller_kappa_range(const MarketParams& m, double p, double q,
                                           double r) {
  return seller_kappa_range(FuturesAnalytics(m), p, q, r);
}

namespace detail {

struct PriceRow {
  std::vector<CandidateTerm> terms;
  std::int64_t quotes = 0;
};

// One iteration of the outer price loop: the penalty and compensation
// loops at a fixed price, with the quotation bookkeeping of each branch.
inline PriceRow scan_price_row(const FuturesAnalytics& fa, double p,
                               const std::vector<bool>& member_ok,
                               std::optional<int> forced_kappa) {
  const MarketParams& m = fa.params();
  PriceRow row;
  std::vector<int> seller_ok;
  seller_ok.reserve(m.num_buyers);

  long long j = 1;
  auto q_of = [&](long long jj) { return static_cast<double>(jj) * m.delta_q; };
  auto q_alive = [&](long long jj) { return jj <= m.max_penalty_steps && q_of(jj) < p; };

  while (q_alive(j)) {
    long long l = 1;
    while (l <= m.max_refund_steps) {
      const double q = q_of(j);
      const double r = static_cast<double>(l) * m.delta_r;

      seller_ok.clear();
      if (forced_kappa) {
        seller_ok.push_back(*forced_kappa);
      } else {
        for (int k = 1; k <= m.num_buyers; ++k) {
          if (fa.seller_risk(p, q, r, k) <= m.xi_seller) seller_ok.push_back(k);
        }
      }

      const double mrisk = fa.member_risk(p, q);
      if (mrisk > m.xi_member) {
        ++row.quotes;
        break;
      }

      int best_k = -1;
      double best_eu = 0.0;
      for (int k : seller_ok) {
        if (!member_ok[k]) continue;
        const double eu = fa.member_utility(p, q, r, k);
        if (best_k < 0 || eu > best_eu) {
          best_k = k;
          best_eu = eu;
        }
      }

      if (best_k >= 0) {
        CandidateTerm t;
        t.p = p;
        t.q = q;
        t.r = r;
        t.kappa = best_k;
        t.member_eu = best_eu;
        t.seller_eu = fa.seller_utility(p, q, r, best_k);
        t.srisk = fa.seller_risk(p, q, r, best_k);
        t.mrisk = mrisk;
        t.vrisk = fa.volunteer_risk(best_k);
        row.terms.push_back(t);
      } else if (seller_ok.empty()) {
        // Raise the penalty and restart the compensation ladder; the
        // compensation step below still runs, as written.
        l = 1;
        ++j;
        ++row.quotes;
        if (!q_alive(j)) break;
      } else {
        ++row.quotes;
        break;
      }
      ++l;
      ++row.quotes;
    }
    ++j;
    ++row.quotes;
  }
  ++row.quotes;  // advance to the next price
  return row;
}

}  // namespace detail

/// Alternating bilateral negotiation over the (p, q, r) grid.
///
/// p runs from seller_min_price in steps of delta_p while p < p_mem_max;
/// q = j * delta_q for j <= max_penalty_steps with q < p; r = l * delta_r
/// for l <= max_refund_steps. Each (p, q, r) that passes the member risk
/// screen and leaves a tolerable member count stores the member-optimal
/// count (smallest on ties). The seller then takes the stored entry with
/// the largest expected utility, lowest (p, q, r) on ties. An empty
/// candidate set is reported as a failed trace, not thrown.
inline NegotiationTrace negotiate(const MarketParams& m, const NegotiationOptions& opt = {}) {
  const FuturesAnalytics fa(m);
  std::vector<bool> member_ok(m.num_buyers + 1, false);
  if (opt.forced_kappa) {
    const int k = *opt.forced_kappa;
    if (k < 1 || k > m.num_buyers) {
      throw std::out_of_range("forced member count outside [1, |B|]");
    }
    member_ok[k] = true;
  } else {
    for (int k : member_kappa_range(fa)) member_ok[k] = true;
  }

  const double pmax = p_mem_max(m);
  std::vector<double> prices;
  for (long long i = 0;; ++i) {
    const double p = m.seller_min_price + static_cast<double>(i) * m.delta_p;
    if (!(p < pmax - 1e-9 * m.delta_p)) break;
    prices.push_back(p);
  }

  NegotiationTrace trace;
  auto absorb = [&](detail::PriceRow& row) {
    trace.quotation_count += row.quotes;
    for (const auto& t : row.terms) {
      ++trace.candidate_count;
      if (opt.on_candidate) opt.on_candidate(t);
      if (!trace.best || t.seller_eu > trace.best->seller_eu) trace.best = t;
      if (opt.keep_candidates) trace.candidate_terms.push_back(t);
    }
  };

  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (double p : prices) {
      auto row = detail::scan_price_row(fa, p, member_ok, opt.forced_kappa);
      absorb(row);
    }
  } else {
    const std::size_t batch = static_cast<std::size_t>(workers) * 4;
    std::vector<detail::PriceRow> rows;
    for (std::size_t start = 0; start < prices.size(); start += batch) {
      const std::size_t end = std::min(prices.size(), start + batch);
      rows.assign(end - start, {});
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = start + w; i < end; i += workers) {
              rows[i - start] =
                  detail::scan_price_row(fa, prices[i], member_ok, opt.forced_kappa);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (auto& row : rows) absorb(row);
    }
  }

  if (trace.best) trace.outcome = trace.best->contract();
  return trace;
}

}  // namespace overbook

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
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "overbook/binomial.hpp"
#include "overbook/contract.hpp"
#include "overbook/offload.hpp"
#include "overbook/params.hpp"
#include "overbook/quadrature.hpp"

namespace overbook {

struct RiskReport {
  double seller_risk = 0.0;
  double member_risk = 0.0;
  double volunteer_risk = 0.0;
};

namespace detail {

inline void check_kappa(const MarketParams& m, int kappa) {
  if (kappa < 0 || kappa > m.num_buyers) {
    throw std::out_of_range("member count " + std::to_string(kappa) +
                            " outside [0, " + std::to_string(m.num_buyers) + "]");
  }
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace detail

/// Expected full-offload utility of a performer over gamma ~ U(eps1, eps2).
/// A zero-width channel range collapses to the point value.
inline double expected_pp_utility(const MarketParams& m, double price_p) {
  if (m.gamma_high_eps2 == m.gamma_low_eps1) {
    return pp_utility(m, price_p, m.gamma_low_eps1);
  }
  const double e = m.tx_power_etran;
  const double c1 = std::log1p(e * m.gamma_low_eps1);
  const double c2 = std::log1p(e * m.gamma_high_eps2);
  const double head = ((m.weight_w1 + m.weight_w2 * m.local_power_eloc) / m.buyer_cpu_fb -
                       m.weight_w1 / m.seller_cpu_fs - price_p) *
                      m.compute_demand_dcomp;
  const double tail = std::numbers::ln2 * m.data_size_dsize *
                      (m.weight_w1 + m.weight_w2 * e) * exp_integral(c1, c2) /
                      (m.bandwidth_W * e * (m.gamma_high_eps2 - m.gamma_low_eps1));
  return head - tail;
}

/// Per-kappa binomial quantities shared by every futures formula.
class FuturesAnalytics {
 public:
  explicit FuturesAnalytics(const MarketParams& m) : m_(m) {
    tables_.reserve(m.num_buyers + 1);
    truncated_.reserve(m.num_buyers + 1);
    for (int k = 0; k <= m.num_buyers; ++k) {
      tables_.emplace_back(k, m.task_arrival_prob_a);
      truncated_.push_back(tables_.back().truncated_mean(m.seller_capacity_S));
    }
    // Performer-side binomial over the other kappa - 1 members.
    for (int k = 0; k <= m.num_buyers; ++k) {
      const int others = std::max(k - 1, 0);
      vrisk_.push_back(volunteer_risk_from(BinomialTable(others, m.task_arrival_prob_a), k));
    }
    pp_base_ = overbook::expected_pp_utility(m, 0.0);
  }

  const MarketParams& params() const { return m_; }
  const BinomialTable& table(int kappa) const { return tables_.at(kappa); }

  /// E[min(X1, S)] with X1 ~ Bin(kappa, a).
  double expected_served(int kappa) const { return truncated_.at(kappa); }

  double expected_volunteers(int kappa) const {
    detail::check_kappa(m_, kappa);
    if (kappa <= m_.seller_capacity_S) return 0.0;
    return std::max(0.0, kappa * m_.task_arrival_prob_a - truncated_[kappa]);
  }

  double expected_pp_utility(double p) const {
    return pp_base_ - p * m_.compute_demand_dcomp;
  }

  double member_utility(double p, double q, double r, int kappa) const {
    detail::check_kappa(m_, kappa);
    const double a = m_.task_arrival_prob_a;
    const double d = m_.compute_demand_dcomp;
    const double upp = expected_pp_utility(p);
    if (kappa <= m_.seller_capacity_S) {
      return kappa * a * upp - kappa * q * d + kappa * a * q * d;
    }
    const double ev = expected_volunteers(kappa);
    return (kappa * a - ev) * upp - kappa * q * d + kappa * a * q * d + r * d * ev;
  }

  double seller_utility(double p, double q, double r, int kappa) const {
    detail::check_kappa(m_, kappa);
    const double a = m_.task_arrival_prob_a;
    const double d = m_.compute_demand_dcomp;
    if (kappa <= m_.seller_capacity_S) return kappa * d * (q - a * q + a * p);
    return kappa * d * (q - a * q - a * r) + (p + r) * d * truncated_[kappa];
  }

  double volunteer_risk(int kappa) const {
    detail::check_kappa(m_, kappa);
    return vrisk_[kappa];
  }

  /// Probability that realized seller futures utility is at most xi2
  /// times its expectation.
  ///
  /// Boundary indices come from the closed form and are then settled by
  /// evaluating the realized utility next to them: outcomes within 1e-12
  /// (relative) of the threshold count as inside the event.
  double seller_risk(double p, double q, double r, int kappa) const {
    detail::check_kappa(m_, kappa);
    if (kappa == 0) return 1.0;
    const BinomialTable& t = tables_[kappa];
    const int S = m_.seller_capacity_S;
    const double eu = seller_utility(p, q, r, kappa);
    const double d = m_.compute_demand_dcomp;
    const double thr = m_.xi2 * eu;
    auto inside = [&](long long k) {
      const double u = p * d * k + q * d * (kappa - k) - (p + r) * d * std::max(k - S, 0LL);
      return u <= thr + 1e-12 * std::max({1.0, std::fabs(u), std::fabs(thr)});
    };
    auto index = [](double x, long long lo, long long hi) {
      return static_cast<long long>(std::clamp(x, static_cast<double>(lo), static_cast<double>(hi)));
    };
    if (kappa <= S) {
      const double c6 = m_.xi2 * eu / (d * (p - q)) - q * kappa / (p - q);
      long long hi = index(std::floor(c6), -1, kappa);
      while (hi < kappa && inside(hi + 1)) ++hi;
      while (hi >= 0 && !inside(hi)) --hi;
      return detail::clamp01(t.cdf(hi));
    }
    const double c7 = m_.xi2 * eu / d - q * kappa;
    const double peak = S * (p - q);
    // Rising side X1 <= S - 1; X1 = S is covered by the falling side so the
    // shared endpoint is not counted twice.
    long long hi = index(std::floor(c7 / (p - q)), -1, S - 1);
    while (hi < S - 1 && inside(hi + 1)) ++hi;
    while (hi >= 0 && !inside(hi)) --hi;
    long long lo = index(std::ceil((peak - c7) / (q + r) + S), S, kappa + 1);
    while (lo > S && inside(lo - 1)) --lo;
    while (lo <= kappa && !inside(lo)) ++lo;
    const double low = hi >= 0 ? t.range(0, hi) : 0.0;
    const double high = lo <= kappa ? t.range(lo, kappa) : 0.0;
    return detail::clamp01(low + high);
  }

  /// Probability a member ends a round at or below xi1 * U_min.
  double member_risk(double p, double q) const {
    const double a = m_.task_arrival_prob_a;
    const double e = m_.tx_power_etran;
    const double d = m_.compute_demand_dcomp;
    const double c3 = (m_.weight_w1 + m_.weight_w2 * m_.local_power_eloc) * d / m_.buyer_cpu_fb -
                      m_.weight_w1 * d / m_.seller_cpu_fs + q * d - p * d;
    const double c4 = (m_.weight_w1 + m_.weight_w2 * e) * m_.data_size_dsize / m_.bandwidth_W;
    const double c5 = m_.xi1 * m_.u_min + q * d;
    if (c5 < 0.0) return 0.0;
    const double lower = c3 - c4 / std::log2(1.0 + e * m_.gamma_low_eps1);
    const double upper = c3 - c4 / std::log2(1.0 + e * m_.gamma_high_eps2);
    if (c5 < lower) return 1.0 - a;
    if (c5 > upper) return 1.0;
    if (m_.gamma_high_eps2 == m_.gamma_low_eps1) return 1.0;
    const double gamma_cut = (std::exp2(c4 / (c3 - c5)) - 1.0) / e;
    const double frac = (gamma_cut - m_.gamma_low_eps1) /
                        (m_.gamma_high_eps2 - m_.gamma_low_eps1);
    return detail::clamp01(1.0 - a + a * detail::clamp01(frac));
  }

 private:
  double volunteer_risk_from(const BinomialTable& others, int kappa) const {
    const int S = m_.seller_capacity_S;
    if (kappa <= S) return 0.0;
    // a * Pr(Bin(kappa - 1, a) >= S).
    const double a = m_.task_arrival_prob_a;
    return detail::clamp01(a * others.range(S, others.n()));
  }

  MarketParams m_;
  std::vector<BinomialTable> tables_;
  std::vector<double> truncated_;
  std::vector<double> vrisk_;
  double pp_base_ = 0.0;
};

inline double expected_volunteers(const MarketParams& m, int kappa) {
  detail::check_kappa(m, kappa);
  if (kappa <= m.seller_capacity_S) return 0.0;
  const BinomialTable t(kappa, m.task_arrival_prob_a);
  return std::max(0.0, kappa * m.task_arrival_prob_a - t.truncated_mean(m.seller_capacity_S));
}

inline double volunteer_risk(const MarketParams& m, int kappa) {
  detail::check_kappa(m, kappa);
  if (kappa <= m.seller_capacity_S) return 0.0;
  const BinomialTable others(kappa - 1, m.task_arrival_prob_a);
  return detail::clamp01(m.task_arrival_prob_a *
                         others.range(m.seller_capacity_S, kappa - 1));
}

inline double expected_member_utility(const MarketParams& m, const ForwardContract& c) {
  return FuturesAnalytics(m).member_utility(c.price_p, c.penalty_q, c.compensation_r,
                                            c.member_count_kappa);
}

inline double expected_seller_utility(const MarketParams& m, const ForwardContract& c) {
  return FuturesAnalytics(m).seller_utility(c.price_p, c.penalty_q, c.compensation_r,
                                            c.member_count_kappa);
}

inline double seller_risk(const MarketParams& m, const ForwardContract& c) {
  return FuturesAnalytics(m).seller_risk(c.price_p, c.penalty_q, c.compensation_r,
                                         c.member_count_kappa);
}

inline double member_risk(const MarketParams& m, double price_p, double penalty_q) {
  return FuturesAnalytics(m).member_risk(price_p, penalty_q);
}

inline RiskReport risk_report(const MarketParams& m, const ForwardContract& c) {
  const FuturesAnalytics fa(m);
  return {fa.seller_risk(c.price_p, c.penalty_q, c.compensation_r, c.member_count_kappa),
          fa.member_risk(c.price_p, c.penalty_q),
          fa.volunteer_risk(c.member_count_kappa)};
}

}  // namespace overbook

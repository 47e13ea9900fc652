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

#include "overbook/params.hpp"

namespace overbook {

/// Local execution time d^comp / f^b.
inline double local_time(const MarketParams& m) {
  return m.compute_demand_dcomp / m.buyer_cpu_fb;
}

inline double local_energy(const MarketParams& m) {
  return m.local_power_eloc * local_time(m);
}

/// Time to upload the whole task at channel quality gamma.
inline double transmit_time(const MarketParams& m, double gamma) {
  return m.data_size_dsize /
         (m.bandwidth_W * std::log2(1.0 + m.tx_power_etran * gamma));
}

inline double server_time(const MarketParams& m) {
  return m.compute_demand_dcomp / m.seller_cpu_fs;
}

/// Per-buyer quantities that do not depend on lambda or the price.
class OffloadProfile {
 public:
  OffloadProfile(const MarketParams& m, double gamma)
      : m_(&m),
        gamma_(gamma),
        t_loc_(local_time(m)),
        c_loc_(local_energy(m)),
        t_tx_(transmit_time(m, gamma)),
        t_s_(server_time(m)) {}

  double gamma() const { return gamma_; }
  double transmit() const { return t_tx_; }

  double edge_time(double lambda) const {
    return std::max(lambda * (t_tx_ + t_s_), (1.0 - lambda) * t_loc_);
  }

  double edge_energy(double lambda) const {
    return m_->tx_power_etran * lambda * t_tx_ +
           m_->local_power_eloc * (1.0 - lambda) * t_loc_;
  }

  /// Offload fraction at which the remote and local branches finish together.
  double breakpoint() const { return t_loc_ / (t_tx_ + t_s_ + t_loc_); }

  /// Task-holder utility for offloading a fraction lambda at price g.
  double utility(double g, double lambda) const {
    return m_->weight_w1 * (t_loc_ - edge_time(lambda)) +
           m_->weight_w2 * (c_loc_ - edge_energy(lambda)) -
           g * lambda * m_->compute_demand_dcomp;
  }

  /// Slopes of utility(g, .) below and above the breakpoint.
  double slope_below(double g) const {
    return m_->weight_w1 * t_loc_ + m_->weight_w2 * m_->local_power_eloc * t_loc_ -
           m_->weight_w2 * m_->tx_power_etran * t_tx_ -
           g * m_->compute_demand_dcomp;
  }
  double slope_above(double g) const {
    return -m_->weight_w1 * (t_tx_ + t_s_) +
           m_->weight_w2 * m_->local_power_eloc * t_loc_ -
           m_->weight_w2 * m_->tx_power_etran * t_tx_ -
           g * m_->compute_demand_dcomp;
  }

  /// Utility-maximizing offload fraction in {0, breakpoint, 1}.
  ///
  /// The utility is concave and piecewise linear in lambda, so the sign of
  /// each slope picks the candidate; every candidate is still scored
  /// directly so a near-zero slope cannot flip the answer. Ties go to the
  /// smaller fraction, and a non-positive best utility means no offload.
  double optimal_lambda(double g) const {
    const double c8 = breakpoint();
    double best = 0.0;
    double best_u = 0.0;
    if (slope_below(g) > 0.0) {
      const double u = utility(g, c8);
      if (u > best_u) {
        best = c8;
        best_u = u;
      }
      if (slope_above(g) > 0.0) {
        const double u1 = utility(g, 1.0);
        if (u1 > best_u) {
          best = 1.0;
          best_u = u1;
        }
      }
    }
    // Guard against sign tests disagreeing with direct evaluation.
    for (double cand : {c8, 1.0}) {
      const double u = utility(g, cand);
      if (u > best_u) {
        best = cand;
        best_u = u;
      }
    }
    return best_u > 0.0 ? best : 0.0;
  }

 private:
  const MarketParams* m_;
  double gamma_;
  double t_loc_;
  double c_loc_;
  double t_tx_;
  double t_s_;
};

/// max(lambda (T_tx + T_s), (1 - lambda) t_loc).
inline double edge_time(const MarketParams& m, double lambda, double gamma) {
  return OffloadProfile(m, gamma).edge_time(lambda);
}

inline double edge_energy(const MarketParams& m, double lambda, double gamma) {
  return OffloadProfile(m, gamma).edge_energy(lambda);
}

/// Utility of a member offloading the whole task at price p.
inline double pp_utility(const MarketParams& m, double price_p, double gamma) {
  const double t_tx = transmit_time(m, gamma);
  return m.weight_w1 * (local_time(m) - t_tx - server_time(m)) +
         m.weight_w2 * (local_energy(m) - m.tx_power_etran * t_tx) -
         price_p * m.compute_demand_dcomp;
}

inline double nonmember_utility(const MarketParams& m, double price_g,
                                double lambda, int alpha, double gamma) {
  if (alpha == 0) return 0.0;
  return OffloadProfile(m, gamma).utility(price_g, lambda);
}

inline double lambda_breakpoint(const MarketParams& m, double gamma) {
  return OffloadProfile(m, gamma).breakpoint();
}

inline double optimal_lambda(const MarketParams& m, double price_g, double gamma) {
  return OffloadProfile(m, gamma).optimal_lambda(price_g);
}

struct OffloadEvaluation {
  double lambda = 0.0;
  double edge_time = 0.0;
  double edge_energy = 0.0;
  double utility = 0.0;
};

inline OffloadEvaluation evaluate_offload(const MarketParams& m, double price_g,
                                          double lambda, double gamma) {
  const OffloadProfile prof(m, gamma);
  return {lambda, prof.edge_time(lambda), prof.edge_energy(lambda),
          prof.utility(price_g, lambda)};
}

}  // namespace overbook

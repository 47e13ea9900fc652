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

#include <stdexcept>
#include <string>

#include "overbook/params.hpp"

namespace overbook {

/// Negotiated futures terms. Prices are per CPU cycle.
struct ForwardContract {
  double price_p = 0.0;
  double penalty_q = 0.0;
  double compensation_r = 0.0;
  int member_count_kappa = 0;

  /// (kappa - S) / S; negative when the seller is underbooked.
  double overbooking_rate(const MarketParams& m) const {
    return static_cast<double>(member_count_kappa - m.seller_capacity_S) /
           m.seller_capacity_S;
  }

  bool operator==(const ForwardContract&) const = default;
};

class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structural checks only (price ordering, membership bounds); the price
/// window and the risk constraints are the negotiator's business.
inline void check_contract(const MarketParams& m, const ForwardContract& c) {
  if (!(c.price_p > c.penalty_q) || !(c.penalty_q > 0.0)) {
    throw ContractError("contract requires p > q > 0");
  }
  if (!(c.compensation_r > 0.0)) throw ContractError("contract requires r > 0");
  if (c.member_count_kappa < 1 || c.member_count_kappa > m.num_buyers) {
    throw ContractError("member count " + std::to_string(c.member_count_kappa) +
                        " outside [1, " + std::to_string(m.num_buyers) + "]");
  }
}

}  // namespace overbook

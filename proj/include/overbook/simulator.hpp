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
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "overbook/analytics.hpp"
#include "overbook/contract.hpp"
#include "overbook/futures.hpp"
#include "overbook/offload.hpp"
#include "overbook/params.hpp"
#include "overbook/realization.hpp"
#include "overbook/spot.hpp"

namespace overbook {

enum class Pricing { kUniform, kDifferential };

enum class Mode {
  kOverbookUniform,
  kOverbookDiff,
  kEqualUniform,
  kEqualDiff,
  kSpotUniform,
  kSpotDiff,
};

inline constexpr std::array<Mode, 6> kAllModes = {
    Mode::kOverbookUniform, Mode::kOverbookDiff, Mode::kEqualUniform,
    Mode::kEqualDiff,       Mode::kSpotUniform,  Mode::kSpotDiff};

inline std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kOverbookUniform: return "overbook-uniform";
    case Mode::kOverbookDiff: return "overbook-diff";
    case Mode::kEqualUniform: return "equal-uniform";
    case Mode::kEqualDiff: return "equal-diff";
    case Mode::kSpotUniform: return "spot-uniform";
    case Mode::kSpotDiff: return "spot-diff";
  }
  return "?";
}

inline Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes) {
    if (mode_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

inline Pricing mode_pricing(Mode mode) {
  switch (mode) {
    case Mode::kOverbookUniform:
    case Mode::kEqualUniform:
    case Mode::kSpotUniform:
      return Pricing::kUniform;
    default:
      return Pricing::kDifferential;
  }
}

inline bool mode_has_futures(Mode mode) {
  return mode != Mode::kSpotUniform && mode != Mode::kSpotDiff;
}

inline bool mode_is_equal(Mode mode) {
  return mode == Mode::kEqualUniform || mode == Mode::kEqualDiff;
}

/// Scalars and per-buyer values of one trading round.
struct TradingMetrics {
  std::int64_t round = 0;
  int kappa = 0;
  int performers = 0;        // members holding a task
  int volunteers = 0;
  int spot_capacity = 0;     // S'
  int spot_trades = 0;
  double seller_futures_utility = 0.0;
  double seller_spot_utility = 0.0;
  double seller_utility = 0.0;
  double member_utility = 0.0;
  double nonmember_utility = 0.0;
  double buyer_utility = 0.0;
  double dmc = 0.0;          // quotations this round
  double dml = 0.0;          // s
  double tct = 0.0;          // s
  double tur = 1.0;
  double rur = 0.0;
  double energy = 0.0;       // J
  double cycles_served = 0.0;
  std::vector<double> buyer_utilities;
  std::vector<double> buyer_tct;
  std::vector<int> volunteer_ids;
};

/// Indices (into the member vectors) of the performers displaced when
/// more than S members hold a task: those with the worst channels, lower
/// index first on ties.
inline std::vector<int> select_volunteers(std::span<const int> alphas,
                                          std::span<const double> gammas, int capacity_S) {
  if (alphas.size() != gammas.size()) {
    throw std::invalid_argument("select_volunteers: alpha/gamma length mismatch");
  }
  std::vector<int> performers;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] == 1) performers.push_back(static_cast<int>(i));
  }
  const int excess = static_cast<int>(performers.size()) - capacity_S;
  if (excess <= 0) return {};
  std::stable_sort(performers.begin(), performers.end(),
                   [&](int x, int y) { return gammas[x] < gammas[y]; });
  performers.resize(excess);
  std::sort(performers.begin(), performers.end());
  return performers;
}

/// Plays one round. Buyers 0..kappa-1 are members, the rest non-members.
///
/// Task completion time follows the literal non-member form: a buyer left
/// out of the spot market is charged the local execution time whether or
/// not it held a task, while a defaulting member contributes nothing.
/// A round with no completion time at all has TUR 1.
inline TradingMetrics run_trading(const MarketParams& m,
                                  const std::optional<ForwardContract>& contract,
                                  const TradingRealization& rz, Pricing pricing) {
  const int B = m.num_buyers;
  const int S = m.seller_capacity_S;
  const double d = m.compute_demand_dcomp;
  const double t_loc = local_time(m);
  const double c_loc = local_energy(m);
  if (static_cast<int>(rz.alpha.size()) != B || static_cast<int>(rz.gamma.size()) != B ||
      static_cast<int>(rz.e2e_delay.size()) != B) {
    throw std::invalid_argument("realization length differs from num_buyers");
  }
  const int kappa = contract ? contract->member_count_kappa : 0;
  if (contract) check_contract(m, *contract);

  TradingMetrics tm;
  tm.kappa = kappa;
  tm.buyer_utilities.assign(B, 0.0);
  tm.buyer_tct.assign(B, 0.0);

  // Futures side.
  double dml_sum = 0.0;
  if (kappa > 0) {
    const double p = contract->price_p, q = contract->penalty_q, r = contract->compensation_r;
    const std::span<const int> ma(rz.alpha.data(), kappa);
    const std::span<const double> mg(rz.gamma.data(), kappa);
    tm.volunteer_ids = select_volunteers(ma, mg, S);
    std::vector<char> is_vol(kappa, 0);
    for (int v : tm.volunteer_ids) is_vol[v] = 1;
    for (int i = 0; i < kappa; ++i) tm.performers += ma[i];
    tm.volunteers = static_cast<int>(tm.volunteer_ids.size());

    for (int i = 0; i < kappa; ++i) {
      double u = 0.0;
      double tct = 0.0;
      if (ma[i] == 0) {
        u = -q * d;
      } else if (is_vol[i]) {
        u = r * d;
        tct = t_loc;
        tm.energy += c_loc;
      } else {
        const OffloadProfile prof(m, mg[i]);
        u = pp_utility(m, p, mg[i]);
        tct = prof.edge_time(1.0);
        tm.energy += prof.edge_energy(1.0);
      }
      tm.buyer_utilities[i] = u;
      tm.buyer_tct[i] = tct;
      tm.member_utility += u;
    }
    tm.seller_futures_utility = p * d * tm.performers + q * d * (kappa - tm.performers) -
                                (p + r) * d * tm.volunteers;
  }
  const int served_members = std::min(tm.performers, S);
  tm.spot_capacity = S - served_members;

  // Spot side.
  std::vector<int> nonmembers(B - kappa);
  std::iota(nonmembers.begin(), nonmembers.end(), kappa);
  const SpotOutcome spot =
      pricing == Pricing::kUniform
          ? spot_uniform(m, rz, nonmembers, tm.spot_capacity)
          : spot_differential(m, rz, nonmembers, tm.spot_capacity);
  tm.seller_spot_utility = spot.seller_spot_utility;
  tm.dmc = static_cast<double>(spot.total_quotes);
  double traded_fraction = 0.0;
  for (std::size_t k = 0; k < nonmembers.size(); ++k) {
    const int n = nonmembers[k];
    const int alpha = rz.alpha[n];
    const double dml = alpha * spot.quote_counts[k] * rz.e2e_delay[n];
    dml_sum += dml;
    double tct = dml;
    double u = 0.0;
    if (spot.trade_decision_X[k]) {
      const OffloadProfile prof(m, rz.gamma[n]);
      const double lam = spot.offload_rates_Lambda[k];
      u = prof.utility(spot.prices_G[k], lam);
      tct += alpha * prof.edge_time(lam);
      tm.energy += prof.edge_energy(lam);
      traded_fraction += lam;
      ++tm.spot_trades;
    } else {
      tct += t_loc;
      if (alpha) tm.energy += c_loc;
    }
    tm.buyer_utilities[n] = u;
    tm.buyer_tct[n] = tct;
    tm.nonmember_utility += u;
  }

  tm.dml = dml_sum;
  tm.tct = std::accumulate(tm.buyer_tct.begin(), tm.buyer_tct.end(), 0.0);
  tm.tur = tm.tct > 0.0 ? 1.0 - tm.dml / tm.tct : 1.0;
  tm.cycles_served = served_members * d + traded_fraction * d;
  tm.rur = tm.cycles_served / (S * d);
  tm.seller_utility = tm.seller_futures_utility + tm.seller_spot_utility;
  tm.buyer_utility = tm.member_utility + tm.nonmember_utility;
  return tm;
}

class NegotiationFailed : public std::runtime_error {
 public:
  NegotiationFailed(std::string mode, std::int64_t quotations)
      : std::runtime_error("negotiation failed for mode " + mode + " after " +
                           std::to_string(quotations) + " quotations"),
        quotations_(quotations) {}
  std::int64_t quotations() const { return quotations_; }

 private:
  std::int64_t quotations_;
};

struct CampaignOptions {
  int workers = 1;
  /// Skip negotiation and use these terms (futures modes only).
  std::optional<ForwardContract> contract;
  bool keep_buyer_vectors = false;
};

/// Aggregates of a campaign. Sums are folds of the per-round records in
/// round order.
struct CampaignSummary {
  Mode mode = Mode::kSpotUniform;
  std::int64_t rounds = 0;
  std::uint64_t seed = 0;
  std::optional<ForwardContract> contract;
  std::int64_t negotiation_quotes = 0;
  std::int64_t negotiation_candidates = 0;

  double sum_dmc = 0.0;
  double sum_dml = 0.0;
  double sum_tct = 0.0;
  double sum_energy = 0.0;
  double sum_buyer_utility = 0.0;
  double sum_member_utility = 0.0;
  double sum_nonmember_utility = 0.0;
  double sum_seller_utility = 0.0;
  double sum_seller_futures_utility = 0.0;
  double sum_seller_spot_utility = 0.0;
  double sum_volunteers = 0.0;
  double sum_tur = 0.0;
  double sum_rur = 0.0;
  double mean_e2e = 0.0;

  double avg_tur() const { return rounds ? sum_tur / rounds : 0.0; }
  double avg_rur() const { return rounds ? sum_rur / rounds : 0.0; }

  std::vector<TradingMetrics> records;
};

inline void fold_record(CampaignSummary& s, const TradingMetrics& r) {
  s.sum_dmc += r.dmc;
  s.sum_dml += r.dml;
  s.sum_tct += r.tct;
  s.sum_energy += r.energy;
  s.sum_buyer_utility += r.buyer_utility;
  s.sum_member_utility += r.member_utility;
  s.sum_nonmember_utility += r.nonmember_utility;
  s.sum_seller_utility += r.seller_utility;
  s.sum_seller_futures_utility += r.seller_futures_utility;
  s.sum_seller_spot_utility += r.seller_spot_utility;
  s.sum_volunteers += r.volunteers;
  s.sum_tur += r.tur;
  s.sum_rur += r.rur;
}

/// Contract used by a mode: negotiated with a free member count for
/// overbooking, with the count pinned to S for equal booking, none for
/// spot-only trading.
inline NegotiationTrace negotiate_for_mode(const MarketParams& m, Mode mode, int workers = 1) {
  NegotiationOptions opt;
  opt.keep_candidates = false;
  opt.workers = workers;
  if (mode_is_equal(mode)) opt.forced_kappa = m.seller_capacity_S;
  return negotiate(m, opt);
}

inline CampaignSummary run_campaign(const MarketParams& m, Mode mode, std::int64_t rounds,
                                    std::uint64_t seed, const CampaignOptions& opt = {}) {
  if (rounds < 1) throw std::invalid_argument("campaign needs at least one round");
  CampaignSummary s;
  s.mode = mode;
  s.rounds = rounds;
  s.seed = seed;
  if (mode_has_futures(mode)) {
    if (opt.contract) {
      s.contract = opt.contract;
    } else {
      const NegotiationTrace tr = negotiate_for_mode(m, mode, opt.workers);
      s.negotiation_quotes = tr.quotation_count;
      s.negotiation_candidates = tr.candidate_count;
      if (tr.failed()) throw NegotiationFailed(std::string(mode_name(mode)), tr.quotation_count);
      s.contract = tr.outcome;
    }
  }

  const Pricing pricing = mode_pricing(mode);
  s.records.resize(static_cast<std::size_t>(rounds));
  std::vector<double> e2e(static_cast<std::size_t>(rounds), 0.0);
  auto play = [&](std::int64_t i) {
    RoundStream rng(seed, static_cast<std::uint64_t>(i));
    const TradingRealization rz = sample_realization(m, rng);
    TradingMetrics tm = run_trading(m, s.contract, rz, pricing);
    tm.round = i;
    if (!opt.keep_buyer_vectors) {
      tm.buyer_utilities.clear();
      tm.buyer_utilities.shrink_to_fit();
      tm.buyer_tct.clear();
      tm.buyer_tct.shrink_to_fit();
    }
    e2e[i] = std::accumulate(rz.e2e_delay.begin(), rz.e2e_delay.end(), 0.0) /
             static_cast<double>(rz.e2e_delay.size());
    s.records[i] = std::move(tm);
  };

  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (std::int64_t i = 0; i < rounds; ++i) play(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::int64_t i = w; i < rounds; i += workers) play(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const auto& r : s.records) fold_record(s, r);
  s.mean_e2e = std::accumulate(e2e.begin(), e2e.end(), 0.0) / static_cast<double>(rounds);
  return s;
}

}  // namespace overbook

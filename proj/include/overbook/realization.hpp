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

#include <cstdint>
#include <random>
#include <vector>

#include "overbook/params.hpp"

namespace overbook {

/// One round's sampled uncertainty: task arrivals, channel qualities and
/// per-buyer end-to-end delays (drawn once per buyer per round).
struct TradingRealization {
  std::vector<int> alpha;
  std::vector<double> gamma;
  std::vector<double> e2e_delay;

  bool operator==(const TradingRealization&) const = default;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random stream owned by a single round. Seeding is a pure function of
/// (campaign seed, round index), so rounds can run in any order.
class RoundStream {
 public:
  RoundStream(std::uint64_t seed, std::uint64_t round)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(round + 0x632be59bd9b4e019ULL))) {}

  explicit RoundStream(std::uint64_t seed) : RoundStream(seed, 0) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int bernoulli(double a) { return uniform() < a ? 1 : 0; }

 private:
  std::mt19937_64 engine_;
};

/// Draws all arrivals, then all channel qualities, then all delays.
inline TradingRealization sample_realization(const MarketParams& m,
                                             RoundStream& rng) {
  const auto n = static_cast<std::size_t>(m.num_buyers);
  TradingRealization r;
  r.alpha.resize(n);
  r.gamma.resize(n);
  r.e2e_delay.resize(n);
  for (auto& a : r.alpha) a = rng.bernoulli(m.task_arrival_prob_a);
  for (auto& g : r.gamma) g = rng.uniform(m.gamma_low_eps1, m.gamma_high_eps2);
  for (auto& d : r.e2e_delay) d = rng.uniform(m.e2e_delay_low, m.e2e_delay_high);
  return r;
}

}  // namespace overbook

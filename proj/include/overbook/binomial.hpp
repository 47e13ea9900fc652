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
#include <stdexcept>
#include <string>
#include <vector>

namespace overbook {

/// Compensated (Neumaier) running sum.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// C(n,k) a^k (1-a)^(n-k), evaluated in log space.
inline double binom_pmf(int k, int n, double a) {
  if (n < 0 || k < 0 || k > n) {
    throw std::out_of_range("binom_pmf: k=" + std::to_string(k) +
                            " outside [0, " + std::to_string(n) + "]");
  }
  if (a <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (a >= 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(a) + (n - k) * std::log1p(-a));
}

/// PMF of Bin(n, a) with compensated prefix sums.
class BinomialTable {
 public:
  BinomialTable() = default;
  BinomialTable(int n, double a) : n_(n), pmf_(n + 1), prefix_(n + 2, 0.0) {
    for (int k = 0; k <= n; ++k) pmf_[k] = binom_pmf(k, n, a);
    NeumaierSum acc;
    for (int k = 0; k <= n; ++k) {
      acc.add(pmf_[k]);
      prefix_[k + 1] = acc.value();
    }
  }

  int n() const { return n_; }
  double pmf(int k) const { return pmf_.at(k); }

  /// Pr(X <= k); 0 for k < 0 and 1-ish for k >= n.
  double cdf(long long k) const {
    if (k < 0) return 0.0;
    if (k >= n_) return prefix_[n_ + 1];
    return prefix_[k + 1];
  }

  /// sum_{i=lo}^{hi} pmf(i), clipped to [0, n]; 0 when empty.
  double range(long long lo, long long hi) const {
    if (lo < 0) lo = 0;
    if (hi > n_) hi = n_;
    if (lo > hi) return 0.0;
    if (lo == 0) return prefix_[hi + 1];
    // Summing the short tail directly keeps relative accuracy.
    NeumaierSum acc;
    for (long long i = lo; i <= hi; ++i) acc.add(pmf_[i]);
    return acc.value();
  }

  /// E[min(X, cap)] = sum_{i<cap} i pmf(i) + cap * sum_{i>=cap} pmf(i).
  double truncated_mean(int cap) const {
    NeumaierSum acc;
    for (int i = 0; i < cap && i <= n_; ++i) acc.add(i * pmf_[i]);
    NeumaierSum tail;
    for (int i = std::max(cap, 0); i <= n_; ++i) tail.add(pmf_[i]);
    acc.add(cap * tail.value());
    return acc.value();
  }

 private:
  int n_ = 0;
  std::vector<double> pmf_;
  std::vector<double> prefix_;
};

}  // namespace overbook

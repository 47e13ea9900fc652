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


// Acceptance run: one PASS/FAIL line per criterion. With arguments, only
// the listed criteria run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "overbook.hpp"
#include "overbook/oracles.hpp"

namespace ob = overbook;

namespace {

struct Verdict {
  bool pass = true;
  std::string summary;
};

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  std::printf("    ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ob::MarketParams with(std::initializer_list<std::pair<std::string, double>> kv) {
  ob::RawConfig raw = ob::reference_config();
  for (const auto& [k, v] : kv) raw[k] = v;
  return ob::validate_params(raw);
}

// 1: closed forms against enumeration of every outcome of the member count.
Verdict closed_forms() {
  const double tol = 1e-10;
  double dev_v = 0, dev_vr = 0, dev_sr = 0, dev_su = 0;
  long long checks = 0;
  for (double a : {0.1, 0.5, 0.76, 0.9, 1.0}) {
    const ob::MarketParams m = with({{"task_arrival_prob_a", a}});
    const ob::FuturesAnalytics fa(m);
    const double pmax = ob::p_mem_max(m);
    for (int k = 1; k <= 30; ++k) {
      dev_v = std::max(dev_v, std::fabs(fa.expected_volunteers(k) - ob::oracle::expected_volunteers(m, k)));
      dev_vr = std::max(dev_vr, std::fabs(fa.volunteer_risk(k) - ob::oracle::volunteer_risk(m, k)));
      for (double fp : {0.2, 0.55, 0.9}) {
        for (double fq : {0.1, 0.5, 0.9}) {
          for (double fr : {0.1, 0.6, 1.0}) {
            const double p = fp * pmax, q = fq * p, r = fr * pmax;
            const double eu = ob::oracle::seller_utility(m, p, q, r, k);
            dev_su = std::max(dev_su, std::fabs(fa.seller_utility(p, q, r, k) - eu));
            dev_sr = std::max(dev_sr, std::fabs(fa.seller_risk(p, q, r, k) -
                                                ob::oracle::seller_risk(m, p, q, r, k, eu)));
            ++checks;
          }
        }
      }
    }
  }
  detail("E[V] %.3g, VRisk %.3g, SRisk %.3g, seller EU %.3g over %lld term checks", dev_v, dev_vr,
         dev_sr, dev_su, checks);
  const double worst = std::max({dev_v, dev_vr, dev_sr, dev_su});
  return {worst <= tol, fmt("max abs deviation %.3g (tol %.0e)", worst, tol)};
}

// 2: member risk and expected full-offload utility against sampling.
Verdict monte_carlo() {
  const ob::MarketParams m = ob::reference_params();
  const ob::FuturesAnalytics fa(m);
  const double pmax = ob::p_mem_max(m);
  const std::int64_t n = 10'000'000;
  double worst = 0.0;
  int seed = 0;
  // Three prices sit between the ceiling and the price at which even the
  // best channel stops gaining, where only part of the channels lose.
  const double p_top = ob::pp_utility(m, 0.0, m.gamma_high_eps2) / m.compute_demand_dcomp;
  std::vector<double> prices = {0.2 * pmax, 0.9 * pmax};
  for (double f : {0.25, 0.5, 0.75}) prices.push_back(pmax + f * (p_top - pmax));
  for (double p : prices) {
    for (double fq : {0.2, 0.8}) {
      const double fp = p / pmax;
      const double q = fq * p;
      ++seed;
      const auto pp = ob::oracle::mc_pp_utility(m, p, n, 1000 + seed);
      const auto mr = ob::oracle::mc_member_risk(m, p, q, n, 2000 + seed);
      const double zp = std::fabs(fa.expected_pp_utility(p) - pp.mean) / pp.std_error;
      const double se = mr.std_error > 0 ? mr.std_error : 1.0 / n;
      const double zm = std::fabs(fa.member_risk(p, q) - mr.mean) / se;
      detail("p=%.4f pmax q=%.1f p: E[U^PP] z=%.2f, MRisk %.5f vs %.5f z=%.2f", fp, fq, zp,
             fa.member_risk(p, q), mr.mean, zm);
      worst = std::max({worst, zp, zm});
    }
  }
  return {worst <= 3.0, fmt("max |z| %.2f over 10 grid points (limit 3)", worst)};
}

// 3: offload best response against a fine lambda grid.
Verdict offload_optimality() {
  const ob::MarketParams m = ob::reference_params();
  const double pmax = ob::p_mem_max(m);
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> price(0.0, 1.5 * pmax);
  std::uniform_real_distribution<double> chan(m.gamma_low_eps1, m.gamma_high_eps2);
  int bad_set = 0, bad_value = 0;
  double worst = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const double g = price(rng), gamma = chan(rng);
    const ob::OffloadProfile prof(m, gamma);
    const double lam = prof.optimal_lambda(g);
    if (!(lam == 0.0 || lam == 1.0 || lam == prof.breakpoint())) ++bad_set;
    const double grid = ob::oracle::grid_best_utility(m, g, gamma, 1e-5);
    const double gap = grid - prof.utility(g, lam);
    worst = std::max(worst, gap / std::max(std::fabs(grid), 1e-300));
    if (gap > 1e-4 * std::fabs(grid)) ++bad_value;
  }
  detail("%d off-candidate answers, %d below tolerance, worst relative shortfall %.3g", bad_set,
         bad_value, worst);
  return {bad_set == 0 && bad_value == 0,
          "10000 pairs, " + std::to_string(bad_set + bad_value) + " violations"};
}

// 4: knapsack solvers against exhaustive search.
Verdict knapsack_exactness() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int value_err = 0, overweight = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 15);
    std::vector<ob::KnapsackItem> items;
    for (int i = 0; i < n; ++i) items.push_back({u(rng), u(rng), i, 0.0});
    const double cap = 4.0 * u(rng);
    const auto sol = ob::solve_binary(items, cap);
    const double want = ob::oracle::exhaustive_binary(items, cap).value;
    double w = 0.0;
    for (int i = 0; i < n; ++i) w += sol.selected(i) ? items[i].weight : 0.0;
    worst = std::max(worst, std::fabs(sol.value - want));
    value_err += std::fabs(sol.value - want) > 1e-12;
    overweight += w > cap;
  }
  for (int inst = 0; inst < 1000; ++inst) {
    const int ng = 1 + static_cast<int>(rng() % 8);
    std::vector<std::vector<ob::KnapsackItem>> groups(ng);
    for (int g = 0; g < ng; ++g) {
      const int no = 1 + static_cast<int>(rng() % 5);
      for (int k = 0; k < no; ++k) groups[g].push_back({u(rng), u(rng), g, 0.0});
    }
    const double cap = 3.0 * u(rng);
    const auto sol = ob::solve_grouped(groups, cap);
    const double want = ob::oracle::exhaustive_grouped(groups, cap).value;
    double w = 0.0;
    for (int g = 0; g < ng; ++g) w += sol.selected(g) ? groups[g][sol.choice[g]].weight : 0.0;
    worst = std::max(worst, std::fabs(sol.value - want));
    value_err += std::fabs(sol.value - want) > 1e-12;
    overweight += w > cap;
  }
  detail("2000 instances: %d value mismatches, %d over capacity, max deviation %.3g", value_err,
         overweight, worst);
  return {value_err == 0 && overweight == 0,
          std::to_string(value_err) + " mismatches, " + std::to_string(overweight) + " overweight"};
}

// Contract found once and shared by criteria 5 and 6.
const ob::NegotiationTrace& reference_negotiation() {
  static const ob::NegotiationTrace tr = [] {
    ob::NegotiationOptions opt;
    opt.keep_candidates = false;
    return ob::negotiate(ob::reference_params(), opt);
  }();
  return tr;
}

// 5: negotiated contract on the reference scenario.
Verdict negotiation() {
  const ob::MarketParams m = ob::reference_params();
  const auto& tr = reference_negotiation();
  if (tr.failed()) return {false, "negotiation failed"};
  const ob::ForwardContract c = *tr.outcome;
  const int k = c.member_count_kappa;
  // Independent re-check by enumeration.
  const double pmax = ob::p_mem_max(m);
  const double eu = ob::oracle::seller_utility(m, c.price_p, c.penalty_q, c.compensation_r, k);
  const double srisk = ob::oracle::seller_risk(m, c.price_p, c.penalty_q, c.compensation_r, k, eu);
  const double vrisk = ob::oracle::volunteer_risk(m, k);
  const auto mr = ob::oracle::mc_member_risk(m, c.price_p, c.penalty_q, 2'000'000, 99);
  const double mrisk = ob::member_risk(m, c.price_p, c.penalty_q);
  const bool c1 = srisk <= m.xi_seller;
  const bool c2 = vrisk <= m.xi_volunteer;
  const bool c3 = mrisk <= m.xi_member && mr.mean <= m.xi_member + 3 * mr.std_error;
  const bool c4 = c.price_p >= m.seller_min_price && c.price_p < pmax;
  const bool c5 = c.penalty_q > 0 && c.penalty_q < c.price_p;
  const bool c6 = c.compensation_r > 0 && c.compensation_r <= pmax * (1 + 1e-12);
  const bool c7 = k > m.seller_capacity_S && k <= m.num_buyers;
  const bool c8 = std::fabs(eu - tr.best->seller_eu) <= 1e-9 * std::fabs(eu);
  const double d = m.compute_demand_dcomp;
  detail("kappa*=%d p=%.6f q=%.6f r=%.6f per task, overbooking rate %.3f", k, c.price_p * d,
         c.penalty_q * d, c.compensation_r * d, c.overbooking_rate(m));
  detail("seller EU %.6f, SRisk %.4f (<= %.2f), VRisk %.4f (<= %.2f), MRisk %.4f / MC %.4f (<= %.2f)",
         eu, srisk, m.xi_seller, vrisk, m.xi_volunteer, mrisk, mr.mean, m.xi_member);
  detail("%lld candidates, %lld quotations", static_cast<long long>(tr.candidate_count),
         static_cast<long long>(tr.quotation_count));

  const bool held = c1 && c2 && c3 && c4 && c5 && c6 && c7 && c8;
  const bool ok = held && k >= 17 && k <= 23;
  return {ok, "kappa* = " + std::to_string(k) + " (band [17, 23]), constraints " +
                  (held ? "hold" : "violated")};
}

// 6: simulated overbooking rounds against the closed forms.
Verdict closure() {
  const ob::MarketParams m = ob::reference_params();
  const auto& tr = reference_negotiation();
  if (tr.failed()) return {false, "no contract"};
  const ob::ForwardContract c = *tr.outcome;
  const int k = c.member_count_kappa;
  const std::int64_t n = 100'000;
  ob::CampaignOptions opt;
  opt.contract = c;
  const auto s = ob::run_campaign(m, ob::Mode::kOverbookUniform, n, 2026, opt);
  const ob::FuturesAnalytics fa(m);
  const double eu = fa.seller_utility(c.price_p, c.penalty_q, c.compensation_r, k);
  const double thr = m.xi2 * eu;
  double v1 = 0, v2 = 0, f1 = 0, f2 = 0, hits = 0;
  for (const auto& r : s.records) {
    v1 += r.volunteers;
    v2 += static_cast<double>(r.volunteers) * r.volunteers;
    // A member's chance of holding a task while more than S members do.
    const double f = r.performers > m.seller_capacity_S ? static_cast<double>(r.performers) / k : 0.0;
    f1 += f;
    f2 += f * f;
    const double u = r.seller_futures_utility;
    if (u <= thr + 1e-12 * std::max({1.0, std::fabs(u), std::fabs(thr)})) hits += 1;
  }
  auto z = [&](double s1, double s2, double want) {
    const double mean = s1 / n;
    const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / n);
    return std::fabs(mean - want) / (se > 0 ? se : 1.0 / n);
  };
  const double zv = z(v1, v2, fa.expected_volunteers(k));
  const double zf = z(f1, f2, fa.volunteer_risk(k));
  const double sr = fa.seller_risk(c.price_p, c.penalty_q, c.compensation_r, k);
  const double se_s = std::sqrt(sr * (1 - sr) / n);
  const double zs = std::fabs(hits / n - sr) / (se_s > 0 ? se_s : 1.0 / n);
  detail("E[V] %.5f vs %.5f (z=%.2f)", v1 / n, fa.expected_volunteers(k), zv);
  detail("VRisk %.5f vs %.5f (z=%.2f)", f1 / n, fa.volunteer_risk(k), zf);
  detail("SRisk %.5f vs %.5f (z=%.2f)", hits / n, sr, zs);
  const double worst = std::max({zv, zf, zs});
  return {worst <= 3.0, fmt("100000 rounds, max |z| %.2f (limit 3)", worst)};
}

// 7: cross-mode orderings.
Verdict orderings() {
  const ob::MarketParams m = ob::reference_params();
  const std::int64_t n = 10'000;
  const auto over = ob::negotiate_for_mode(m, ob::Mode::kOverbookUniform);
  const auto equal = ob::negotiate_for_mode(m, ob::Mode::kEqualUniform);
  if (over.failed() || equal.failed()) return {false, "negotiation failed"};
  std::vector<ob::CampaignSummary> runs;
  for (ob::Mode mode : ob::kAllModes) {
    ob::CampaignOptions opt;
    if (ob::mode_has_futures(mode)) opt.contract = ob::mode_is_equal(mode) ? equal.outcome : over.outcome;
    const auto t0 = std::chrono::steady_clock::now();
    runs.push_back(ob::run_campaign(m, mode, n, 7, opt));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto& s = runs.back();
    s.records.clear();
    detail("%-16s DMC %.0f DML %.2f s TUR %.4f RUR %.4f TCT %.1f s (%.0f s)",
           std::string(ob::mode_name(mode)).c_str(), s.sum_dmc, s.sum_dml, s.avg_tur(),
           s.avg_rur(), s.sum_tct, secs);
  }
  // kAllModes order: overbook, equal, spot for uniform then differential.
  const int uni[3] = {0, 2, 4}, dif[3] = {1, 3, 5};
  bool a = true, b = true, c = true, d = true, e = true;
  for (const int* rule : {uni, dif}) {
    const auto& o = runs[rule[0]];
    const auto& q = runs[rule[1]];
    const auto& s = runs[rule[2]];
    a = a && o.sum_dmc < q.sum_dmc && q.sum_dmc < s.sum_dmc;
    b = b && o.sum_dml < q.sum_dml && q.sum_dml < s.sum_dml;
    c = c && o.avg_tur() > q.avg_tur() && q.avg_tur() > s.avg_tur();
    e = e && o.sum_tct < q.sum_tct && q.sum_tct < s.sum_tct;
  }
  double worst_ratio = 0.0;
  for (const auto& s : runs) {
    if (s.sum_dmc == 0) continue;
    const double ratio = s.sum_dml / (s.sum_dmc * s.mean_e2e);
    worst_ratio = std::max(worst_ratio, std::fabs(ratio - 1.0));
  }
  b = b && worst_ratio <= 0.05;
  std::string low;
  for (int i : uni) {
    if (runs[i].avg_rur() < 0.99) {
      d = false;
      low += " " + std::string(ob::mode_name(runs[i].mode)) + fmt("=%.4f", runs[i].avg_rur());
    }
  }
  detail("(a) DMC %s, (b) DML %s (max |DML/(DMC*mean e2e) - 1| = %.4f), (c) TUR %s", a ? "ok" : "FAILED",
         b ? "ok" : "FAILED", worst_ratio, c ? "ok" : "FAILED");
  detail("(d) RUR >= 0.99 %s%s, (e) TCT %s", d ? "ok" : "FAILED:", low.c_str(), e ? "ok" : "FAILED");
  std::string sub;
  for (auto [name, ok] : {std::pair{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"e", e}}) {
    sub += std::string(ok ? "" : "!") + name;
  }
  return {a && b && c && d && e, "10000 rounds x 6 modes, sub-criteria " + sub};
}

// 8: differential pricing earns at least as much as uniform pricing.
Verdict spot_dominance() {
  const ob::MarketParams m = ob::reference_params();
  std::mt19937_64 rng(808);
  int bad = 0;
  double worst = 0.0;
  for (int round = 0; round < 1000; ++round) {
    ob::RoundStream rs(808, round);
    const auto rz = ob::sample_realization(m, rs);
    const int kappa = static_cast<int>(rng() % 21);
    std::vector<int> nonmembers;
    for (int i = kappa; i < m.num_buyers; ++i) nonmembers.push_back(i);
    const int cap = 1 + static_cast<int>(rng() % m.seller_capacity_S);
    const double u = ob::spot_uniform(m, rz, nonmembers, cap).seller_spot_utility;
    const double d = ob::spot_differential(m, rz, nonmembers, cap).seller_spot_utility;
    if (d < u) {
      ++bad;
      worst = std::max(worst, u - d);
    }
  }
  detail("1000 rounds, %d with differential below uniform (worst shortfall %.3g)", bad, worst);
  return {bad == 0, std::to_string(bad) + " violations"};
}

std::string campaign_csv(const ob::MarketParams& m, ob::Mode mode, std::int64_t rounds,
                         int workers) {
  ob::CampaignOptions opt;
  opt.workers = workers;
  const auto s = ob::run_campaign(m, mode, rounds, 99, opt);
  std::ostringstream os;
  ob::write_rounds_csv(os, m, s);
  return os.str();
}

// 9: repeated campaigns, any worker count, identical bytes.
Verdict determinism() {
  const ob::MarketParams m = ob::reference_params();
  bool ok = true;
  for (auto [mode, rounds] : {std::pair{ob::Mode::kOverbookDiff, std::int64_t{1000}},
                              {ob::Mode::kSpotUniform, std::int64_t{500}}}) {
    const std::string ref = campaign_csv(m, mode, rounds, 1);
    for (int w : {1, 2, 4}) {
      const bool same = campaign_csv(m, mode, rounds, w) == ref;
      detail("%s, %lld rounds, %d worker(s): %s", std::string(ob::mode_name(mode)).c_str(),
             static_cast<long long>(rounds), w, same ? "identical" : "DIFFERENT");
      ok = ok && same;
    }
  }
  return {ok, ok ? "per-round CSVs byte-identical" : "per-round CSVs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"closed forms vs enumeration", closed_forms},
      {"member risk and E[U^PP] vs Monte Carlo", monte_carlo},
      {"offload best response", offload_optimality},
      {"knapsack exactness", knapsack_exactness},
      {"negotiated contract", negotiation},
      {"simulation closure", closure},
      {"cross-mode orderings", orderings},
      {"spot pricing dominance", spot_dominance},
      {"determinism", determinism},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    pick.insert(id);
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first,
                v.summary.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}

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


// Command-line driver: negotiate, simulate, lambda-sweep, risk-table,
// validate. Exit codes: 0 ok, 2 configuration or I/O error, 3 negotiation
// failure, 4 validation failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "overbook.hpp"
#include "overbook/validation.hpp"

namespace fs = std::filesystem;
using namespace overbook;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNegotiation = 3;
constexpr int kExitValidation = 4;

struct Common {
  std::string config;
  std::string out = ".";
  int workers = 1;
};

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  sub->add_option("--config", c.config, "flat JSON configuration file")->required();
  if (with_out) sub->add_option("--out", c.out, "output directory");
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

int cmd_negotiate(const Common& c, bool no_trace) {
  const MarketParams m = load_params(c.config);
  NegotiationOptions opt;
  opt.keep_candidates = false;
  opt.workers = c.workers;
  std::ofstream trace_os;
  std::optional<TraceCsvWriter> writer;
  if (!no_trace) {
    trace_os = open_output(fs::path(c.out) / "negotiate_trace.csv");
    writer.emplace(trace_os, m);
    opt.on_candidate = [&](const CandidateTerm& t) { (*writer)(t); };
  }
  const NegotiationTrace tr = negotiate(m, opt);
  write_json(fs::path(c.out) / "negotiate_contract.json", negotiation_json(m, tr));
  std::printf("quotations %lld, candidates %lld\n", static_cast<long long>(tr.quotation_count),
              static_cast<long long>(tr.candidate_count));
  if (tr.failed()) {
    std::fprintf(stderr, "negotiation failed: no admissible contract terms\n");
    return kExitNegotiation;
  }
  const double d = m.compute_demand_dcomp;
  std::printf("contract p=%s q=%s r=%s (per task) kappa=%d overbooking_rate=%s\n",
              num(tr.outcome->price_p * d).c_str(), num(tr.outcome->penalty_q * d).c_str(),
              num(tr.outcome->compensation_r * d).c_str(), tr.outcome->member_count_kappa,
              num(tr.outcome->overbooking_rate(m)).c_str());
  std::printf("seller_eu=%s member_eu=%s srisk=%s mrisk=%s vrisk=%s\n",
              num(tr.best->seller_eu).c_str(), num(tr.best->member_eu).c_str(),
              num(tr.best->srisk).c_str(), num(tr.best->mrisk).c_str(),
              num(tr.best->vrisk).c_str());
  return kExitOk;
}

int cmd_simulate(const Common& c, const std::string& mode_s, std::int64_t rounds,
                 std::uint64_t seed) {
  const MarketParams m = load_params(c.config);
  Mode mode;
  try {
    mode = parse_mode(mode_s);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  }
  CampaignOptions opt;
  opt.workers = c.workers;
  CampaignSummary s;
  try {
    s = run_campaign(m, mode, rounds, seed, opt);
  } catch (const NegotiationFailed& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitNegotiation;
  }
  const fs::path stem = fs::path(c.out) / campaign_stem(s);
  {
    auto os = open_output(fs::path(stem.string() + ".csv"));
    write_rounds_csv(os, m, s);
  }
  write_json(fs::path(stem.string() + ".json"), campaign_json(m, s));
  std::printf("mode %s, %lld rounds, seed %llu\n", std::string(mode_name(mode)).c_str(),
              static_cast<long long>(rounds), static_cast<unsigned long long>(seed));
  if (s.contract) std::printf("contract %s\n", contract_line(s.contract).c_str());
  std::printf("DMC %s\nDML %s s\nTUR %s\nRUR %s\nTCT %s s\nenergy %s J\n"
              "buyers' utility %s\nseller utility %s\n",
              num(s.sum_dmc).c_str(), num(s.sum_dml).c_str(), num(s.avg_tur()).c_str(),
              num(s.avg_rur()).c_str(), num(s.sum_tct).c_str(), num(s.sum_energy).c_str(),
              num(s.sum_buyer_utility).c_str(), num(s.sum_seller_utility).c_str());
  return kExitOk;
}

int cmd_lambda_sweep(const Common& c, int prices, int gammas) {
  const MarketParams m = load_params(c.config);
  auto os = open_output(fs::path(c.out) / "lambda_sweep.csv");
  os << "# overbook-lambda-sweep v" << kSchemaVersion << '\n';
  os << "# params: " << params_line(m) << '\n';
  os << "g,gamma,lambda,utility\n";
  const double gmax = 1.2 * p_mem_max(m);
  for (int gi = 0; gi < gammas; ++gi) {
    const double gamma = gammas == 1 ? m.gamma_low_eps1
                                     : m.gamma_low_eps1 + (m.gamma_high_eps2 - m.gamma_low_eps1) *
                                                              gi / (gammas - 1);
    const OffloadProfile prof(m, gamma);
    for (int pi = 0; pi < prices; ++pi) {
      const double g = prices == 1 ? 0.0 : gmax * pi / (prices - 1);
      const double lam = prof.optimal_lambda(g);
      os << num(g) << ',' << num(gamma) << ',' << num(lam) << ',' << num(prof.utility(g, lam))
         << '\n';
    }
  }
  return kExitOk;
}

int cmd_risk_table(const Common& c, int points) {
  const MarketParams m = load_params(c.config);
  const FuturesAnalytics fa(m);
  auto os = open_output(fs::path(c.out) / "risk_table.csv");
  os << "# overbook-risk-table v" << kSchemaVersion << '\n';
  os << "# params: " << params_line(m) << '\n';
  os << "p,q,r,kappa,srisk,mrisk,vrisk,seller_eu,member_eu\n";
  const double lo = m.seller_min_price, hi = p_mem_max(m);
  for (int i = 0; i < points; ++i) {
    const double p = lo + (hi - lo) * i / points;
    for (int j = 1; j <= points; ++j) {
      const double q = p * j / (points + 1);
      for (int l = 1; l <= points; ++l) {
        const double r = hi * l / points;
        const double mrisk = fa.member_risk(p, q);
        for (int k = 1; k <= m.num_buyers; ++k) {
          os << num(p) << ',' << num(q) << ',' << num(r) << ',' << k << ','
             << num(fa.seller_risk(p, q, r, k)) << ',' << num(mrisk) << ','
             << num(fa.volunteer_risk(k)) << ',' << num(fa.seller_utility(p, q, r, k)) << ','
             << num(fa.member_utility(p, q, r, k)) << '\n';
        }
      }
    }
  }
  return kExitOk;
}

int cmd_validate(const Common& c) {
  const RawConfig raw = load_config(c.config);
  const MarketParams m = validate_params(raw);
  const auto results = run_validation(m, validation_tolerances(raw));
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-4s %-22s max_dev=%s tol=%s checks=%lld\n", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), num(r.max_deviation).c_str(), num(r.tolerance).c_str(),
                static_cast<long long>(r.checks));
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Futures and spot trading simulator for edge computing resources"};
  app.require_subcommand(1);

  Common neg_c, sim_c, sweep_c, risk_c, val_c;
  bool no_trace = false;
  std::string mode = "overbook-uniform";
  std::int64_t rounds = 100;
  std::uint64_t seed = 1;
  int sweep_prices = 101, sweep_gammas = 5, risk_points = 6;

  auto* neg = app.add_subcommand("negotiate", "negotiate the forward contract");
  add_common(neg, neg_c);
  neg->add_flag("--no-trace", no_trace, "skip the candidate trace CSV");

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(sim, sim_c);
  sim->add_option("--mode", mode,
                  "overbook-uniform | overbook-diff | equal-uniform | equal-diff | "
                  "spot-uniform | spot-diff");
  sim->add_option("--rounds", rounds, "trading rounds")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "campaign seed");

  auto* sweep = app.add_subcommand("lambda-sweep", "tabulate optimal offload fractions");
  add_common(sweep, sweep_c);
  sweep->add_option("--prices", sweep_prices, "price points")->check(CLI::PositiveNumber);
  sweep->add_option("--gammas", sweep_gammas, "channel quality points")->check(CLI::PositiveNumber);

  auto* risk = app.add_subcommand("risk-table", "tabulate risks over a term grid");
  add_common(risk, risk_c);
  risk->add_option("--points", risk_points, "grid points per term")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "run the oracle suites");
  add_common(val, val_c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*neg) return cmd_negotiate(neg_c, no_trace);
    if (*sim) return cmd_simulate(sim_c, mode, rounds, seed);
    if (*sweep) return cmd_lambda_sweep(sweep_c, sweep_prices, sweep_gammas);
    if (*risk) return cmd_risk_table(risk_c, risk_points);
    if (*val) return cmd_validate(val_c);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const OutputError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}

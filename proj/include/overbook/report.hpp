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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "overbook/futures.hpp"
#include "overbook/params.hpp"
#include "overbook/simulator.hpp"

namespace overbook {

inline constexpr int kSchemaVersion = 1;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 12 significant digits, the fixed precision of every emitted number.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string params_line(const MarketParams& m) {
  std::string out;
  for (const auto& [k, v] : to_raw(m)) {
    if (!out.empty()) out += ';';
    out += k + '=' + num(v);
  }
  return out;
}

inline std::string contract_line(const std::optional<ForwardContract>& c) {
  if (!c) return "none";
  return "p=" + num(c->price_p) + ",q=" + num(c->penalty_q) + ",r=" + num(c->compensation_r) +
         ",kappa=" + std::to_string(c->member_count_kappa);
}

// ---- per-round CSV --------------------------------------------------------

struct RoundColumn {
  const char* name;
  std::function<std::string(const TradingMetrics&)> get;
  std::function<void(TradingMetrics&, double)> set;
};

inline const std::vector<RoundColumn>& round_columns() {
#define OVERBOOK_INT_COL(field)                                              \
  RoundColumn {                                                              \
    #field, [](const TradingMetrics& t) { return std::to_string(t.field); }, \
        [](TradingMetrics& t, double v) {                                    \
          t.field = static_cast<decltype(t.field)>(v);                       \
        }                                                                    \
  }
#define OVERBOOK_DBL_COL(field)                                          \
  RoundColumn {                                                          \
    #field, [](const TradingMetrics& t) { return num(t.field); },        \
        [](TradingMetrics& t, double v) { t.field = v; }                 \
  }
  static const std::vector<RoundColumn> cols = {
      OVERBOOK_INT_COL(round),
      OVERBOOK_INT_COL(kappa),
      OVERBOOK_INT_COL(performers),
      OVERBOOK_INT_COL(volunteers),
      OVERBOOK_INT_COL(spot_capacity),
      OVERBOOK_INT_COL(spot_trades),
      OVERBOOK_DBL_COL(seller_futures_utility),
      OVERBOOK_DBL_COL(seller_spot_utility),
      OVERBOOK_DBL_COL(seller_utility),
      OVERBOOK_DBL_COL(member_utility),
      OVERBOOK_DBL_COL(nonmember_utility),
      OVERBOOK_DBL_COL(buyer_utility),
      OVERBOOK_DBL_COL(dmc),
      OVERBOOK_DBL_COL(dml),
      OVERBOOK_DBL_COL(tct),
      OVERBOOK_DBL_COL(tur),
      OVERBOOK_DBL_COL(rur),
      OVERBOOK_DBL_COL(energy),
      OVERBOOK_DBL_COL(cycles_served),
  };
#undef OVERBOOK_INT_COL
#undef OVERBOOK_DBL_COL
  return cols;
}

inline void write_rounds_csv(std::ostream& os, const MarketParams& m,
                             const CampaignSummary& s) {
  os << "# overbook-rounds v" << kSchemaVersion << '\n';
  os << "# mode=" << mode_name(s.mode) << ";seed=" << s.seed << ";rounds=" << s.rounds << '\n';
  os << "# params: " << params_line(m) << '\n';
  os << "# contract: " << contract_line(s.contract) << '\n';
  const auto& cols = round_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c].name;
  os << '\n';
  for (const auto& r : s.records) {
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c].get(r);
    os << '\n';
  }
}

/// Parses a rounds CSV back into records (scalar fields only).
inline std::vector<TradingMetrics> read_rounds_csv(std::istream& is) {
  const auto& cols = round_columns();
  std::vector<TradingMetrics> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != cols.size()) throw OutputError("rounds csv: wrong column count");
    if (!header_seen) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cells[c] != cols[c].name) throw OutputError("rounds csv: unexpected column " + cells[c]);
      }
      header_seen = true;
      continue;
    }
    TradingMetrics t;
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].set(t, std::stod(cells[c]));
    out.push_back(std::move(t));
  }
  return out;
}

// ---- negotiation trace CSV ------------------------------------------------

inline constexpr const char* kTraceColumns = "p,q,r,kappa,seller_eu,member_eu,srisk,mrisk,vrisk";

class TraceCsvWriter {
 public:
  TraceCsvWriter(std::ostream& os, const MarketParams& m) : os_(os) {
    os_ << "# overbook-trace v" << kSchemaVersion << '\n';
    os_ << "# params: " << params_line(m) << '\n';
    os_ << kTraceColumns << '\n';
  }
  void operator()(const CandidateTerm& t) {
    os_ << num(t.p) << ',' << num(t.q) << ',' << num(t.r) << ',' << t.kappa << ','
        << num(t.seller_eu) << ',' << num(t.member_eu) << ',' << num(t.srisk) << ','
        << num(t.mrisk) << ',' << num(t.vrisk) << '\n';
  }

 private:
  std::ostream& os_;
};

inline std::vector<CandidateTerm> read_trace_csv(std::istream& is) {
  std::vector<CandidateTerm> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kTraceColumns) throw OutputError("trace csv: unexpected header");
      header_seen = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    if (v.size() != 9) throw OutputError("trace csv: wrong column count");
    out.push_back({v[0], v[1], v[2], static_cast<int>(v[3]), v[4], v[5], v[6], v[7], v[8]});
  }
  return out;
}

// ---- JSON summaries -------------------------------------------------------

inline nlohmann::ordered_json params_json(const MarketParams& m) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : to_raw(m)) j[k] = v;
  return j;
}

inline nlohmann::ordered_json contract_json(const std::optional<ForwardContract>& c,
                                            const MarketParams& m) {
  if (!c) return nullptr;
  return {{"price_p", c->price_p},
          {"penalty_q", c->penalty_q},
          {"compensation_r", c->compensation_r},
          {"member_count_kappa", c->member_count_kappa},
          {"overbooking_rate", c->overbooking_rate(m)},
          {"price_per_task", c->price_p * m.compute_demand_dcomp},
          {"penalty_per_task", c->penalty_q * m.compute_demand_dcomp},
          {"compensation_per_task", c->compensation_r * m.compute_demand_dcomp}};
}

inline nlohmann::ordered_json negotiation_json(const MarketParams& m, const NegotiationTrace& t) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "negotiation";
  j["status"] = t.failed() ? "failed" : "agreed";
  j["p_mem_max"] = p_mem_max(m);
  j["seller_min_price"] = m.seller_min_price;
  j["quotation_count"] = t.quotation_count;
  j["candidate_count"] = t.candidate_count;
  j["contract"] = contract_json(t.outcome, m);
  if (t.best) {
    j["seller_eu"] = t.best->seller_eu;
    j["member_eu"] = t.best->member_eu;
    j["srisk"] = t.best->srisk;
    j["mrisk"] = t.best->mrisk;
    j["vrisk"] = t.best->vrisk;
    j["kappa"] = t.best->kappa;
  }
  j["params"] = params_json(m);
  return j;
}

inline nlohmann::ordered_json campaign_json(const MarketParams& m, const CampaignSummary& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "campaign";
  j["mode"] = mode_name(s.mode);
  j["seed"] = s.seed;
  j["rounds"] = s.rounds;
  j["contract"] = contract_json(s.contract, m);
  j["negotiation_quotation_count"] = s.negotiation_quotes;
  j["negotiation_candidate_count"] = s.negotiation_candidates;
  j["aggregates"] = {
      {"dmc_sum", s.sum_dmc},
      {"dml_sum", s.sum_dml},
      {"tur_avg", s.avg_tur()},
      {"rur_avg", s.avg_rur()},
      {"tct_sum", s.sum_tct},
      {"energy_sum", s.sum_energy},
      {"buyer_utility_sum", s.sum_buyer_utility},
      {"seller_utility_sum", s.sum_seller_utility},
      {"member_utility_sum", s.sum_member_utility},
      {"nonmember_utility_sum", s.sum_nonmember_utility},
      {"seller_futures_utility_sum", s.sum_seller_futures_utility},
      {"seller_spot_utility_sum", s.sum_seller_spot_utility},
      {"volunteers_sum", s.sum_volunteers},
      {"mean_e2e_delay", s.mean_e2e},
  };
  j["params"] = params_json(m);
  return j;
}

inline std::string campaign_stem(const CampaignSummary& s) {
  return std::string(mode_name(s.mode)) + "_" + std::to_string(s.seed) + "_" +
         std::to_string(s.rounds);
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream os(p, std::ios::binary);
  if (!os) throw OutputError("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace overbook

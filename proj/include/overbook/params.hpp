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
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace overbook {

/// Static scenario constants shared by the futures and spot markets.
///
/// Prices (seller_min_price, delta_p/q/r and every p, q, r, g used
/// elsewhere) are expressed per CPU cycle; a per-task magnitude is
/// price * compute_demand_dcomp.
struct MarketParams {
  int seller_capacity_S = 0;
  int num_buyers = 0;
  double task_arrival_prob_a = 0.0;
  double gamma_low_eps1 = 0.0;
  double gamma_high_eps2 = 0.0;
  double bandwidth_W = 0.0;             // Hz
  double data_size_dsize = 0.0;         // bits
  double compute_demand_dcomp = 0.0;    // cycles per task
  double buyer_cpu_fb = 0.0;            // cycles/s
  double seller_cpu_fs = 0.0;           // cycles/s
  double local_power_eloc = 0.0;        // W
  double tx_power_etran = 0.0;          // W
  double weight_w1 = 1.0;               // utility per second
  double weight_w2 = 1.0;               // utility per Joule
  double xi_seller = 0.0;               // seller risk tolerance
  double xi_member = 0.0;               // member risk tolerance
  double xi_volunteer = 0.0;            // volunteer risk tolerance
  double xi1 = 1.0;
  double xi2 = 1.0;
  double u_min = 1e-6;
  double seller_min_price = 0.0;
  double delta_p = 0.0;
  double delta_q = 0.0;
  double delta_r = 0.0;
  int max_penalty_steps = 0;
  int max_refund_steps = 0;
  double e2e_delay_low = 0.0;           // s
  double e2e_delay_high = 0.0;          // s

  bool operator==(const MarketParams&) const = default;
};

/// Largest per-cycle price at which a full offload still pays off for a
/// member on the worst channel (gamma = eps1).
inline double p_mem_max(const MarketParams& m) {
  const double rate_bits = std::log2(1.0 + m.tx_power_etran * m.gamma_low_eps1);
  return (m.weight_w1 + m.weight_w2 * m.local_power_eloc) / m.buyer_cpu_fb -
         m.weight_w1 / m.seller_cpu_fs -
         (m.weight_w1 * m.data_size_dsize +
          m.weight_w2 * m.tx_power_etran * m.data_size_dsize) /
             (m.bandwidth_W * m.compute_demand_dcomp * rate_bits);
}

/// Flat key-value configuration as read from disk.
using RawConfig = std::map<std::string, double>;

struct Violation {
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Violation> violations)
      : std::runtime_error(render(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string render(const std::vector<Violation>& vs) {
    std::string out = "invalid configuration:";
    for (const auto& v : vs) out += "\n  " + v.key + ": " + v.message;
    return out;
  }
  std::vector<Violation> violations_;
};

namespace config_keys {

// Prefix reserved for tolerance overrides consumed by the validate command.
inline constexpr std::string_view kValidatePrefix = "validate_";

inline const std::vector<std::string>& required() {
  static const std::vector<std::string> keys = {
      "seller_capacity_S", "num_buyers",        "task_arrival_prob_a",
      "gamma_low_eps1",    "gamma_high_eps2",   "bandwidth_W",
      "data_size_dsize",   "compute_demand_dcomp", "buyer_cpu_fb",
      "seller_cpu_fs",     "local_power_eloc",  "tx_power_etran",
      "xi_seller",         "xi_member",         "xi_volunteer",
      "e2e_delay_low",     "e2e_delay_high"};
  return keys;
}

inline const std::vector<std::string>& optional() {
  static const std::vector<std::string> keys = {
      "weight_w1", "weight_w2",        "xi1",              "xi2",
      "u_min",     "seller_min_price", "delta_p",          "delta_q",
      "delta_r",   "max_penalty_steps", "max_refund_steps"};
  return keys;
}

}  // namespace config_keys

namespace detail {

inline bool is_integral(double v) {
  return std::isfinite(v) && std::floor(v) == v;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

/// Builds MarketParams from a raw key-value map, filling documented
/// defaults and collecting every violation before throwing ConfigError.
///
/// Defaults: weights and xi1/xi2 are 1, u_min is 1e-6, seller_min_price is
/// 0.15 * p_mem_max, the three granularities are (p_mem_max - pmin) / 200,
/// and the loop caps let q range over (0, p_mem_max) and r over
/// (0, p_mem_max].
inline MarketParams validate_params(const RawConfig& raw) {
  std::vector<Violation> errs;
  auto add = [&](std::string key, std::string msg) {
    errs.push_back({std::move(key), std::move(msg)});
  };

  for (const auto& key : config_keys::required()) {
    if (!raw.count(key)) add(key, "missing required key");
  }
  for (const auto& [key, value] : raw) {
    if (std::string_view(key).starts_with(config_keys::kValidatePrefix)) continue;
    const auto& req = config_keys::required();
    const auto& opt = config_keys::optional();
    if (std::find(req.begin(), req.end(), key) == req.end() &&
        std::find(opt.begin(), opt.end(), key) == opt.end()) {
      add(key, "unknown key");
    } else if (!std::isfinite(value)) {
      add(key, "value must be finite");
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));

  auto get = [&](const std::string& key) { return raw.at(key); };
  auto get_or = [&](const std::string& key, double fallback) {
    auto it = raw.find(key);
    return it == raw.end() ? fallback : it->second;
  };
  auto as_int = [&](const std::string& key, double v) {
    if (!detail::is_integral(v)) {
      add(key, "must be an integer (got " + detail::fmt(v) + ")");
      return 0;
    }
    return static_cast<int>(v);
  };

  MarketParams m;
  m.seller_capacity_S = as_int("seller_capacity_S", get("seller_capacity_S"));
  m.num_buyers = as_int("num_buyers", get("num_buyers"));
  m.task_arrival_prob_a = get("task_arrival_prob_a");
  m.gamma_low_eps1 = get("gamma_low_eps1");
  m.gamma_high_eps2 = get("gamma_high_eps2");
  m.bandwidth_W = get("bandwidth_W");
  m.data_size_dsize = get("data_size_dsize");
  m.compute_demand_dcomp = get("compute_demand_dcomp");
  m.buyer_cpu_fb = get("buyer_cpu_fb");
  m.seller_cpu_fs = get("seller_cpu_fs");
  m.local_power_eloc = get("local_power_eloc");
  m.tx_power_etran = get("tx_power_etran");
  m.weight_w1 = get_or("weight_w1", 1.0);
  m.weight_w2 = get_or("weight_w2", 1.0);
  m.xi_seller = get("xi_seller");
  m.xi_member = get("xi_member");
  m.xi_volunteer = get("xi_volunteer");
  m.xi1 = get_or("xi1", 1.0);
  m.xi2 = get_or("xi2", 1.0);
  m.u_min = get_or("u_min", 1e-6);
  m.e2e_delay_low = get("e2e_delay_low");
  m.e2e_delay_high = get("e2e_delay_high");

  if (m.seller_capacity_S < 1) add("seller_capacity_S", "must be >= 1");
  if (m.num_buyers < 1) add("num_buyers", "must be >= 1");
  if (m.seller_capacity_S >= m.num_buyers) {
    add("seller_capacity_S", "S < |B| violated (S=" +
                                 std::to_string(m.seller_capacity_S) +
                                 ", |B|=" + std::to_string(m.num_buyers) + ")");
  }
  if (m.task_arrival_prob_a < 0.0 || m.task_arrival_prob_a > 1.0) {
    add("task_arrival_prob_a", "must lie in [0, 1]");
  }
  if (m.gamma_low_eps1 <= 0.0) add("gamma_low_eps1", "must be > 0");
  if (m.gamma_low_eps1 >= m.gamma_high_eps2) {
    add("gamma_high_eps2", "ε1 < ε2 violated (ε1=" +
                               detail::fmt(m.gamma_low_eps1) +
                               ", ε2=" + detail::fmt(m.gamma_high_eps2) + ")");
  }
  const std::pair<const char*, double> positives[] = {
      {"bandwidth_W", m.bandwidth_W},
      {"data_size_dsize", m.data_size_dsize},
      {"compute_demand_dcomp", m.compute_demand_dcomp},
      {"buyer_cpu_fb", m.buyer_cpu_fb},
      {"seller_cpu_fs", m.seller_cpu_fs},
      {"local_power_eloc", m.local_power_eloc},
      {"tx_power_etran", m.tx_power_etran},
      {"weight_w1", m.weight_w1},
      {"weight_w2", m.weight_w2},
      {"xi1", m.xi1},
      {"xi2", m.xi2},
      {"u_min", m.u_min}};
  for (const auto& [key, v] : positives) {
    if (!(v > 0.0)) add(key, "must be > 0 (got " + detail::fmt(v) + ")");
  }
  const std::pair<const char*, double> probabilities[] = {
      {"xi_seller", m.xi_seller},
      {"xi_member", m.xi_member},
      {"xi_volunteer", m.xi_volunteer}};
  for (const auto& [key, v] : probabilities) {
    if (v < 0.0 || v > 1.0) add(key, "must lie in [0, 1]");
  }
  if (m.e2e_delay_low < 0.0) add("e2e_delay_low", "must be >= 0");
  if (m.e2e_delay_high < m.e2e_delay_low) {
    add("e2e_delay_high", "must be >= e2e_delay_low");
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));

  // Price-dependent defaults need a positive member price ceiling.
  const double pmax = p_mem_max(m);
  const bool needs_ceiling =
      !raw.count("seller_min_price") || !raw.count("delta_p") ||
      !raw.count("delta_q") || !raw.count("delta_r") ||
      !raw.count("max_penalty_steps") || !raw.count("max_refund_steps");
  if (needs_ceiling && !(pmax > 0.0)) {
    add("seller_min_price",
        "p_mem_max = " + detail::fmt(pmax) +
            " <= 0; price defaults cannot be derived, set them explicitly");
    throw ConfigError(std::move(errs));
  }

  m.seller_min_price = get_or("seller_min_price", 0.15 * pmax);
  const double default_step = (pmax - m.seller_min_price) / 200.0;
  m.delta_p = get_or("delta_p", default_step);
  m.delta_q = get_or("delta_q", m.delta_p);
  m.delta_r = get_or("delta_r", m.delta_p);
  if (m.seller_min_price < 0.0) add("seller_min_price", "must be >= 0");
  for (const auto& [key, v] : {std::pair{"delta_p", m.delta_p},
                               std::pair{"delta_q", m.delta_q},
                               std::pair{"delta_r", m.delta_r}}) {
    if (!(v > 0.0)) add(key, "must be > 0 (got " + detail::fmt(v) + ")");
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));

  const double q_default = std::max(1.0, std::ceil(pmax / m.delta_q - 1e-9) - 1.0);
  const double r_default = std::max(1.0, std::floor(pmax / m.delta_r + 1e-9));
  m.max_penalty_steps =
      as_int("max_penalty_steps", get_or("max_penalty_steps", q_default));
  m.max_refund_steps =
      as_int("max_refund_steps", get_or("max_refund_steps", r_default));
  if (m.max_penalty_steps < 1) add("max_penalty_steps", "must be >= 1");
  if (m.max_refund_steps < 1) add("max_refund_steps", "must be >= 1");
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return m;
}

/// Every field as a raw key-value map; validate_params(to_raw(m)) == m.
inline RawConfig to_raw(const MarketParams& m) {
  return {
      {"seller_capacity_S", m.seller_capacity_S},
      {"num_buyers", m.num_buyers},
      {"task_arrival_prob_a", m.task_arrival_prob_a},
      {"gamma_low_eps1", m.gamma_low_eps1},
      {"gamma_high_eps2", m.gamma_high_eps2},
      {"bandwidth_W", m.bandwidth_W},
      {"data_size_dsize", m.data_size_dsize},
      {"compute_demand_dcomp", m.compute_demand_dcomp},
      {"buyer_cpu_fb", m.buyer_cpu_fb},
      {"seller_cpu_fs", m.seller_cpu_fs},
      {"local_power_eloc", m.local_power_eloc},
      {"tx_power_etran", m.tx_power_etran},
      {"weight_w1", m.weight_w1},
      {"weight_w2", m.weight_w2},
      {"xi_seller", m.xi_seller},
      {"xi_member", m.xi_member},
      {"xi_volunteer", m.xi_volunteer},
      {"xi1", m.xi1},
      {"xi2", m.xi2},
      {"u_min", m.u_min},
      {"seller_min_price", m.seller_min_price},
      {"delta_p", m.delta_p},
      {"delta_q", m.delta_q},
      {"delta_r", m.delta_r},
      {"max_penalty_steps", m.max_penalty_steps},
      {"max_refund_steps", m.max_refund_steps},
      {"e2e_delay_low", m.e2e_delay_low},
      {"e2e_delay_high", m.e2e_delay_high},
  };
}

/// Parses a flat JSON object of numbers. Comments are not part of the
/// format; keys prefixed with '_' are skipped so a file can carry notes.
inline RawConfig parse_config(std::string_view text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({{origin, std::string("malformed JSON: ") + e.what()}});
  }
  if (!doc.is_object()) {
    throw ConfigError({{origin, "top level must be a JSON object"}});
  }
  RawConfig raw;
  std::vector<Violation> errs;
  for (const auto& [key, value] : doc.items()) {
    if (key.starts_with('_')) continue;
    if (!value.is_number()) {
      errs.push_back({key, "value must be a number"});
      continue;
    }
    raw[key] = value.get<double>();
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return raw;
}

inline RawConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{path, "cannot open config file '" + path + "'"}});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

inline MarketParams load_params(const std::string& path) {
  return validate_params(load_config(path));
}

/// The scenario constants of the reference evaluation, without the
/// derived price defaults.
inline RawConfig reference_config() {
  return {
      {"seller_capacity_S", 15},
      {"num_buyers", 30},
      {"task_arrival_prob_a", 0.76},
      {"gamma_low_eps1", 100},
      {"gamma_high_eps2", 500},
      {"bandwidth_W", 6e6},
      {"data_size_dsize", 5e5},
      {"compute_demand_dcomp", 3e8},
      {"buyer_cpu_fb", 1e9},
      {"seller_cpu_fs", 1e11},
      {"local_power_eloc", 0.5},
      {"tx_power_etran", 0.55},
      {"xi_seller", 0.33},
      {"xi_member", 0.33},
      {"xi_volunteer", 0.45},
      {"e2e_delay_low", 0.002},
      {"e2e_delay_high", 0.010},
  };
}

inline MarketParams reference_params() {
  return validate_params(reference_config());
}

}  // namespace overbook

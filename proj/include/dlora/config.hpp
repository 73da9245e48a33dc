#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlora/engine.hpp"

namespace dlora {

// Configuration problem with the offending field's path in the message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sweep over the cartesian product policies x radii x seeds, enumerated in
// that order.
struct SweepSpec {
  std::vector<std::string> policies{"random",   "round-robin", "adr",      "rs-lora",
                                    "dlora-pdr", "dlora-ee",    "dlora-th", "dlora-balance"};
  std::vector<double> radii_m{1000.0, 1500.0, 2000.0, 2500.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SimConfig base;
};

namespace cfgdetail {

using nlohmann::json;

inline std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

template <typename T>
void read(const json& obj, const std::string& parent, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = get_as<T>(*it, join(parent, key));
}

inline void reject_unknown(const json& obj, const std::string& parent,
                           const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError(join(parent, it.key()) + ": unknown key");
}

inline void parse_channel(const json& j, const std::string& path, ChannelModelConfig& c) {
  reject_unknown(j, path,
                 {"mean_path_loss_d0_db", "reference_distance_m", "path_loss_exponent",
                  "shadowing_sigma_db", "noise_sigma_db", "noise_figure_db", "preamble_symbols",
                  "crc", "explicit_header", "low_data_rate_opt", "coding_rate", "min_distance_m"});
  read(j, path, "mean_path_loss_d0_db", c.mean_path_loss_d0_db);
  read(j, path, "reference_distance_m", c.reference_distance_m);
  read(j, path, "path_loss_exponent", c.path_loss_exponent);
  read(j, path, "shadowing_sigma_db", c.shadowing_sigma_db);
  read(j, path, "noise_sigma_db", c.noise_sigma_db);
  read(j, path, "noise_figure_db", c.noise_figure_db);
  read(j, path, "preamble_symbols", c.preamble_symbols);
  read(j, path, "crc", c.crc);
  read(j, path, "explicit_header", c.explicit_header);
  read(j, path, "low_data_rate_opt", c.low_data_rate_opt);
  read(j, path, "coding_rate", c.coding_rate);
  read(j, path, "min_distance_m", c.min_distance_m);
}

inline void parse_domains(const json& j, const std::string& path, ParameterDomains& d) {
  reject_unknown(j, path, {"sf", "bw_hz", "cf_hz", "tp_dbm"});
  read(j, path, "sf", d.sf);
  read(j, path, "bw_hz", d.bw_hz);
  read(j, path, "cf_hz", d.cf_hz);
  read(j, path, "tp_dbm", d.tp_dbm);
}

inline void parse_reward(const json& j, const std::string& path, RewardConfig& r) {
  reject_unknown(j, path, {"xi", "zeta", "eta", "table"});
  read(j, path, "xi", r.xi);
  read(j, path, "zeta", r.zeta);
  read(j, path, "eta", r.eta);
  if (auto it = j.find("table"); it != j.end()) {
    const std::string tpath = join(path, "table");
    reject_unknown(*it, tpath, {"received", "collision_loss", "signal_loss"});
    auto row = [&](const char* key, std::size_t idx) {
      if (auto rit = it->find(key); rit != it->end()) {
        auto v = get_as<std::vector<double>>(*rit, join(tpath, key));
        if (v.size() != 4)
          throw ConfigError(join(tpath, key) + ": expected 4 values (sf, bw, cf, tp)");
        for (std::size_t k = 0; k < 4; ++k) r.table[idx][k] = v[k];
      }
    };
    row("received", 0);
    row("collision_loss", 1);
    row("signal_loss", 2);
  }
}

inline void parse_sim(const json& j, SimConfig& c) {
  reject_unknown(j, "",
                 {"n_nodes", "radius_m", "payload_bytes", "lambda_pps",
                  "packets_per_node_per_episode", "n_train_episodes", "n_test_episodes", "seed",
                  "policy", "agent", "channel", "collision", "adr", "domains", "reward", "utility",
                  "node_positions", "sweep"});
  read(j, "", "n_nodes", c.n_nodes);
  read(j, "", "radius_m", c.radius_m);
  read(j, "", "payload_bytes", c.payload_bytes);
  read(j, "", "lambda_pps", c.lambda_pps);
  read(j, "", "packets_per_node_per_episode", c.packets_per_node_per_episode);
  read(j, "", "n_train_episodes", c.n_train_episodes);
  read(j, "", "n_test_episodes", c.n_test_episodes);
  read(j, "", "seed", c.seed);
  if (auto it = j.find("policy"); it != j.end())
    c.policy = parse_policy(get_as<std::string>(*it, "policy"));
  if (auto it = j.find("agent"); it != j.end()) {
    reject_unknown(*it, "agent", {"exploration_c"});
    read(*it, "agent", "exploration_c", c.exploration_c);
  }
  if (auto it = j.find("channel"); it != j.end()) parse_channel(*it, "channel", c.channel);
  if (auto it = j.find("collision"); it != j.end()) {
    reject_unknown(*it, "collision", {"capture_threshold_db"});
    read(*it, "collision", "capture_threshold_db", c.collision.capture_threshold_db);
  }
  if (auto it = j.find("adr"); it != j.end()) {
    reject_unknown(*it, "adr", {"margin_db"});
    read(*it, "adr", "margin_db", c.adr.margin_db);
  }
  if (auto it = j.find("domains"); it != j.end()) parse_domains(*it, "domains", c.domains);
  if (auto it = j.find("reward"); it != j.end()) parse_reward(*it, "reward", c.reward);
  if (auto it = j.find("utility"); it != j.end()) {
    reject_unknown(*it, "utility", {"theta", "phi", "psi"});
    read(*it, "utility", "theta", c.utility.theta);
    read(*it, "utility", "phi", c.utility.phi);
    read(*it, "utility", "psi", c.utility.psi);
  }
  if (auto it = j.find("node_positions"); it != j.end()) {
    auto pairs = get_as<std::vector<std::vector<double>>>(*it, "node_positions");
    c.node_positions.clear();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].size() != 2)
        throw ConfigError("node_positions[" + std::to_string(i) + "]: expected [x, y]");
      c.node_positions.push_back({pairs[i][0], pairs[i][1]});
    }
  }
}

}  // namespace cfgdetail

// Parses and validates a config; missing keys keep their defaults (an empty
// object yields the reference CN470 evaluation setting).
inline SweepSpec parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root: expected a JSON object");
  SweepSpec spec;
  try {
    cfgdetail::parse_sim(j, spec.base);
    if (auto it = j.find("sweep"); it != j.end()) {
      cfgdetail::reject_unknown(*it, "sweep", {"policies", "radii_m", "seeds"});
      cfgdetail::read(*it, "sweep", "policies", spec.policies);
      cfgdetail::read(*it, "sweep", "radii_m", spec.radii_m);
      cfgdetail::read(*it, "sweep", "seeds", spec.seeds);
    }
    validate_config(spec.base);
    if (spec.policies.empty()) throw std::invalid_argument("sweep.policies: must be non-empty");
    if (spec.radii_m.empty()) throw std::invalid_argument("sweep.radii_m: must be non-empty");
    if (spec.seeds.empty()) throw std::invalid_argument("sweep.seeds: must be non-empty");
    for (const std::string& p : spec.policies) parse_policy(p);  // name check
    for (double r : spec.radii_m)
      if (!(r > 0)) throw std::invalid_argument("sweep.radii_m: radii must be > 0");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

inline SweepSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

// One line per config key: path, default, unit, meaning. Rendered into
// --help and kept in sync with the parser by the config tests.
struct ConfigKeyDoc {
  const char* path;
  const char* def;
  const char* unit;
  const char* desc;
};

inline const std::vector<ConfigKeyDoc>& config_reference() {
  static const std::vector<ConfigKeyDoc> docs{
      {"n_nodes", "50", "count", "nodes in the network"},
      {"radius_m", "1000", "m", "disk radius nodes are scattered over"},
      {"payload_bytes", "20", "bytes", "payload size of every packet"},
      {"lambda_pps", "0.25", "packets/s", "per-node send rate (exponential gaps, mean 4 s)"},
      {"packets_per_node_per_episode", "100", "count", "episode stop condition"},
      {"n_train_episodes", "50", "count", "training episodes M"},
      {"n_test_episodes", "10", "count", "frozen greedy test episodes"},
      {"seed", "1", "-", "root seed; split into topology/traffic/shadowing/noise/policy streams"},
      {"policy", "dlora-pdr", "-",
       "random | round-robin | adr | rs-lora | dlora | dlora-pdr | dlora-ee | dlora-th | "
       "dlora-balance"},
      {"agent.exploration_c", "2", "-", "UCB exploration weight c"},
      {"channel.mean_path_loss_d0_db", "128.95", "dB", "mean path loss at reference distance"},
      {"channel.reference_distance_m", "1000", "m", "path-loss reference distance d0"},
      {"channel.path_loss_exponent", "2.32", "-", "log-distance path-loss exponent gamma"},
      {"channel.shadowing_sigma_db", "7.8", "dB", "shadowing std dev (delta_1), sampled per packet"},
      {"channel.noise_sigma_db", "1", "dB", "noise jitter std dev (delta_2), sampled per reception"},
      {"channel.noise_figure_db", "6", "dB", "receiver noise figure NF"},
      {"channel.preamble_symbols", "8", "symbols", "preamble length n_pre"},
      {"channel.crc", "1", "flag", "CRC enabled"},
      {"channel.explicit_header", "0", "flag", "H: 0 = header present"},
      {"channel.low_data_rate_opt", "0", "flag", "DE"},
      {"channel.coding_rate", "1", "-", "CR, coding rate 4/(4+CR)"},
      {"channel.min_distance_m", "1", "m", "node-gateway distance clamp"},
      {"collision.capture_threshold_db", "6", "dB", "capture margin over the strongest collider"},
      {"adr.margin_db", "10", "dB", "link-budget margin for ADR and RS-LoRa"},
      {"domains.sf", "[7..12]", "-", "available spreading factors"},
      {"domains.bw_hz", "[125e3, 250e3, 500e3]", "Hz", "available bandwidths"},
      {"domains.cf_hz", "[470.1e6 .. 471.5e6 step 0.2e6]", "Hz", "available carrier frequencies"},
      {"domains.tp_dbm", "[2, 4, .., 14]", "dBm", "available transmit powers"},
      {"reward.xi", "0", "-", "SF metric factor (set by the dlora-* presets)"},
      {"reward.zeta", "0", "-", "BW metric factor"},
      {"reward.eta", "0", "-", "TP metric factor"},
      {"reward.table.received", "[1, 1, 1, 1]", "-", "rewards (sf, bw, cf, tp) on delivery"},
      {"reward.table.collision_loss", "[-1, -0.5, -0.5, 0]", "-", "rewards on collision loss"},
      {"reward.table.signal_loss", "[-0.5, -0.5, 0, -1]", "-", "rewards on signal-strength loss"},
      {"utility.theta", "1/3", "-", "PDR weight (theta+phi+psi = 1)"},
      {"utility.phi", "1/3", "-", "normalized-EE weight"},
      {"utility.psi", "1/3", "-", "normalized-TH weight"},
      {"node_positions", "unset", "m", "optional [[x,y],...] overriding the random topology"},
      {"sweep.policies", "all eight", "-", "policies enumerated by `sweep`"},
      {"sweep.radii_m", "[1000, 1500, 2000, 2500]", "m", "radii enumerated by `sweep`"},
      {"sweep.seeds", "[1, 2, 3, 4, 5]", "-", "seeds enumerated by `sweep`"},
  };
  return docs;
}

inline std::string config_reference_text() {
  std::string out = "Config keys (JSON; every key optional, defaults shown):\n";
  for (const ConfigKeyDoc& d : config_reference()) {
    out += "  ";
    out += d.path;
    out += " = ";
    out += d.def;
    out += "  [";
    out += d.unit;
    out += "]  ";
    out += d.desc;
    out += '\n';
  }
  return out;
}

// Default config as a JSON template (validate --print-defaults).
inline nlohmann::json default_config_json() {
  SweepSpec spec;
  const SimConfig& c = spec.base;
  nlohmann::json j;
  j["n_nodes"] = c.n_nodes;
  j["radius_m"] = c.radius_m;
  j["payload_bytes"] = c.payload_bytes;
  j["lambda_pps"] = c.lambda_pps;
  j["packets_per_node_per_episode"] = c.packets_per_node_per_episode;
  j["n_train_episodes"] = c.n_train_episodes;
  j["n_test_episodes"] = c.n_test_episodes;
  j["seed"] = c.seed;
  j["policy"] = c.policy.name;
  j["agent"] = {{"exploration_c", c.exploration_c}};
  j["channel"] = {{"mean_path_loss_d0_db", c.channel.mean_path_loss_d0_db},
                  {"reference_distance_m", c.channel.reference_distance_m},
                  {"path_loss_exponent", c.channel.path_loss_exponent},
                  {"shadowing_sigma_db", c.channel.shadowing_sigma_db},
                  {"noise_sigma_db", c.channel.noise_sigma_db},
                  {"noise_figure_db", c.channel.noise_figure_db},
                  {"preamble_symbols", c.channel.preamble_symbols},
                  {"crc", c.channel.crc},
                  {"explicit_header", c.channel.explicit_header},
                  {"low_data_rate_opt", c.channel.low_data_rate_opt},
                  {"coding_rate", c.channel.coding_rate},
                  {"min_distance_m", c.channel.min_distance_m}};
  j["collision"] = {{"capture_threshold_db", c.collision.capture_threshold_db}};
  j["adr"] = {{"margin_db", c.adr.margin_db}};
  j["domains"] = {{"sf", c.domains.sf},
                  {"bw_hz", c.domains.bw_hz},
                  {"cf_hz", c.domains.cf_hz},
                  {"tp_dbm", c.domains.tp_dbm}};
  j["reward"] = {{"xi", c.reward.xi},
                 {"zeta", c.reward.zeta},
                 {"eta", c.reward.eta},
                 {"table",
                  {{"received", c.reward.table[0]},
                   {"collision_loss", c.reward.table[1]},
                   {"signal_loss", c.reward.table[2]}}}};
  j["utility"] = {{"theta", c.utility.theta}, {"phi", c.utility.phi}, {"psi", c.utility.psi}};
  j["sweep"] = {{"policies", spec.policies}, {"radii_m", spec.radii_m}, {"seeds", spec.seeds}};
  return j;
}

}  // namespace dlora

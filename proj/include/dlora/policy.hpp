#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlora/bandit.hpp"
#include "dlora/params.hpp"
#include "dlora/phy.hpp"
#include "dlora/rng.hpp"

namespace dlora {

enum class PolicyKind { Random, RoundRobin, Adr, RsLora, DLora };

// Centralized policies' link-budget margin above receiver sensitivity.
struct AdrConfig {
  double margin_db = 10.0;
};

inline std::string policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Random: return "random";
    case PolicyKind::RoundRobin: return "round-robin";
    case PolicyKind::Adr: return "adr";
    case PolicyKind::RsLora: return "rs-lora";
    case PolicyKind::DLora: return "dlora";
  }
  return "?";
}

struct PolicySpec {
  PolicyKind kind = PolicyKind::DLora;
  std::optional<DLoraVariant> variant;  // set for the named dlora-* presets
  std::string name = "dlora-pdr";
};

inline PolicySpec parse_policy(const std::string& name) {
  PolicySpec s;
  s.name = name;
  if (name == "random") s.kind = PolicyKind::Random;
  else if (name == "round-robin") s.kind = PolicyKind::RoundRobin;
  else if (name == "adr") s.kind = PolicyKind::Adr;
  else if (name == "rs-lora") s.kind = PolicyKind::RsLora;
  else if (name == "dlora") s.kind = PolicyKind::DLora;
  else if (name == "dlora-pdr") { s.kind = PolicyKind::DLora; s.variant = DLoraVariant::Pdr; }
  else if (name == "dlora-ee") { s.kind = PolicyKind::DLora; s.variant = DLoraVariant::Ee; }
  else if (name == "dlora-th") { s.kind = PolicyKind::DLora; s.variant = DLoraVariant::Th; }
  else if (name == "dlora-balance") { s.kind = PolicyKind::DLora; s.variant = DLoraVariant::Balance; }
  else
    throw std::invalid_argument(
        "policy: unknown policy '" + name +
        "' (expected random, round-robin, adr, rs-lora, dlora, dlora-pdr, dlora-ee, dlora-th, "
        "dlora-balance)");
  return s;
}

// All four parameters drawn independently and uniformly.
inline LoRaParams random_policy(const ParameterDomains& d, Rng& rng) {
  LoRaParams p;
  p.sf = d.sf[rng.bounded(d.sf.size())];
  p.bw_hz = d.bw_hz[rng.bounded(d.bw_hz.size())];
  p.cf_hz = d.cf_hz[rng.bounded(d.cf_hz.size())];
  p.tp_dbm = d.tp_dbm[rng.bounded(d.tp_dbm.size())];
  return p;
}

// SF and CF assigned by node identity so nearby ids get distinct combinations;
// BW and TP randomized per packet.
inline LoRaParams round_robin_policy(int node_id, const ParameterDomains& d, Rng& rng) {
  LoRaParams p;
  p.sf = d.sf[static_cast<std::size_t>(node_id) % d.sf.size()];
  p.cf_hz = d.cf_hz[static_cast<std::size_t>(node_id) % d.cf_hz.size()];
  p.bw_hz = d.bw_hz[rng.bounded(d.bw_hz.size())];
  p.tp_dbm = d.tp_dbm[rng.bounded(d.tp_dbm.size())];
  return p;
}

namespace detail {

// (SF, BW) pairs in ascending airtime order for the given payload, ties
// broken by (sf, bw) so the scan is fully deterministic.
inline std::vector<std::pair<int, double>> pairs_by_airtime(const ParameterDomains& d,
                                                            int payload_bytes,
                                                            const ChannelModelConfig& ch) {
  std::vector<std::pair<int, double>> pairs;
  for (int sf : d.sf)
    for (double bw : d.bw_hz) pairs.emplace_back(sf, bw);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    const double ta = time_on_air_s(payload_bytes, {a.first, a.second}, ch);
    const double tb = time_on_air_s(payload_bytes, {b.first, b.second}, ch);
    if (ta != tb) return ta < tb;
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  return pairs;
}

inline int max_tp(const ParameterDomains& d) {
  return *std::max_element(d.tp_dbm.begin(), d.tp_dbm.end());
}

// Smallest configured TP whose mean-path-loss RSSI clears sensitivity plus
// margin, if any.
inline std::optional<int> min_feasible_tp(int sf, double bw, double distance_m,
                                          const ParameterDomains& d, const ChannelModelConfig& ch,
                                          double margin_db) {
  const double need = receiver_sensitivity_dbm(sf, bw) + margin_db + path_loss_db(distance_m, ch);
  std::optional<int> best;
  for (int tp : d.tp_dbm)
    if (tp >= need && (!best || tp < *best)) best = tp;
  return best;
}

}  // namespace detail

// ADR: fastest (SF, BW) pair whose link budget at max TP clears sensitivity
// plus margin, computed from mean path loss (shadowing excluded), then the
// minimum TP that still clears it. CF uniform random. Falls back to
// (SF12, 125 kHz, max TP) when nothing is feasible.
inline LoRaParams adr_policy(double distance_m, const ParameterDomains& d,
                             const ChannelModelConfig& ch, const AdrConfig& adr, int payload_bytes,
                             Rng& rng) {
  LoRaParams p;
  p.cf_hz = d.cf_hz[rng.bounded(d.cf_hz.size())];
  const int tp_max = detail::max_tp(d);
  for (const auto& [sf, bw] : detail::pairs_by_airtime(d, payload_bytes, ch)) {
    if (auto tp = detail::min_feasible_tp(sf, bw, distance_m, d, ch, adr.margin_db);
        tp && *tp <= tp_max) {
      p.sf = sf;
      p.bw_hz = bw;
      p.tp_dbm = *tp;
      return p;
    }
  }
  p.sf = *std::max_element(d.sf.begin(), d.sf.end());
  p.bw_hz = *std::min_element(d.bw_hz.begin(), d.bw_hz.end());
  p.tp_dbm = tp_max;
  return p;
}

// RS-LoRa: SF drawn locally with probability proportional to 1/ToA over the
// SFs feasible at max TP and 125 kHz, which keeps airtime-driven collision
// pressure roughly even across SFs; TP is the minimum feasible for the chosen
// SF; CF uniform random.
inline LoRaParams rs_lora_policy(double distance_m, const ParameterDomains& d,
                                 const ChannelModelConfig& ch, const AdrConfig& adr,
                                 int payload_bytes, Rng& rng) {
  LoRaParams p;
  const double bw = *std::min_element(d.bw_hz.begin(), d.bw_hz.end());
  p.bw_hz = bw;

  std::vector<int> feasible;
  std::vector<double> weight;
  double weight_sum = 0.0;
  for (int sf : d.sf) {
    if (detail::min_feasible_tp(sf, bw, distance_m, d, ch, adr.margin_db)) {
      feasible.push_back(sf);
      const double w = 1.0 / time_on_air_s(payload_bytes, {sf, bw}, ch);
      weight.push_back(w);
      weight_sum += w;
    }
  }

  const double u_sf = rng.uniform01();  // drawn before CF so stream use is fixed per call
  p.cf_hz = d.cf_hz[rng.bounded(d.cf_hz.size())];

  if (feasible.empty()) {
    p.sf = *std::max_element(d.sf.begin(), d.sf.end());
    p.tp_dbm = detail::max_tp(d);
    return p;
  }
  double acc = 0.0;
  p.sf = feasible.back();
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    acc += weight[i] / weight_sum;
    if (u_sf < acc) {
      p.sf = feasible[i];
      break;
    }
  }
  p.tp_dbm = *detail::min_feasible_tp(p.sf, bw, distance_m, d, ch, adr.margin_db);
  return p;
}

}  // namespace dlora

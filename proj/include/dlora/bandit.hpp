#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlora/params.hpp"
#include "dlora/phy.hpp"

namespace dlora {

enum class Phase { Training, Test };

// One UCB1 bandit over an ordered arm list.
struct Bandit {
  std::vector<double> arms;       // parameter values, domain order
  std::vector<double> q;          // action-value estimate per arm
  std::vector<std::uint64_t> n;   // pull count per arm
  std::uint64_t t = 0;            // total pulls of this bandit

  explicit Bandit(std::vector<double> arm_values = {})
      : arms(std::move(arm_values)), q(arms.size(), 0.0), n(arms.size(), 0) {}
};

// Arm selection. Training: unpulled arms are served round-robin first (the
// forced initialization pass), then UCB1 with exploration weight c and
// natural log; ties go to the lowest index. Test: greedy argmax over q with
// frozen estimates.
inline std::size_t ucb_select(const Bandit& b, double c, Phase phase) {
  if (b.arms.empty()) throw std::invalid_argument("ucb_select: bandit has no arms");
  if (phase == Phase::Training) {
    for (std::size_t a = 0; a < b.n.size(); ++a)
      if (b.n[a] == 0) return a;
  }
  std::size_t best = 0;
  double best_score = -1e300;
  for (std::size_t a = 0; a < b.arms.size(); ++a) {
    double score = b.q[a];
    if (phase == Phase::Training)
      score += c * std::sqrt(std::log(static_cast<double>(b.t)) / (2.0 * static_cast<double>(b.n[a])));
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

// Incremental sample mean: q(a) <- q(a) + (r - q(a)) / n(a).
inline void q_update(Bandit& b, std::size_t arm, double reward) {
  if (arm >= b.arms.size()) throw std::invalid_argument("q_update: arm index out of range");
  b.n[arm] += 1;
  b.q[arm] += (reward - b.q[arm]) / static_cast<double>(b.n[arm]);
  b.t += 1;
}

// Per-parameter rewards delivered after each transmission, and the metric
// factors that bias them toward EE/TH objectives.
struct Rewards {
  double sf = 0.0;
  double bw = 0.0;
  double cf = 0.0;
  double tp = 0.0;
};

struct RewardConfig {
  // Rows indexed by PacketFate (Received, CollisionLoss, SignalLoss),
  // columns sf/bw/cf/tp.
  std::array<std::array<double, 4>, 3> table{{
      {1.0, 1.0, 1.0, 1.0},
      {-1.0, -0.5, -0.5, 0.0},
      {-0.5, -0.5, 0.0, -1.0},
  }};
  double xi = 0.0;    // SF metric factor
  double zeta = 0.0;  // BW metric factor
  double eta = 0.0;   // TP metric factor
};

inline Rewards assign_rewards(PacketFate fate, const RewardConfig& cfg) {
  const auto& row = cfg.table[static_cast<std::size_t>(fate)];
  return {row[0], row[1], row[2], row[3]};
}

// Reward shaping toward shorter airtime (small SF, wide BW) and lower
// transmit power, each term normalized over the node's parameter domain.
// Applied on every outcome, loss or success.
inline Rewards apply_metric_terms(Rewards r, const LoRaParams& chosen, const ParameterDomains& d,
                                  const RewardConfig& cfg) {
  double sf_weight_sum = 0.0;
  for (int sf : d.sf) sf_weight_sum += sf / std::exp2(static_cast<double>(sf));
  double bw_sum = 0.0;
  for (double bw : d.bw_hz) bw_sum += bw;
  double tp_sum = 0.0;
  for (int tp : d.tp_dbm) tp_sum += tp;

  r.sf += cfg.xi * (chosen.sf / std::exp2(static_cast<double>(chosen.sf))) / sf_weight_sum;
  r.bw += cfg.zeta * chosen.bw_hz / bw_sum;
  // Share of the power budget saved: rewards low TP, so positive eta trades
  // delivery for energy the way the EE and Balance presets expect.
  r.tp += cfg.eta * (1.0 - chosen.tp_dbm / tp_sum);
  return r;
}

// Named metric-factor presets (xi, zeta, eta).
enum class DLoraVariant { Pdr, Ee, Th, Balance };

inline void apply_variant(RewardConfig& cfg, DLoraVariant v) {
  switch (v) {
    case DLoraVariant::Pdr: cfg.xi = 0.0; cfg.zeta = 0.0; cfg.eta = 0.0; break;
    case DLoraVariant::Ee: cfg.xi = 0.0; cfg.zeta = 0.0; cfg.eta = 3.5; break;
    case DLoraVariant::Th: cfg.xi = 10.0; cfg.zeta = 10.0; cfg.eta = 0.0; break;
    case DLoraVariant::Balance: cfg.xi = 0.0; cfg.zeta = 0.0; cfg.eta = 1.8; break;
  }
}

// A node's agent: four independent bandits, one per parameter dimension.
struct AgentState {
  Bandit sf;
  Bandit bw;
  Bandit cf;
  Bandit tp;
  double exploration_c = 2.0;

  AgentState() = default;

  AgentState(const ParameterDomains& d, double c) : exploration_c(c) {
    auto to_doubles = [](const auto& v) {
      std::vector<double> out;
      out.reserve(v.size());
      for (auto x : v) out.push_back(static_cast<double>(x));
      return out;
    };
    sf = Bandit(to_doubles(d.sf));
    bw = Bandit(to_doubles(d.bw_hz));
    cf = Bandit(to_doubles(d.cf_hz));
    tp = Bandit(to_doubles(d.tp_dbm));
  }

  struct Selection {
    LoRaParams params;
    std::size_t sf_arm, bw_arm, cf_arm, tp_arm;
  };

  Selection select(Phase phase) const {
    Selection s{};
    s.sf_arm = ucb_select(sf, exploration_c, phase);
    s.bw_arm = ucb_select(bw, exploration_c, phase);
    s.cf_arm = ucb_select(cf, exploration_c, phase);
    s.tp_arm = ucb_select(tp, exploration_c, phase);
    s.params.sf = static_cast<int>(sf.arms[s.sf_arm]);
    s.params.bw_hz = bw.arms[s.bw_arm];
    s.params.cf_hz = cf.arms[s.cf_arm];
    s.params.tp_dbm = static_cast<int>(tp.arms[s.tp_arm]);
    return s;
  }

  void update(const Selection& sel, const Rewards& r) {
    q_update(sf, sel.sf_arm, r.sf);
    q_update(bw, sel.bw_arm, r.bw);
    q_update(cf, sel.cf_arm, r.cf);
    q_update(tp, sel.tp_arm, r.tp);
  }
};

// --- agent snapshot (train -> test handoff, inspection) ---

inline nlohmann::json bandit_to_json(const Bandit& b) {
  return {{"arms", b.arms}, {"q", b.q}, {"n", b.n}, {"t", b.t}};
}

inline Bandit bandit_from_json(const nlohmann::json& j) {
  Bandit b(j.at("arms").get<std::vector<double>>());
  b.q = j.at("q").get<std::vector<double>>();
  b.n = j.at("n").get<std::vector<std::uint64_t>>();
  b.t = j.at("t").get<std::uint64_t>();
  if (b.q.size() != b.arms.size() || b.n.size() != b.arms.size())
    throw std::invalid_argument("agent snapshot: arm/q/n length mismatch");
  return b;
}

inline nlohmann::json agents_to_json(const std::vector<AgentState>& agents) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AgentState& a : agents)
    arr.push_back({{"sf", bandit_to_json(a.sf)},
                   {"bw", bandit_to_json(a.bw)},
                   {"cf", bandit_to_json(a.cf)},
                   {"tp", bandit_to_json(a.tp)},
                   {"exploration_c", a.exploration_c}});
  return {{"agents", arr}};
}

inline std::vector<AgentState> agents_from_json(const nlohmann::json& j) {
  std::vector<AgentState> agents;
  for (const auto& a : j.at("agents")) {
    AgentState st;
    st.sf = bandit_from_json(a.at("sf"));
    st.bw = bandit_from_json(a.at("bw"));
    st.cf = bandit_from_json(a.at("cf"));
    st.tp = bandit_from_json(a.at("tp"));
    st.exploration_c = a.at("exploration_c").get<double>();
    agents.push_back(std::move(st));
  }
  return agents;
}

}  // namespace dlora

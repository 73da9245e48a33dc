#pragma once

#include <cstdint>
#include <memory>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlora/bandit.hpp"
#include "dlora/collision.hpp"
#include "dlora/network.hpp"
#include "dlora/params.hpp"
#include "dlora/phy.hpp"
#include "dlora/policy.hpp"
#include "dlora/rng.hpp"

namespace dlora {

struct SimConfig {
  int n_nodes = 50;
  double radius_m = 1000.0;
  int payload_bytes = 20;
  double lambda_pps = 0.25;  // packets/s per node, exponential gaps
  int packets_per_node_per_episode = 100;
  int n_train_episodes = 50;  // M
  int n_test_episodes = 10;
  std::uint64_t seed = 1;
  PolicySpec policy = parse_policy("dlora-pdr");
  double exploration_c = 2.0;
  ChannelModelConfig channel;
  CollisionConfig collision;
  AdrConfig adr;
  ParameterDomains domains;
  RewardConfig reward;
  UtilityWeights utility;
  // Optional explicit node placement; overrides the random disk topology.
  std::vector<Position> node_positions;
};

inline void validate_config(const SimConfig& c) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw std::invalid_argument(field + ": " + msg);
  };
  if (c.n_nodes < 1) fail("n_nodes", "must be >= 1");
  if (!(c.radius_m > 0)) fail("radius_m", "must be > 0");
  if (c.payload_bytes < 1) fail("payload_bytes", "must be >= 1");
  if (!(c.lambda_pps > 0)) fail("lambda_pps", "must be > 0");
  if (c.packets_per_node_per_episode < 1) fail("packets_per_node_per_episode", "must be >= 1");
  if (c.n_train_episodes < 0) fail("n_train_episodes", "must be >= 0");
  if (c.n_test_episodes < 0) fail("n_test_episodes", "must be >= 0");
  if (!(c.exploration_c >= 0)) fail("agent.exploration_c", "must be >= 0");
  if (!(c.collision.capture_threshold_db >= 0)) fail("collision.capture_threshold_db", "must be >= 0");
  if (!(c.adr.margin_db >= 0)) fail("adr.margin_db", "must be >= 0");
  if (!c.node_positions.empty() && static_cast<int>(c.node_positions.size()) != c.n_nodes)
    fail("node_positions", "must list exactly n_nodes positions");
  validate_channel(c.channel);
  validate_domains(c.domains);
  validate_weights(c.utility);
}

struct EpisodeResult {
  EpisodeMetrics metrics;
  std::vector<Node> nodes;  // ledgers at episode end
  Gateway gateway;
};

struct EpisodeRow {
  int episode = 0;  // 1-based within its phase
  Phase phase = Phase::Training;
  EpisodeMetrics metrics;
};

struct ExperimentResult {
  std::vector<EpisodeRow> rows;  // training episodes then test episodes
  std::vector<Position> topology;
  std::vector<AgentState> agents;  // final q-tables (train -> test handoff)
  std::vector<PacketRecord> trace;  // per-packet records, kept only on request
};

// Single-gateway uplink simulator. One instance is strictly single-threaded
// and deterministic; run independent instances for parallelism.
class SimEngine {
 public:
  explicit SimEngine(SimConfig cfg)
      : cfg_(std::move(cfg)),
        traffic_(make_stream(cfg_.seed, Stream::Traffic)),
        shadowing_(make_stream(cfg_.seed, Stream::Shadowing)),
        noise_(make_stream(cfg_.seed, Stream::Noise)),
        policy_rng_(make_stream(cfg_.seed, Stream::Policy)) {
    validate_config(cfg_);
    if (cfg_.policy.kind == PolicyKind::DLora && cfg_.policy.variant)
      apply_variant(cfg_.reward, *cfg_.policy.variant);

    if (cfg_.node_positions.empty()) {
      Rng topo = make_stream(cfg_.seed, Stream::Topology);
      positions_ = generate_topology(cfg_.n_nodes, cfg_.radius_m, topo);
    } else {
      positions_ = cfg_.node_positions;
    }
    if (cfg_.policy.kind == PolicyKind::DLora)
      agents_.assign(static_cast<std::size_t>(cfg_.n_nodes),
                     AgentState(cfg_.domains, cfg_.exploration_c));
  }

  const SimConfig& config() const { return cfg_; }
  const std::vector<Position>& topology() const { return positions_; }
  std::vector<AgentState>& agents() { return agents_; }

  // One full network transmission run: ledgers reset, q-tables persist.
  EpisodeResult run_episode(Phase phase, std::vector<PacketRecord>* trace_out = nullptr) {
    EpisodeResult ep;
    ep.gateway.pos = {0.0, 0.0};
    ep.nodes.resize(static_cast<std::size_t>(cfg_.n_nodes));
    for (int i = 0; i < cfg_.n_nodes; ++i) {
      ep.nodes[static_cast<std::size_t>(i)].id = i;
      ep.nodes[static_cast<std::size_t>(i)].pos = positions_[static_cast<std::size_t>(i)];
    }

    all_tx_.clear();
    selections_.clear();
    live_.clear();
    overlap_ids_.clear();
    events_ = EventQueue();
    seq_ = 0;

    started_.assign(static_cast<std::size_t>(cfg_.n_nodes), 0);
    for (int i = 0; i < cfg_.n_nodes; ++i)
      push_event({traffic_.exponential(cfg_.lambda_pps), EventKind::PacketStart, i, -1});

    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.kind == EventKind::PacketEnd)
        handle_end(ev, phase, ep, trace_out);
      else
        handle_start(ev, phase);
    }

    ep.metrics.pdr = compute_pdr(ep.nodes, ep.gateway);
    ep.metrics.ee = compute_ee_bits_per_mj(ep.nodes, ep.gateway);
    ep.metrics.th = compute_th_bps(ep.nodes, ep.gateway);
    return ep;
  }

  // M training episodes, then the test phase with frozen greedy agents.
  ExperimentResult run_experiment(bool keep_trace = false) {
    ExperimentResult result;
    result.topology = positions_;
    for (int e = 1; e <= cfg_.n_train_episodes; ++e) {
      EpisodeResult ep = run_episode(Phase::Training, keep_trace ? &result.trace : nullptr);
      result.rows.push_back({e, Phase::Training, ep.metrics});
    }
    for (int e = 1; e <= cfg_.n_test_episodes; ++e) {
      EpisodeResult ep = run_episode(Phase::Test, keep_trace ? &result.trace : nullptr);
      result.rows.push_back({e, Phase::Test, ep.metrics});
    }
    result.agents = agents_;
    return result;
  }

 private:
  enum class EventKind { PacketEnd = 0, PacketStart = 1 };

  struct Event {
    double time;
    EventKind kind;
    int node_id;
    int packet_id;
    std::uint64_t seq = 0;
  };

  // Ends before starts at equal timestamps (half-open intervals), then
  // node-id, then FIFO.
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      if (a.node_id != b.node_id) return a.node_id > b.node_id;
      return a.seq > b.seq;
    }
  };
  using EventQueue = std::priority_queue<Event, std::vector<Event>, EventAfter>;

  void push_event(Event ev) {
    ev.seq = seq_++;
    events_.push(ev);
  }

  LoRaParams select_params(int node_id, Phase phase, AgentState::Selection* sel_out) {
    const double dist = distance(positions_[static_cast<std::size_t>(node_id)], {0.0, 0.0});
    switch (cfg_.policy.kind) {
      case PolicyKind::Random:
        return random_policy(cfg_.domains, policy_rng_);
      case PolicyKind::RoundRobin:
        return round_robin_policy(node_id, cfg_.domains, policy_rng_);
      case PolicyKind::Adr:
        return adr_policy(dist, cfg_.domains, cfg_.channel, cfg_.adr, cfg_.payload_bytes, policy_rng_);
      case PolicyKind::RsLora:
        return rs_lora_policy(dist, cfg_.domains, cfg_.channel, cfg_.adr, cfg_.payload_bytes,
                              policy_rng_);
      case PolicyKind::DLora: {
        *sel_out = agents_[static_cast<std::size_t>(node_id)].select(phase);
        return sel_out->params;
      }
    }
    throw std::logic_error("select_params: unhandled policy kind");
  }

  void handle_start(const Event& ev, Phase phase) {
    const int node = ev.node_id;
    AgentState::Selection sel{};
    const LoRaParams params = select_params(node, phase, &sel);

    const double dist = distance(positions_[static_cast<std::size_t>(node)], {0.0, 0.0});
    const double shadow = shadowing_.normal(0.0, cfg_.channel.shadowing_sigma_db);
    const double toa = time_on_air_s(cfg_.payload_bytes, params, cfg_.channel);

    Transmission tx;
    tx.packet_id = static_cast<int>(all_tx_.size());
    tx.node_id = node;
    tx.params = params;
    tx.start_s = ev.time;
    tx.end_s = ev.time + toa;
    tx.rssi_dbm = rssi_at_gateway_dbm(params, dist, shadow, cfg_.channel);

    // Register mutual time overlap with everything currently in the air; a
    // pair overlaps iff the later start falls before the earlier end, so
    // every overlapping pair is recorded exactly once, here.
    overlap_ids_.emplace_back();
    for (int live_id : live_) {
      overlap_ids_[static_cast<std::size_t>(live_id)].push_back(tx.packet_id);
      overlap_ids_[static_cast<std::size_t>(tx.packet_id)].push_back(live_id);
    }
    live_.push_back(tx.packet_id);
    all_tx_.push_back(tx);
    selections_.push_back(sel);

    push_event({tx.end_s, EventKind::PacketEnd, node, tx.packet_id});

    if (++started_[static_cast<std::size_t>(node)] < cfg_.packets_per_node_per_episode)
      push_event({tx.end_s + traffic_.exponential(cfg_.lambda_pps), EventKind::PacketStart, node, -1});
  }

  void handle_end(const Event& ev, Phase phase, EpisodeResult& ep,
                  std::vector<PacketRecord>* trace_out) {
    const Transmission& tx = all_tx_[static_cast<std::size_t>(ev.packet_id)];
    live_.erase(std::find(live_.begin(), live_.end(), tx.packet_id));

    // Same-SF co-channel packets collide; different-SF co-channel packets
    // enter the SINR denominator instead.
    sinr_rssis_.clear();
    collider_rssis_.clear();
    for (int other_id : overlap_ids_[static_cast<std::size_t>(tx.packet_id)]) {
      const Transmission& other = all_tx_[static_cast<std::size_t>(other_id)];
      if (!cf_collision(tx, other)) continue;
      if (sf_collision(tx, other))
        collider_rssis_.push_back(other.rssi_dbm);
      else
        sinr_rssis_.push_back(other.rssi_dbm);
    }
    const bool collided =
        !collider_rssis_.empty() &&
        !power_capture(tx.rssi_dbm, collider_rssis_, cfg_.collision.capture_threshold_db);

    const double noise_dbm = thermal_noise_dbm(tx.params.bw_hz, cfg_.channel.noise_figure_db) +
                             noise_.normal(0.0, cfg_.channel.noise_sigma_db);
    const double sinr = compute_sinr_db(tx.rssi_dbm, sinr_rssis_, noise_dbm);
    const bool signal_lost = !decode_check(tx.rssi_dbm, sinr, tx.params);

    // Collision loss takes precedence when both conditions hold.
    PacketFate fate = PacketFate::Received;
    if (collided)
      fate = PacketFate::CollisionLoss;
    else if (signal_lost)
      fate = PacketFate::SignalLoss;

    PacketRecord rec;
    rec.packet_id = tx.packet_id;
    rec.node_id = tx.node_id;
    rec.payload_bytes = cfg_.payload_bytes;
    rec.params = tx.params;
    rec.start_s = tx.start_s;
    rec.toa_s = tx.end_s - tx.start_s;
    rec.energy_mj = packet_energy_mj(tx.params, rec.toa_s);
    rec.rssi_dbm = tx.rssi_dbm;
    rec.sinr_db = sinr;
    rec.collided = collided;
    rec.signal_lost = signal_lost;
    rec.fate = fate;

    Node& node = ep.nodes[static_cast<std::size_t>(tx.node_id)];
    node.sent.push_back(rec);
    if (fate == PacketFate::Received) {
      node.received_ok.push_back(node.sent.size() - 1);
      ep.gateway.received.push_back(rec);
    } else {
      node.lost.push_back(node.sent.size() - 1);
    }
    if (trace_out) trace_out->push_back(rec);

    if (cfg_.policy.kind == PolicyKind::DLora && phase == Phase::Training) {
      const Rewards shaped =
          apply_metric_terms(assign_rewards(fate, cfg_.reward), tx.params, cfg_.domains, cfg_.reward);
      agents_[static_cast<std::size_t>(tx.node_id)].update(
          selections_[static_cast<std::size_t>(tx.packet_id)], shaped);
    }
  }

  SimConfig cfg_;
  std::vector<Position> positions_;
  std::vector<AgentState> agents_;

  Rng traffic_;
  Rng shadowing_;
  Rng noise_;
  Rng policy_rng_;

  EventQueue events_;
  std::uint64_t seq_ = 0;
  std::vector<int> started_;
  std::vector<Transmission> all_tx_;                 // episode-local, indexed by packet_id
  std::vector<AgentState::Selection> selections_;    // parallel to all_tx_
  std::vector<std::vector<int>> overlap_ids_;        // parallel to all_tx_
  std::vector<int> live_;                            // packet ids currently in the air
  std::vector<double> sinr_rssis_;
  std::vector<double> collider_rssis_;
};

inline ExperimentResult run_experiment(const SimConfig& cfg, bool keep_trace = false) {
  SimEngine engine(cfg);
  return engine.run_experiment(keep_trace);
}

}  // namespace dlora

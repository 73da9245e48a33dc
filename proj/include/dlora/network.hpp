#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dlora/phy.hpp"
#include "dlora/rng.hpp"

namespace dlora {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Everything the metrics and the agents need to know about one sent packet.
struct PacketRecord {
  int packet_id = 0;
  int node_id = 0;
  int payload_bytes = 0;
  LoRaParams params;
  double start_s = 0.0;
  double toa_s = 0.0;
  double energy_mj = 0.0;
  double rssi_dbm = 0.0;
  double sinr_db = 0.0;
  bool collided = false;     // C_j
  bool signal_lost = false;  // S_j
  PacketFate fate = PacketFate::Received;
};

struct Node {
  int id = 0;
  Position pos;
  std::vector<PacketRecord> sent;
  std::vector<std::size_t> received_ok;  // indexes into sent
  std::vector<std::size_t> lost;         // indexes into sent

  void reset_ledgers() {
    sent.clear();
    received_ok.clear();
    lost.clear();
  }
};

struct Gateway {
  Position pos;
  std::vector<PacketRecord> received;  // fate == Received only
};

struct EpisodeMetrics {
  double pdr = 0.0;      // in [0, 1]
  double ee = 0.0;       // bits per mJ
  double th = 0.0;       // bps
  double utility = 0.0;  // weighted score, filled after normalization
};

inline double compute_pdr(std::span<const Node> nodes, const Gateway& gw) {
  std::size_t sent = 0;
  for (const Node& n : nodes) sent += n.sent.size();
  if (sent == 0) throw std::domain_error("compute_pdr: no packets sent");
  return static_cast<double>(gw.received.size()) / static_cast<double>(sent);
}

inline double compute_ee_bits_per_mj(std::span<const Node> nodes, const Gateway& gw) {
  double bits = 0.0;
  for (const PacketRecord& r : gw.received) bits += 8.0 * r.payload_bytes;
  double energy = 0.0;
  for (const Node& n : nodes)
    for (const PacketRecord& r : n.sent) energy += r.energy_mj;
  if (!(energy > 0)) throw std::domain_error("compute_ee: total energy is zero");
  return bits / energy;
}

inline double compute_th_bps(std::span<const Node> nodes, const Gateway& gw) {
  double bits = 0.0;
  for (const PacketRecord& r : gw.received) bits += 8.0 * r.payload_bytes;
  double airtime = 0.0;
  for (const Node& n : nodes)
    for (const PacketRecord& r : n.sent) airtime += r.toa_s;
  if (!(airtime > 0)) throw std::domain_error("compute_th: total airtime is zero");
  return bits / airtime;
}

struct UtilityWeights {
  double theta = 1.0 / 3.0;
  double phi = 1.0 / 3.0;
  double psi = 1.0 - 2.0 / 3.0;
};

inline void validate_weights(const UtilityWeights& w, const std::string& path = "utility") {
  if (w.theta < 0 || w.phi < 0 || w.psi < 0)
    throw std::invalid_argument(path + ": weights must be >= 0");
  if (std::fabs(w.theta + w.phi + w.psi - 1.0) > 1e-9)
    throw std::invalid_argument(path + ": theta + phi + psi must equal 1");
}

// Weighted utility. PDR is already in [0,1]; ee_norm and th_norm must be
// min-max normalized over the episode set being compared (see
// normalized_utilities), otherwise TH's scale drowns the other weights.
inline double utility_score(double pdr, double ee_norm, double th_norm, const UtilityWeights& w) {
  validate_weights(w);
  return w.theta * pdr + w.phi * ee_norm + w.psi * th_norm;
}

// Min-max normalizes EE and TH across `set`, then fills each element's
// utility. A degenerate axis (max == min) normalizes to 0.
inline void fill_utilities(std::span<EpisodeMetrics> set, const UtilityWeights& w) {
  validate_weights(w);
  if (set.empty()) return;
  double ee_min = set[0].ee, ee_max = set[0].ee, th_min = set[0].th, th_max = set[0].th;
  for (const EpisodeMetrics& m : set) {
    ee_min = std::min(ee_min, m.ee);
    ee_max = std::max(ee_max, m.ee);
    th_min = std::min(th_min, m.th);
    th_max = std::max(th_max, m.th);
  }
  auto norm = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; };
  for (EpisodeMetrics& m : set)
    m.utility = utility_score(m.pdr, norm(m.ee, ee_min, ee_max), norm(m.th, th_min, th_max), w);
}

// Nodes i.i.d. uniform over the disk of the given radius, gateway at the
// origin. Radial coordinate r = R*sqrt(u) makes the density uniform in area.
inline std::vector<Position> generate_topology(int n_nodes, double radius_m, Rng& rng) {
  if (n_nodes < 1) throw std::invalid_argument("generate_topology: n_nodes must be >= 1");
  if (!(radius_m > 0)) throw std::invalid_argument("generate_topology: radius must be > 0");
  std::vector<Position> pos;
  pos.reserve(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    const double r = radius_m * std::sqrt(rng.uniform01());
    const double ang = 6.283185307179586476925286766559 * rng.uniform01();
    pos.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  return pos;
}

}  // namespace dlora

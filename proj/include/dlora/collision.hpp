#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "dlora/phy.hpp"

namespace dlora {

// One packet in the air: parameters, half-open transmission interval and the
// RSSI sampled at send time (constant for the whole duration).
struct Transmission {
  int packet_id = 0;
  int node_id = 0;
  LoRaParams params;
  double start_s = 0.0;
  double end_s = 0.0;
  double rssi_dbm = 0.0;
};

// Half-open intervals: back-to-back packets do not overlap.
inline bool timing_overlap(const Transmission& a, const Transmission& b) {
  return a.start_s < b.end_s && b.start_s < a.end_s;
}

// Frequency guard band keyed on the wider of the two bandwidths.
inline double cf_guard_hz(double bw_hz) {
  if (bw_hz >= 500e3 - 1.0) return 120e3;
  if (bw_hz >= 250e3 - 1.0) return 60e3;
  return 30e3;
}

inline bool cf_collision(const Transmission& a, const Transmission& b) {
  const double guard = cf_guard_hz(std::max(a.params.bw_hz, b.params.bw_hz));
  return std::fabs(a.params.cf_hz - b.params.cf_hz) < guard;
}

// Same-SF packets collide outright; different SFs are quasi-orthogonal and
// handled through SINR instead.
inline bool sf_collision(const Transmission& a, const Transmission& b) {
  return a.params.sf == b.params.sf;
}

// Capture effect: the packet survives a collision iff it clears the strongest
// colliding packet by the capture threshold. Vacuously true with no colliders.
inline bool power_capture(double rssi_dbm, std::span<const double> collider_rssi_dbm,
                          double capture_threshold_db) {
  if (collider_rssi_dbm.empty()) return true;
  const double strongest = *std::max_element(collider_rssi_dbm.begin(), collider_rssi_dbm.end());
  return rssi_dbm >= strongest + capture_threshold_db;
}

inline bool power_capture(const Transmission& a, std::span<const Transmission> colliders,
                          double capture_threshold_db) {
  double strongest = -1e300;
  for (const Transmission& c : colliders) strongest = std::max(strongest, c.rssi_dbm);
  return colliders.empty() || a.rssi_dbm >= strongest + capture_threshold_db;
}

struct CollisionConfig {
  double capture_threshold_db = 6.0;
};

// Batch collision resolution: C_j = 1 exactly when some other transmission
// has time overlap AND the same SF AND a CF offset inside the guard band, and
// the packet fails capture against that set. RSSI is constant per
// transmission, so this equals the engine's online per-end-event evaluation.
inline std::map<int, bool> resolve_collisions(std::span<const Transmission> batch,
                                              double capture_threshold_db) {
  std::map<int, bool> collided;
  std::vector<double> collider_rssi;
  for (const Transmission& tx : batch) {
    collider_rssi.clear();
    for (const Transmission& other : batch) {
      if (other.packet_id == tx.packet_id) continue;
      if (timing_overlap(tx, other) && sf_collision(tx, other) && cf_collision(tx, other))
        collider_rssi.push_back(other.rssi_dbm);
    }
    collided[tx.packet_id] =
        !collider_rssi.empty() && !power_capture(tx.rssi_dbm, collider_rssi, capture_threshold_db);
  }
  return collided;
}

}  // namespace dlora

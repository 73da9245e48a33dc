#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "dlora/params.hpp"

namespace dlora {

// Log-distance path loss channel plus the radio bookkeeping constants that
// enter the airtime and noise formulas. Defaults follow the CN470 evaluation
// setting: Lpl(d0)=128.95 dB at d0=1000 m, gamma=2.32, shadowing sigma 7.8 dB,
// 1 dB noise jitter, 8 preamble symbols, CRC on, explicit header, no low-data-
// rate optimization, coding rate 4/5.
struct ChannelModelConfig {
  double mean_path_loss_d0_db = 128.95;
  double reference_distance_m = 1000.0;
  double path_loss_exponent = 2.32;
  double shadowing_sigma_db = 7.8;  // delta_1
  double noise_sigma_db = 1.0;      // delta_2
  double noise_figure_db = 6.0;
  int preamble_symbols = 8;
  int crc = 1;
  int explicit_header = 0;    // H: 0 = header present
  int low_data_rate_opt = 0;  // DE
  int coding_rate = 1;        // CR: 4/(4+CR)
  double min_distance_m = 1.0;
};

inline void validate_channel(const ChannelModelConfig& c, const std::string& path = "channel") {
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw std::invalid_argument(path + "." + field + ": " + msg);
  };
  if (!(c.reference_distance_m > 0)) fail("reference_distance_m", "must be > 0");
  if (!(c.path_loss_exponent > 0)) fail("path_loss_exponent", "must be > 0");
  if (!(c.shadowing_sigma_db >= 0)) fail("shadowing_sigma_db", "must be >= 0");
  if (!(c.noise_sigma_db >= 0)) fail("noise_sigma_db", "must be >= 0");
  if (c.preamble_symbols < 1) fail("preamble_symbols", "must be >= 1");
  if (c.crc != 0 && c.crc != 1) fail("crc", "must be 0 or 1");
  if (c.explicit_header != 0 && c.explicit_header != 1) fail("explicit_header", "must be 0 or 1");
  if (c.low_data_rate_opt != 0 && c.low_data_rate_opt != 1) fail("low_data_rate_opt", "must be 0 or 1");
  if (c.coding_rate < 1 || c.coding_rate > 4) fail("coding_rate", "must be in 1..4");
  if (!(c.min_distance_m > 0)) fail("min_distance_m", "must be > 0");
}

enum class PacketFate { Received = 0, CollisionLoss = 1, SignalLoss = 2 };

inline const char* fate_name(PacketFate f) {
  switch (f) {
    case PacketFate::Received: return "received";
    case PacketFate::CollisionLoss: return "collision_loss";
    case PacketFate::SignalLoss: return "signal_loss";
  }
  return "?";
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Payload symbol count. Integer arithmetic; the max(.,0) clamp makes tiny
// payloads at high SF bottom out at 8 symbols.
inline int payload_symbols(int payload_bytes, const LoRaParams& p, const ChannelModelConfig& cfg) {
  if (payload_bytes < 1) throw std::invalid_argument("payload_bytes must be >= 1");
  const int den = 4 * (p.sf - 2 * cfg.low_data_rate_opt);
  if (den <= 0) throw std::invalid_argument("payload_symbols: sf - 2*DE must be positive");
  const long long num = 8LL * payload_bytes - 4LL * p.sf + 28 + 16LL * cfg.crc - 20LL * cfg.explicit_header;
  if (num <= 0) return 8;
  const long long ceil_q = (num + den - 1) / den;
  return static_cast<int>(8 + ceil_q * (cfg.coding_rate + 4));
}

inline double symbol_time_s(int sf, double bw_hz) {
  if (!(bw_hz > 0)) throw std::invalid_argument("symbol_time_s: bw must be > 0");
  return std::exp2(static_cast<double>(sf)) / bw_hz;
}

inline double time_on_air_s(int payload_bytes, const LoRaParams& p, const ChannelModelConfig& cfg) {
  const double t_sym = symbol_time_s(p.sf, p.bw_hz);
  const double t_pre = (cfg.preamble_symbols + 4.25) * t_sym;
  const double t_pay = payload_symbols(payload_bytes, p, cfg) * t_sym;
  return t_pre + t_pay;
}

namespace detail {
// Sensitivity in dBm, rows BW 125/250/500 kHz, columns SF 7..12.
inline constexpr std::array<std::array<double, 6>, 3> kSensitivity{{
    {-123, -126, -129, -132, -133, -136},
    {-120, -123, -125, -128, -130, -133},
    {-116, -119, -122, -125, -128, -130},
}};

inline int bw_row(double bw_hz) {
  if (std::fabs(bw_hz - 125e3) <= 1.0) return 0;
  if (std::fabs(bw_hz - 250e3) <= 1.0) return 1;
  if (std::fabs(bw_hz - 500e3) <= 1.0) return 2;
  return -1;
}
}  // namespace detail

inline double receiver_sensitivity_dbm(int sf, double bw_hz) {
  const int row = detail::bw_row(bw_hz);
  if (row < 0 || sf < 7 || sf > 12)
    throw std::invalid_argument("receiver_sensitivity: (sf=" + std::to_string(sf) +
                                ", bw=" + std::to_string(bw_hz) + " Hz) outside the table");
  return detail::kSensitivity[static_cast<std::size_t>(row)][static_cast<std::size_t>(sf - 7)];
}

inline double sinr_threshold_db(int sf) {
  if (sf < 7 || sf > 12)
    throw std::invalid_argument("sinr_threshold: sf=" + std::to_string(sf) + " outside 7..12");
  // SF 7..12: -7.5, -10, -12.5, -15, -17.5, -20
  return -7.5 - 2.5 * (sf - 7);
}

inline double path_loss_db(double distance_m, const ChannelModelConfig& cfg) {
  const double d = std::max(distance_m, cfg.min_distance_m);
  return cfg.mean_path_loss_d0_db +
         10.0 * cfg.path_loss_exponent * std::log10(d / cfg.reference_distance_m);
}

// RSSI at the gateway for a given shadowing sample (pure: the sample is an
// input, drawn by the caller from N(0, delta_1^2)).
inline double rssi_at_gateway_dbm(const LoRaParams& p, double distance_m, double shadow_db,
                                  const ChannelModelConfig& cfg) {
  return p.tp_dbm - path_loss_db(distance_m, cfg) - shadow_db;
}

// Thermal noise floor for the receiver bandwidth, before the per-reception
// dB jitter is added.
inline double thermal_noise_dbm(double bw_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bw_hz) + noise_figure_db;
}

// SINR of a target against quasi-orthogonal (same CF, different SF)
// interferers, all powers summed in linear mW. With no interferers this
// reduces to RSSI - noise exactly.
inline double compute_sinr_db(double target_rssi_dbm, std::span<const double> interferer_rssi_dbm,
                              double noise_dbm) {
  if (interferer_rssi_dbm.empty()) return target_rssi_dbm - noise_dbm;
  double denom_mw = dbm_to_mw(noise_dbm);
  for (double rssi : interferer_rssi_dbm) denom_mw += dbm_to_mw(rssi);
  return 10.0 * std::log10(dbm_to_mw(target_rssi_dbm) / denom_mw);
}

// S_j = 0: the packet survives propagation iff RSSI clears the sensitivity
// for (SF, BW) and SINR clears the SF threshold.
inline bool decode_check(double target_rssi_dbm, double sinr_db, const LoRaParams& p) {
  return target_rssi_dbm >= receiver_sensitivity_dbm(p.sf, p.bw_hz) &&
         sinr_db >= sinr_threshold_db(p.sf);
}

// Transmit energy in millijoules: TP converted to linear milliwatts first,
// so that EE in bits/mJ is dimensionally consistent.
inline double packet_energy_mj(const LoRaParams& p, double toa_s) {
  if (!(toa_s > 0)) throw std::invalid_argument("packet_energy: toa must be > 0");
  return dbm_to_mw(static_cast<double>(p.tp_dbm)) * toa_s;
}

}  // namespace dlora

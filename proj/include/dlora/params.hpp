#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlora {

// CN470 parameter universes. Configured domains must be subsets of these.
inline constexpr std::array<int, 6> kSfUniverse{7, 8, 9, 10, 11, 12};
inline constexpr std::array<double, 3> kBwUniverseHz{125e3, 250e3, 500e3};
inline constexpr std::array<double, 8> kCfUniverseHz{470.1e6, 470.3e6, 470.5e6, 470.7e6,
                                                     470.9e6, 471.1e6, 471.3e6, 471.5e6};
inline constexpr std::array<int, 7> kTpUniverseDbm{2, 4, 6, 8, 10, 12, 14};

// One packet's transmission configuration.
struct LoRaParams {
  int sf = 7;
  double bw_hz = 125e3;
  double cf_hz = 470.1e6;
  int tp_dbm = 14;
};

// Parameter sets a node may choose from, in fixed order (round-robin and
// bandit arm indices key off these orders).
struct ParameterDomains {
  std::vector<int> sf{kSfUniverse.begin(), kSfUniverse.end()};
  std::vector<double> bw_hz{kBwUniverseHz.begin(), kBwUniverseHz.end()};
  std::vector<double> cf_hz{kCfUniverseHz.begin(), kCfUniverseHz.end()};
  std::vector<int> tp_dbm{kTpUniverseDbm.begin(), kTpUniverseDbm.end()};
};

inline bool in_universe(int value, const std::array<int, 6>& universe) {
  for (int u : universe)
    if (u == value) return true;
  return false;
}

inline bool in_universe(int value, const std::array<int, 7>& universe) {
  for (int u : universe)
    if (u == value) return true;
  return false;
}

template <std::size_t N>
bool in_universe(double value, const std::array<double, N>& universe, double tol = 1.0) {
  for (double u : universe)
    if (std::fabs(u - value) <= tol) return true;
  return false;
}

inline void validate_domains(const ParameterDomains& d) {
  if (d.sf.empty() || d.bw_hz.empty() || d.cf_hz.empty() || d.tp_dbm.empty())
    throw std::invalid_argument("parameter domains must be non-empty");
  for (std::size_t i = 0; i < d.sf.size(); ++i)
    if (!in_universe(d.sf[i], kSfUniverse))
      throw std::invalid_argument("domains.sf[" + std::to_string(i) + "]: " + std::to_string(d.sf[i]) +
                                  " is not a valid spreading factor (allowed 7..12)");
  for (std::size_t i = 0; i < d.bw_hz.size(); ++i)
    if (!in_universe(d.bw_hz[i], kBwUniverseHz))
      throw std::invalid_argument("domains.bw_hz[" + std::to_string(i) + "]: " + std::to_string(d.bw_hz[i]) +
                                  " is not a valid bandwidth (allowed 125e3, 250e3, 500e3 Hz)");
  for (std::size_t i = 0; i < d.cf_hz.size(); ++i)
    if (!in_universe(d.cf_hz[i], kCfUniverseHz))
      throw std::invalid_argument("domains.cf_hz[" + std::to_string(i) + "]: " + std::to_string(d.cf_hz[i]) +
                                  " is not a valid carrier frequency (allowed 470.1e6..471.5e6 Hz step 0.2e6)");
  for (std::size_t i = 0; i < d.tp_dbm.size(); ++i)
    if (!in_universe(d.tp_dbm[i], kTpUniverseDbm))
      throw std::invalid_argument("domains.tp_dbm[" + std::to_string(i) + "]: " + std::to_string(d.tp_dbm[i]) +
                                  " is not a valid transmit power (allowed 2,4,...,14 dBm)");
}

inline bool params_in_domains(const LoRaParams& p, const ParameterDomains& d) {
  auto has_int = [](const std::vector<int>& v, int x) {
    for (int e : v)
      if (e == x) return true;
    return false;
  };
  auto has_dbl = [](const std::vector<double>& v, double x) {
    for (double e : v)
      if (std::fabs(e - x) <= 1.0) return true;
    return false;
  };
  return has_int(d.sf, p.sf) && has_dbl(d.bw_hz, p.bw_hz) && has_dbl(d.cf_hz, p.cf_hz) &&
         has_int(d.tp_dbm, p.tp_dbm);
}

}  // namespace dlora

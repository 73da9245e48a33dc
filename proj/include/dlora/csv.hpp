#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace dlora {

// Shortest decimal representation that round-trips the exact double, so CSV
// serialization is loss-free and byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline constexpr const char* kResultHeader =
    "policy,radius_m,seed,episode,phase,pdr,ee_bits_per_mj,th_bps,utility";

struct ResultRow {
  std::string policy;
  double radius_m = 0.0;
  std::uint64_t seed = 0;
  int episode = 0;
  std::string phase;  // "train" or "test"
  double pdr = 0.0;
  double ee = 0.0;
  double th = 0.0;
  double utility = 0.0;
};

inline std::string to_csv_line(const ResultRow& r) {
  std::string out;
  out.reserve(96);
  out += r.policy;
  out += ',';
  out += format_double(r.radius_m);
  out += ',';
  out += std::to_string(r.seed);
  out += ',';
  out += std::to_string(r.episode);
  out += ',';
  out += r.phase;
  out += ',';
  out += format_double(r.pdr);
  out += ',';
  out += format_double(r.ee);
  out += ',';
  out += format_double(r.th);
  out += ',';
  out += format_double(r.utility);
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1)
  std::size_t n = 0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd s;
  s.n = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace dlora

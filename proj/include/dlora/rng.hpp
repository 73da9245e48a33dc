#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace dlora {

// Seed mixer, also used to derive per-stream seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled distributions. The standard <random>
// distributions are implementation-defined, so simulator output would not be
// reproducible across toolchains; everything here is fully specified.
class Rng {
 public:
  Rng() : Rng(0, 0) {}

  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed ^ (stream * 0xd2b74407b1ce6e93ull + 0x9e3779b97f4a7c15ull);
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n). n must be >= 1.
  std::size_t bounded(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log(1.0 - uniform01()) / rate; }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

// Named streams split from the run seed. Draws in one stream never perturb
// another, so e.g. adding a shadowing sample cannot shift traffic arrivals.
enum class Stream : std::uint64_t {
  Topology = 1,
  Traffic = 2,
  Shadowing = 3,
  Noise = 4,
  Policy = 5,
};

inline Rng make_stream(std::uint64_t root_seed, Stream stream) {
  return Rng(root_seed, static_cast<std::uint64_t>(stream));
}

}  // namespace dlora

#ifndef FEMTONET_COMMON_HPP
#define FEMTONET_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace femtonet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Vec2 &a, const Vec2 &b) { return a.x == b.x && a.y == b.y; }

// Error taxonomy shared by all modules. Callers in the CLI map these to exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class InvalidArgument : public Error {
public:
  using Error::Error;
};
class NotFound : public Error {
public:
  using Error::Error;
};
class PlacementInfeasible : public Error {
public:
  using Error::Error;
};
class DegenerateGeometry : public Error {
public:
  using Error::Error;
};
class InfeasibleAllocation : public Error {
public:
  using Error::Error;
};
class NonConvergence : public Error {
public:
  using Error::Error;
};
class ConfigError : public Error {
public:
  using Error::Error;
};

// Splits one user seed into independent streams: stream k of seed s is a
// splitmix64 hash of (s, k), so adding a stream never perturbs another.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(derive_seed(seed, stream)); }

// std::uniform_real_distribution and friends are implementation-defined, so
// draws go through these helpers to keep CSV output identical across toolchains.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double exponential(Rng &rng, double rate) {
  double u = uniform01(rng);
  return -std::log1p(-u) / rate;
}

inline double standard_normal(Rng &rng) {
  // Box-Muller; discard the second variate for simplicity.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
  // Rejection sampling avoids modulo bias.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace femtonet

#endif

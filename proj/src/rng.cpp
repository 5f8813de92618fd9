#include "obslearn/rng.hpp"

#include <cmath>

#include "obslearn/common.hpp"

namespace obslearn {

namespace {
// splitmix64 step; good enough mixing for stream derivation and draws.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Rng Rng::stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t s = mix(seed);
  s = mix(s ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  s = mix(s ^ (salt * 0x9e6c63d0876a9a35ULL + 1));
  Rng r;
  r.state_ = s == 0 ? 0x853c49e6748fea9bULL : s;
  return r;
}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % n;
}

bool Rng::bernoulli(double p) { return uniform01() < p; }

double Rng::normal() {
  double u1 = uniform01();
  double u2 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::int64_t Rng::binomial(std::int64_t s, double p) {
  if (s < 0) throw DomainError("Rng::binomial: negative trial count");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return s;
  if (s <= 1024) {
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < s; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }
  // Gaussian approximation on the integer lattice for large shot counts.
  double mean = static_cast<double>(s) * p;
  double sd = std::sqrt(static_cast<double>(s) * p * (1.0 - p));
  double draw = std::round(mean + sd * normal());
  if (draw < 0) draw = 0;
  if (draw > static_cast<double>(s)) draw = static_cast<double>(s);
  return static_cast<std::int64_t>(draw);
}

}  // namespace obslearn

#ifndef OBSLEARN_RNG_HPP
#define OBSLEARN_RNG_HPP

#include <cstdint>

namespace obslearn {

/// Deterministic, platform-independent generator. Streams are derived from
/// (seed, index, salt) so per-sample draws do not depend on evaluation order;
/// two datasets generated with the same seed are byte-identical regardless of
/// threading.
class Rng {
 public:
  Rng() : state_(0x9e3779b97f4a7c15ULL) {}
  explicit Rng(std::uint64_t seed) : state_(seed) { next(); }

  static Rng stream(std::uint64_t seed, std::uint64_t index,
                    std::uint64_t salt = 0);

  std::uint64_t next();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p);
  // Standard normal via Box-Muller (no cached spare; stream-stable).
  double normal();
  // Number of successes among s trials with success probability p.
  std::int64_t binomial(std::int64_t s, double p);

 private:
  std::uint64_t state_;
};

}  // namespace obslearn

#endif

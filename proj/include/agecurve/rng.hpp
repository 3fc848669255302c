// Seeded, stream-splittable random number generation.
//
// Every stochastic stage of the pipeline draws from an RngStream keyed by a
// SeededRng (root seed + stream id). Streams derived for distinct units of
// work (players, chains) are statistically independent and reproducible
// regardless of execution order or thread count. The variate transforms are
// pinned here rather than taken from <random> distributions, whose algorithms
// are implementation defined; mt19937_64 itself is bit-exact by the standard.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace agecurve {

uint64_t fnv1a64(std::string_view s);

// Key identifying a reproducible draw stream. Identical (seed, stream_id)
// always reproduces identical draws.
struct SeededRng {
  uint64_t seed = 0;
  uint64_t stream_id = 0;

  // Child key for a tagged unit of work, e.g. derive("sim.player", i).
  SeededRng derive(std::string_view tag, uint64_t index = 0) const;
  SeededRng derive(std::string_view tag, std::string_view name) const;
};

class RngStream {
 public:
  explicit RngStream(SeededRng key);
  RngStream(uint64_t seed, uint64_t stream_id) : RngStream(SeededRng{seed, stream_id}) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  // Box-Muller; one variate per call.
  double normal(double mean = 0.0, double sd = 1.0);

  // Marsaglia-Tsang squeeze for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale);

  double chisq(double df) { return gamma(0.5 * df, 2.0); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace agecurve

#include "agecurve/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace agecurve {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

uint64_t splitmix64(uint64_t& x) {
  x += kGolden;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

SeededRng SeededRng::derive(std::string_view tag, uint64_t index) const {
  uint64_t x = stream_id ^ fnv1a64(tag);
  uint64_t state = x + kGolden * (index + 1);
  return SeededRng{seed, splitmix64(state)};
}

SeededRng SeededRng::derive(std::string_view tag, std::string_view name) const {
  return derive(tag, fnv1a64(name));
}

RngStream::RngStream(SeededRng key) {
  // Expand (seed, stream) into a full seed sequence; std::seed_seq is
  // specified exactly, so initialization is portable.
  uint64_t state = key.seed;
  uint64_t a = splitmix64(state);
  state ^= key.stream_id;
  uint64_t b = splitmix64(state);
  uint64_t c = splitmix64(state);
  uint64_t d = splitmix64(state);
  std::seed_seq seq{static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32),
                    static_cast<uint32_t>(c), static_cast<uint32_t>(c >> 32),
                    static_cast<uint32_t>(d), static_cast<uint32_t>(d >> 32)};
  gen_.seed(seq);
}

double RngStream::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
  // (0,1] uniform keeps the log finite.
  double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * r * std::cos(2.0 * M_PI * u2);
}

double RngStream::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("gamma: shape and scale must be positive");
  }
  if (shape < 1.0) {
    double u = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

}  // namespace agecurve

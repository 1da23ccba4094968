#include "ietrial/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ietrial {

Rng rng_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32),
                    0x1e5eedu};
  return Rng(seq);
}

double draw_binomial(Rng& rng, double n, double p) {
  if (!(n >= 0.0) || n != std::floor(n)) {
    throw std::invalid_argument("binomial draw needs an integral count");
  }
  if (n == 0.0 || p <= 0.0) return 0.0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(n), p);
  return static_cast<double>(dist(rng));
}

}  // namespace ietrial

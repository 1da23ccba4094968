#pragma once

#include <cstdint>
#include <random>

namespace ietrial {

using Rng = std::mt19937_64;

/// Deterministic substream for replicate `index` of a run seeded with
/// `seed`. Depends only on the pair, never on scheduling.
Rng rng_stream(std::uint64_t seed, std::uint64_t index);

/// Binomial(n, p) draw. `n` is a count stored as double (table cells); it
/// must be a non-negative integer value.
double draw_binomial(Rng& rng, double n, double p);

/// Number of the `n` individuals who are removed (thinned) with
/// probability `p`, returned as the survivors: n - Binomial(n, p).
inline double draw_survivors(Rng& rng, double n, double p) {
  return n - draw_binomial(rng, n, p);
}

}  // namespace ietrial

#pragma once

namespace ietrial {

/// Standard normal CDF, accurate to ~1e-16 absolute (complementary error
/// function, so the lower tail keeps full relative precision).
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation for large x.
double normal_sf(double x);

/// Standard normal quantile. p must lie in (0, 1).
double normal_quantile(double p);

/// Two-sided p-value 2 * (1 - Phi(|z|)).
double two_sided_p(double z);

}  // namespace ietrial

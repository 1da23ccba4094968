#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ietrial/normal.hpp"

using namespace ietrial;

// reference values computed with mpmath at 30 digits
TEST_SUITE("normal") {
  TEST_CASE("cdf matches high-precision values to 1e-10") {
    const std::pair<double, double> ref[] = {
        {-8.0, 6.220960574271784e-16},
        {-5.0, 2.866515718791939e-7},
        {-3.0, 0.001349898031630094526651815},
        {-1.5, 0.06680720126885806600449404},
        {-0.5, 0.3085375387259868963622954},
        {0.0, 0.5},
        {0.3, 0.6179114221889526330722736},
        {1.0, 0.8413447460685429485852325},
        {2.5, 0.9937903346742238648330219},
        {4.0, 0.9999683287581668800787462},
        {6.0, 0.9999999990134123549623019},
    };
    for (const auto& [x, p] : ref) {
      CAPTURE(x);
      CHECK(std::fabs(normal_cdf(x) - p) <= 1e-10);
      CHECK(std::fabs(normal_sf(-x) - p) <= 1e-10);
    }
    // lower tail keeps relative precision
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.220960574271784e-16).epsilon(1e-12));
  }

  TEST_CASE("quantile matches high-precision values") {
    const std::pair<double, double> ref[] = {
        {1e-12, -7.034483825301131929809515},
        {1e-8, -5.612001244174788731549725},
        {0.001, -3.0902323061678135415404},
        {0.025, -1.959963984540054235524594},
        {0.2, -0.8416212335729142051787061},
        {0.8, 0.8416212335729142051787061},
        {0.975, 1.959963984540054235524594},
        {0.999, 3.0902323061678135415404},
        {0.99999999, 5.612001244174788731549725},
    };
    for (const auto& [p, z] : ref) {
      CAPTURE(p);
      CHECK(std::fabs(normal_quantile(p) - z) <= 1e-9);
    }
  }

  TEST_CASE("quantile inverts cdf") {
    // the upper tail loses digits in 1 - p, so stop at 4
    for (double x = -6.0; x <= 4.0; x += 0.25) {
      CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    }
  }

  TEST_CASE("quantile rejects values outside (0, 1)") {
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), std::domain_error);
  }

  TEST_CASE("two-sided p") {
    CHECK(two_sided_p(0.0) == 1.0);
    CHECK(two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(two_sided_p(-2.0) == two_sided_p(2.0));
  }
}

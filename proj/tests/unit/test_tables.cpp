#include <doctest.h>

#include <cmath>
#include <random>

#include "ietrial/error.hpp"
#include "ietrial/tables.hpp"

using namespace ietrial;

namespace {
const TwoByTwoTable kOverall{900, 49100, 1000, 49000};
const TwoByTwoTable kEver{650, 1850, 750, 1750};
const TwoByTwoTable kNever{250, 47250, 250, 47250};
}  // namespace

TEST_SUITE("tables") {
  TEST_CASE("risk rates") {
    RiskRates r = risk_rates(kOverall);
    CHECK(r.screen == doctest::Approx(0.018));
    CHECK(r.control == doctest::Approx(0.020));
    r = risk_rates(kEver);
    CHECK(r.screen == doctest::Approx(0.26));
    CHECK(r.control == doctest::Approx(0.30));
    r = risk_rates({0, 10, 0, 10});
    CHECK(r.screen == 0.0);
    CHECK(r.control == 0.0);
  }

  TEST_CASE("empty arm is named in the error") {
    try {
      risk_rates({0, 0, 1, 5});
      FAIL("expected an error");
    } catch (const EstimationError& e) {
      CHECK(std::string(e.what()).find("screen") != std::string::npos);
    }
    try {
      risk_rates({1, 5, 0, 0});
      FAIL("expected an error");
    } catch (const EstimationError& e) {
      CHECK(std::string(e.what()).find("control") != std::string::npos);
    }
  }

  TEST_CASE("relative risk and risk difference") {
    CHECK(relative_risk(kOverall) == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(relative_risk(kEver) == doctest::Approx(650.0 / 750.0).epsilon(1e-12));
    CHECK(relative_risk({3, 7, 3, 7}) == 1.0);
    CHECK(risk_difference(kOverall) == doctest::Approx(0.002).epsilon(1e-9));
    CHECK(risk_difference(kEver) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(risk_difference({3, 7, 3, 7}) == 0.0);
    CHECK_THROWS_AS(relative_risk({1, 9, 0, 10}), EstimationError);
  }

  TEST_CASE("pooled z test on the schematic tables") {
    // mpmath: 3.14970394174356 / 0.00163435992391361
    EstimateResult e = pooled_z_test(kEver, Estimand::rr_pos);
    CHECK(e.z == doctest::Approx(3.14970394174356).epsilon(1e-12));
    CHECK(e.p_two_sided == doctest::Approx(0.00163435992391361).epsilon(1e-9));
    CHECK(e.pooled_rate == doctest::Approx(0.28));
    CHECK(e.point == doctest::Approx(0.8666666666666667));
    // mpmath: 2.31626740553014 / 0.0205436728397627
    e = pooled_z_test(kOverall);
    CHECK(e.z == doctest::Approx(2.31626740553014).epsilon(1e-12));
    CHECK(e.p_two_sided == doctest::Approx(0.0205436728397627).epsilon(1e-9));
    CHECK(e.point == doctest::Approx(0.002));
    e = pooled_z_test(kNever, Estimand::rr_neg);
    CHECK(e.z == 0.0);
    CHECK(e.p_two_sided == 1.0);
  }

  TEST_CASE("degenerate pooled rate") {
    CHECK_THROWS_AS(pooled_z_test({0, 10, 0, 10}), DegenerateTable);
    CHECK_THROWS_AS(pooled_z_test({10, 0, 10, 0}), DegenerateTable);
    CHECK_THROWS_AS(pooled_z_test({0, 0, 1, 1}), EstimationError);
  }

  TEST_CASE("extra control variance widens the test") {
    const EstimateResult plain = pooled_z_test(kEver);
    const EstimateResult wide = pooled_z_test(kEver, Estimand::rd, 1e-4);
    CHECK(std::fabs(wide.z) < std::fabs(plain.z));
    CHECK(wide.se_null == doctest::Approx(std::sqrt(plain.se_null * plain.se_null + 1e-4)));
  }

  TEST_CASE("properties on random tables") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> cell(1, 5000);
    for (int i = 0; i < 1000; ++i) {
      const TwoByTwoTable t{double(cell(rng)), double(cell(rng)), double(cell(rng)), double(cell(rng))};
      const TwoByTwoTable swapped{t.events_control, t.nonevents_control, t.events_screen, t.nonevents_screen};
      const EstimateResult a = pooled_z_test(t);
      const EstimateResult b = pooled_z_test(swapped);
      CHECK(a.z == doctest::Approx(-b.z).epsilon(1e-12));
      CHECK(a.p_two_sided == doctest::Approx(b.p_two_sided).epsilon(1e-12));
      const RiskRates r = risk_rates(t);
      CHECK(std::fabs(relative_risk(t) * r.control - r.screen) <= 1e-12);
      CHECK(a.p_two_sided == doctest::Approx(2.0 * (1.0 - 0.5 * std::erfc(-std::fabs(a.z) / std::sqrt(2.0)))).epsilon(1e-9));
    }
  }

  TEST_CASE("decomposition sum") {
    TrialDecomposition d{kEver, kNever, {}};
    CHECK(decomposition_sum(d) == kOverall);
    CHECK(decomposition_sum(TrialDecomposition{}).is_zero());
  }

  TEST_CASE("validate rejects negative and non-finite cells") {
    CHECK_NOTHROW(kEver.validate());
    CHECK_THROWS_AS(TwoByTwoTable({-1, 2, 3, 4}).validate(), EstimationError);
    CHECK_THROWS_AS(TwoByTwoTable({1, std::nan(""), 3, 4}).validate(), EstimationError);
  }

  TEST_CASE("estimand names") {
    CHECK(to_string(Estimand::rr_pos) == "RR_pos");
    CHECK(is_ratio(Estimand::rr_neg));
    CHECK_FALSE(is_ratio(Estimand::rd));
  }
}

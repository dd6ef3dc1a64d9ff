#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pricelab/revenue.hpp"
#include "pricelab/schemes.hpp"

using namespace pricelab;

TEST_CASE("price schedules") {
  CHECK(price_at(FreeTrialPpp{5, 0.1}, 5) == 0.0);
  CHECK(price_at(FreeTrialPpp{5, 0.1}, 6) == Catch::Approx(0.1));
  CHECK(price_at(RentToOwn{0.5, 3}, 3) == Catch::Approx(0.5));
  CHECK(price_at(RentToOwn{0.5, 3}, 4) == 0.0);
  CHECK(price_at(BuyItNow{2.5}, 1) == Catch::Approx(2.5));
  CHECK(price_at(BuyItNow{2.5}, 2) == 0.0);
  CHECK(price_at(FreeTrialBin{3, 9.0}, 4) == Catch::Approx(9.0));
  CHECK(price_at(FreeTrialBin{3, 9.0}, 5) == 0.0);
  CHECK(price_at(PriceSequence{{0.3, 0.2}, 0.1}, 2) == Catch::Approx(0.2));
  CHECK(price_at(PriceSequence{{0.3, 0.2}, 0.1}, 99) == Catch::Approx(0.1));
  CHECK_THROWS_AS(price_at(BuyItNow{1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(validate(PricingScheme{ConstantPpp{-0.1}}), std::domain_error);
}

TEST_CASE("recommended free trials") {
  const FreeTrialPpp ppp = recommended_free_trial_ppp(0.1);
  CHECK(ppp.trial_length == 67);
  CHECK(ppp.post_price == Catch::Approx(0.089));
  CHECK(recommended_free_trial_ppp(0.05).trial_length == 267);

  const FreeTrialBin bin = recommended_free_trial_bin(0.1);
  CHECK(bin.trial_length == 38);
  CHECK(bin.bin_price == Catch::Approx(25.0));
  const FreeTrialBin coarse = recommended_free_trial_bin(0.5);
  CHECK(coarse.trial_length == 2);
  CHECK(coarse.bin_price == Catch::Approx(1.0));

  SECTION("trial shrinks as the step grows, and the buy-out scale is fixed") {
    std::int64_t prev = recommended_free_trial_ppp(0.5).trial_length;
    for (double delta : {0.25, 0.125, 0.1, 0.05}) {
      const std::int64_t cur = recommended_free_trial_ppp(delta).trial_length;
      CHECK(cur > prev);
      prev = cur;
      CHECK(recommended_free_trial_bin(delta).bin_price * delta * delta ==
            Catch::Approx(0.25));
    }
  }
}

TEST_CASE("rent-to-own parameterization") {
  SECTION("paid total stays within one round of the loss budget") {
    for (double alpha : {0.01, 1.0, 100.0}) {
      const RentToOwn scheme = rent_to_own_params(alpha, 0.5, 0.1);
      CHECK(scheme.price * static_cast<double>(scheme.paid_rounds) <=
            1.0 / alpha + scheme.price + 1e-9);
    }
  }
  SECTION("large alpha selects the budget-limited price") {
    const RentToOwn scheme = rent_to_own_params(1000.0, 0.5, 0.1);
    CHECK(scheme.price == Catch::Approx(1.0 / (24000.0 * cumulative_value(0.5, 0.1))));
  }
  SECTION("small alpha selects the half price") {
    CHECK(rent_to_own_params(1e-6, 0.5, 0.1).price == Catch::Approx(0.5));
  }
  SECTION("degenerate risk attitudes are rejected") {
    CHECK_THROWS_AS(rent_to_own_params(0.0, 0.5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(
        rent_to_own_params(std::numeric_limits<double>::infinity(), 0.5, 0.1),
        std::invalid_argument);
  }
}

TEST_CASE("optimal buy-out prices") {
  const ValueDistribution uniform = ValueDistribution::uniform01();
  const ValueProcess walk = RandomWalkModel(0.1);
  SECTION("risk neutral, uniform initial values") {
    const OptimalPrice best = optimal_bin(uniform, walk, RiskProfile::neutral(), 10000);
    CHECK(best.threshold == Catch::Approx(0.5).margin(1e-3));
    CHECK(best.revenue * 0.01 == Catch::Approx(0.29).margin(1e-4));
    const OptimalPrice approx = optimal_bin_approx(uniform, 0.1, RiskProfile::neutral());
    CHECK(approx.revenue * 0.01 == Catch::Approx(5.0 / 16.0).margin(1e-6));
    CHECK(approx.threshold == Catch::Approx(0.5).margin(1e-3));
  }
  SECTION("infinitely averse threshold in the small-step convention") {
    const OptimalPrice approx =
        optimal_bin_approx(uniform, 0.1, RiskProfile::infinitely_averse());
    CHECK(approx.threshold == Catch::Approx(2.0 / 3.0).margin(1e-3));
    CHECK(approx.revenue * 0.1 == Catch::Approx(2.0 / 27.0).margin(1e-4));
  }
  SECTION("revenue band against the one-round optimum") {
    for (const auto& F : {ValueDistribution::uniform01(), ValueDistribution::power_cdf(2),
                          ValueDistribution::point_mass(0.4),
                          ValueDistribution::piecewise_table(
                              {{0.0, 0.0}, {0.4, 0.1}, {0.9, 0.95}, {1.0, 1.0}})}) {
      const double myerson = F.myerson_revenue();
      const double scaled =
          0.01 * optimal_bin(F, walk, RiskProfile::neutral(), 10000).revenue;
      CHECK(scaled >= (1.0 - 0.1) * myerson - 1e-9);
      CHECK(scaled <= 1.25 * myerson + 1e-9);
    }
  }
}

TEST_CASE("optimal constant per-usage prices") {
  const ValueDistribution uniform = ValueDistribution::uniform01();
  const ValueProcess walk = RandomWalkModel(0.1);
  SECTION("uniform, risk neutral: half price is optimal") {
    const OptimalPrice best = optimal_constant_ppp(uniform, walk, RiskProfile::neutral(), 2000);
    CHECK(best.price == Catch::Approx(0.5).margin(1e-9));
    CHECK(best.revenue * 0.01 == Catch::Approx(1.0 / 3.0).margin(1e-9));
  }
  SECTION("square cdf, risk neutral: half price revenue and optimality") {
    const ValueDistribution power = ValueDistribution::power_cdf(2);
    const double at_half = constant_ppp_revenue(power, walk, RiskProfile::neutral(), 0.5);
    CHECK(at_half * 0.01 == Catch::Approx(5.0 / 12.0).margin(1e-9));
    const OptimalPrice best = optimal_constant_ppp(power, walk, RiskProfile::neutral(), 2000);
    CHECK(best.revenue <= at_half + 1e-9);
  }
  SECTION("point mass, infinitely averse: bounded by the squared atom") {
    const ValueDistribution atom = ValueDistribution::point_mass(0.5);
    const OptimalPrice best =
        optimal_constant_ppp(atom, walk, RiskProfile::infinitely_averse(), 2000);
    CHECK(best.revenue <= 0.25 / 0.01 + 1e-9);
  }
  SECTION("table densities integrate piecewise") {
    const ValueDistribution table = ValueDistribution::piecewise_table(
        {{0.0, 0.0}, {0.4, 0.1}, {0.9, 0.95}, {1.0, 1.0}});
    const double rev = constant_ppp_revenue(table, walk, RiskProfile::neutral(), 0.5);
    // Expected revenue assembled segment by segment from the two slopes.
    const double f1 = 0.25, f2 = 1.7;
    const double seg = 0.5 * (f1 * simpson([](double v) { return v * (2 - v) / 0.01; }, 0.0,
                                           0.4, 2000) +
                              f2 * simpson([](double v) { return v * (2 - v) / 0.01; }, 0.4,
                                           0.9, 2000) +
                              0.5 * simpson([](double v) { return v * (2 - v) / 0.01; }, 0.9,
                                            1.0, 2000));
    CHECK(rev == Catch::Approx(seg).margin(1e-6));
  }
}

TEST_CASE("closed-form revenues") {
  const ValueDistribution uniform = ValueDistribution::uniform01();
  const ValueProcess walk = RandomWalkModel(0.1);
  SECTION("half-price per-usage revenue, uniform") {
    CHECK(closed_form_revenue(ConstantPpp{0.5}, uniform, walk, RiskProfile::neutral()) * 0.01 ==
          Catch::Approx(1.0 / 3.0).margin(1e-9));
  }
  SECTION("buy-out price agrees with the threshold form") {
    const OptimalPrice best = optimal_bin(uniform, walk, RiskProfile::neutral(), 10000);
    const double direct =
        closed_form_revenue(BuyItNow{best.price}, uniform, walk, RiskProfile::neutral());
    CHECK(direct == Catch::Approx(best.revenue).margin(1e-4));
  }
  SECTION("unsupported combinations raise") {
    CHECK_THROWS_AS(
        closed_form_revenue(FreeTrialPpp{10, 0.1}, uniform, walk, RiskProfile::neutral()),
        not_closed_form_error);
    CHECK_THROWS_AS(
        closed_form_revenue(ConstantPpp{0.5}, uniform, walk, RiskProfile::with_alpha(2.0)),
        not_closed_form_error);
  }
  SECTION("half-monopoly per-usage price beats a tenth-scaled neutral buy-out") {
    const double mu = uniform.monopoly_price();
    const double averse =
        closed_form_revenue(ConstantPpp{mu / 2}, uniform, walk, RiskProfile::infinitely_averse());
    const double neutral_bin = optimal_bin(uniform, walk, RiskProfile::neutral(), 10000).revenue;
    CHECK(averse >= mu / 10.0 * neutral_bin);
    CHECK(averse >= mu / (8.0 * 0.01) * uniform.myerson_revenue() - 1e-6);
  }
}

TEST_CASE("binary dominating price") {
  const ValueDistribution uniform = ValueDistribution::uniform01();
  const BinaryValueModel model(BinaryValueModel::StopLaw::Geometric, MeanMap::linear(0, 10));
  const BinaryDominanceReport report = binary_dominating_price(uniform, model, 3000);

  CHECK(report.bin_threshold == Catch::Approx(2.0 / 3.0).margin(1e-3));
  CHECK(report.bin_revenue == Catch::Approx(40.0 / 27.0).margin(1e-3));
  const double ppp_at_threshold =
      constant_ppp_revenue(uniform, model, RiskProfile::infinitely_averse(), 2.0 / 3.0);
  CHECK(ppp_at_threshold == Catch::Approx(50.0 / 27.0).margin(1e-6));

  CHECK(report.utility_dominated);
  CHECK(report.ppp_revenue >= report.bin_revenue - 1e-9);
  CHECK(report.ppp_utility >= report.bin_utility - 1e-9);
  CHECK(report.ppp_welfare >= report.bin_welfare - 1e-9);
  CHECK(report.ppp_price < report.bin_threshold);

  SECTION("pricing at the buy-out threshold serves the same buyers") {
    const double ppp_welfare = constant_ppp_welfare(uniform, model, RiskProfile::neutral(),
                                                    report.bin_threshold);
    CHECK(ppp_welfare == Catch::Approx(report.bin_welfare).margin(1e-6));
  }

  SECTION("price at the buy-out threshold extracts the full atom surplus") {
    const ValueDistribution atom = ValueDistribution::point_mass(0.5);
    const BinaryValueModel constant(BinaryValueModel::StopLaw::Deterministic,
                                    MeanMap::linear(5, 0));
    const BinaryDominanceReport r = binary_dominating_price(atom, constant, 2000);
    CHECK(r.ppp_revenue >= r.bin_revenue - 1e-9);
    CHECK(r.ppp_utility == Catch::Approx(r.bin_utility).margin(1e-9));
  }
}

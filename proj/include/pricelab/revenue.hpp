#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "pricelab/analytics.hpp"
#include "pricelab/common.hpp"
#include "pricelab/distribution.hpp"
#include "pricelab/quadrature.hpp"
#include "pricelab/schemes.hpp"
#include "pricelab/strategy.hpp"

namespace pricelab {

namespace detail {

// E[g(V) ; V >= lo] under F.
inline double expect_above(const ValueDistribution& F, double lo,
                           const std::function<double(double)>& g) {
  return expect_density(F, lo, 1.0, g);
}

}  // namespace detail

/// Largest buy-out price a buyer of type v accepts.
inline double bin_acceptable_price(const RiskProfile& profile, double v,
                                   const ValueProcess& model) {
  double expected = 0.0;
  double worst = 0.0;
  if (const auto* walk = std::get_if<RandomWalkModel>(&model)) {
    expected = cumulative_value(v, walk->delta);
    worst = worst_case_cumulative(v, walk->delta);
  } else if (const auto* binary = std::get_if<BinaryValueModel>(&model)) {
    expected = binary_cumulative(v, *binary);
    worst = v * binary->min_support_stop(v);
  } else {
    throw not_closed_form_error("buy-out pricing needs a walk or binary model");
  }
  if (profile.is_neutral()) return expected;
  if (profile.is_infinite()) return worst;
  return std::min(expected, worst + profile.loss_budget());
}

struct OptimalPrice {
  double price = 0.0;      // posted price
  double revenue = 0.0;    // expected revenue at that price
  double threshold = 0.0;  // marginal accepting type (buy-out) or the price itself
};

/// Best buy-out price over a grid of acceptance thresholds; ties resolve
/// toward the smaller threshold.
inline OptimalPrice optimal_bin(const ValueDistribution& F, const ValueProcess& model,
                                const RiskProfile& profile, int grid_resolution = 10000) {
  if (grid_resolution < 1000) throw std::invalid_argument("grid resolution below 1e3");
  OptimalPrice best;
  for (int i = 0; i <= grid_resolution; ++i) {
    const double t = static_cast<double>(i) / grid_resolution;
    const double price = bin_acceptable_price(profile, t, model);
    const double revenue = price * F.survival(t);
    if (revenue > best.revenue + 1e-15) {
      best = {price, revenue, t};
    }
  }
  return best;
}

/// Buy-out optimum in the small-step convention that drops the O(delta)
/// terms of the cumulative value. The reported revenue constants for the
/// built-in initial distributions are stated in this convention.
inline OptimalPrice optimal_bin_approx(const ValueDistribution& F, double delta,
                                       const RiskProfile& profile,
                                       int grid_resolution = 10000) {
  if (!profile.is_neutral() && !profile.is_infinite()) {
    throw not_closed_form_error("small-step convention covers alpha in {0, inf} only");
  }
  OptimalPrice best;
  for (int i = 0; i <= grid_resolution; ++i) {
    const double t = static_cast<double>(i) / grid_resolution;
    const double price = profile.is_neutral() ? cumulative_value_approx(t, delta)
                                              : worst_case_cumulative_approx(t, delta);
    const double revenue = price * F.survival(t);
    if (revenue > best.revenue + 1e-15) {
      best = {price, revenue, t};
    }
  }
  return best;
}

/// Per-usage revenue of a constant-price scheme, in closed form.
/// Risk-neutral walk buyers purchase from the threshold max(0, 2p - 1)
/// down; infinitely averse walk buyers purchase while the value covers the
/// price, which on the grid means until first reaching the largest grid
/// level strictly below p. Binary-model buyers purchase iff V0 covers p.
inline double constant_ppp_revenue(const ValueDistribution& F, const ValueProcess& model,
                                   const RiskProfile& profile, double price) {
  if (price < 0.0) throw std::domain_error("price must be nonnegative");
  if (price == 0.0) return 0.0;
  if (const auto* binary = std::get_if<BinaryValueModel>(&model)) {
    return price * detail::expect_above(
                       F, price, [&](double v) { return binary->mean_stop(v); });
  }
  const auto* walk = std::get_if<RandomWalkModel>(&model);
  if (walk == nullptr) throw not_closed_form_error("need a walk or binary model");
  const double delta = walk->delta;
  if (profile.is_neutral()) {
    const double w = rn_threshold(price);
    return price * detail::expect_above(F, w, [&](double v) {
             return v > w ? reflected_hit_time(v, w, delta) : 0.0;
           });
  }
  if (profile.is_infinite()) {
    const double stop = stop_level_below(price, delta);
    return price * detail::expect_above(F, price, [&](double v) {
             return v > stop ? reflected_hit_time(v, stop, delta) : 0.0;
           });
  }
  throw not_closed_form_error("no closed form for intermediate alpha");
}

/// Welfare companion of constant_ppp_revenue.
inline double constant_ppp_welfare(const ValueDistribution& F, const ValueProcess& model,
                                   const RiskProfile& profile, double price) {
  if (const auto* binary = std::get_if<BinaryValueModel>(&model)) {
    return detail::expect_above(F, price,
                                [&](double v) { return v * binary->mean_stop(v); });
  }
  const auto* walk = std::get_if<RandomWalkModel>(&model);
  if (walk == nullptr) throw not_closed_form_error("need a walk or binary model");
  const double delta = walk->delta;
  if (profile.is_neutral()) {
    const double w = rn_threshold(price);
    return detail::expect_above(F, w, [&](double v) {
      return v > w ? cumulative_value_to(v, w, delta) : 0.0;
    });
  }
  if (profile.is_infinite()) {
    const double stop = stop_level_below(price, delta);
    return detail::expect_above(F, price, [&](double v) {
      return v > stop ? cumulative_value_to(v, stop, delta) : 0.0;
    });
  }
  throw not_closed_form_error("no closed form for intermediate alpha");
}

/// Best constant per-usage price by grid search; ties toward smaller price.
inline OptimalPrice optimal_constant_ppp(const ValueDistribution& F, const ValueProcess& model,
                                         const RiskProfile& profile,
                                         int grid_resolution = 10000) {
  if (grid_resolution < 1000) throw std::invalid_argument("grid resolution below 1e3");
  OptimalPrice best;
  for (int i = 0; i <= grid_resolution; ++i) {
    const double p = static_cast<double>(i) / grid_resolution;
    const double revenue = constant_ppp_revenue(F, model, profile, p);
    if (revenue > best.revenue + 1e-15) {
      best = {p, revenue, p};
    }
  }
  return best;
}

/// Smallest accepting type under the optimal buy-out price, the anchor for
/// the rent-to-own parameterization.
inline double optimal_bin_marginal_type(const ValueDistribution& F, const ValueProcess& model,
                                        const RiskProfile& profile,
                                        int grid_resolution = 10000) {
  return optimal_bin(F, model, profile, grid_resolution).threshold;
}

/// Revenue of a buy-out or constant per-usage scheme in closed form.
inline double closed_form_revenue(const PricingScheme& scheme, const ValueDistribution& F,
                                  const ValueProcess& model, const RiskProfile& profile) {
  if (const auto* bin = std::get_if<BuyItNow>(&scheme)) {
    if (F.kind() == ValueDistribution::Kind::PointMass) {
      return bin_acceptable_price(profile, F.atom(), model) >= bin->price - kDecisionTol
                 ? bin->price
                 : 0.0;
    }
    // Marginal accepting type by bisection on the acceptable price.
    if (bin_acceptable_price(profile, 1.0, model) < bin->price - kDecisionTol) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (bin_acceptable_price(profile, mid, model) >= bin->price - kDecisionTol) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return bin->price * F.survival(hi);
  }
  if (const auto* ppp = std::get_if<ConstantPpp>(&scheme)) {
    return constant_ppp_revenue(F, model, profile, ppp->price);
  }
  throw not_closed_form_error("closed forms cover buy-out and constant per-usage schemes");
}

/// Comparison report for the binary model: a per-usage price that matches
/// the revenue-optimal buy-out scheme on revenue and buyer utility at once.
struct BinaryDominanceReport {
  double bin_threshold = 0.0;
  double bin_price = 0.0;
  double bin_revenue = 0.0;
  double bin_welfare = 0.0;
  double bin_utility = 0.0;
  double ppp_price = 0.0;
  double ppp_revenue = 0.0;
  double ppp_welfare = 0.0;
  double ppp_utility = 0.0;
  bool utility_dominated = false;  // false means the revenue-only fallback
};

/// Starts the per-usage price at the buy-out acceptance threshold, where
/// revenue and welfare already weakly dominate, then scans downward for the
/// largest price that also dominates buyer utility.
inline BinaryDominanceReport binary_dominating_price(const ValueDistribution& F,
                                                     const BinaryValueModel& model,
                                                     int grid_resolution = 10000) {
  if (grid_resolution < 1000) throw std::invalid_argument("grid resolution below 1e3");
  const ValueProcess process = model;
  const RiskProfile neutral = RiskProfile::neutral();
  const OptimalPrice bin = optimal_bin(F, process, neutral, grid_resolution);

  BinaryDominanceReport report;
  report.bin_threshold = bin.threshold;
  report.bin_price = bin.price;
  report.bin_revenue = bin.revenue;
  report.bin_welfare =
      detail::expect_above(F, bin.threshold, [&](double v) { return v * model.mean_stop(v); });
  report.bin_utility = report.bin_welfare - report.bin_revenue;

  const auto ppp_metrics = [&](double p) {
    const double rev = constant_ppp_revenue(F, process, neutral, p);
    const double wel = constant_ppp_welfare(F, process, neutral, p);
    return std::pair<double, double>{rev, wel};
  };

  const int start = static_cast<int>(std::floor(bin.threshold * grid_resolution + 1e-9));
  for (int i = start; i >= 0; --i) {
    const double p = static_cast<double>(i) / grid_resolution;
    const auto [rev, wel] = ppp_metrics(p);
    const double util = wel - rev;
    if (rev >= report.bin_revenue - 1e-9 && util >= report.bin_utility - 1e-9) {
      report.ppp_price = p;
      report.ppp_revenue = rev;
      report.ppp_welfare = wel;
      report.ppp_utility = util;
      report.utility_dominated = true;
      return report;
    }
  }
  // No grid price satisfied both; fall back to the threshold price, which
  // dominates revenue and welfare only.
  const auto [rev, wel] = ppp_metrics(bin.threshold);
  report.ppp_price = bin.threshold;
  report.ppp_revenue = rev;
  report.ppp_welfare = wel;
  report.ppp_utility = wel - rev;
  report.utility_dominated = false;
  return report;
}

}  // namespace pricelab

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricelab/common.hpp"
#include "pricelab/process.hpp"

namespace pricelab {

// Closed forms for the reflected grid walk: hitting probabilities and
// times, cumulative values, and the risk-neutral pay-per-play utility.
// The formulas are polynomial and are evaluated for any v in [0, 1];
// grid exactness is asserted separately against the dynamic-programming
// oracle in the simulation module.

/// P[walk from v reaches u before w], for w < v < u.
inline double hit_probability(double v, double w, double u) {
  if (!(w < v && v < u)) throw std::domain_error("need w < v < u");
  return (v - w) / (u - w);
}

/// Expected steps for the free walk from v to exit (w, u).
inline double two_sided_exit_time(double v, double w, double u, double delta) {
  if (!(w <= v && v <= u)) throw std::domain_error("need w <= v <= u");
  return (v - w) * (u - v) / (delta * delta);
}

/// Expected steps for the reflected walk from v down to u < v:
/// (v - u)(2 - v - u) / delta^2.
inline double reflected_hit_time(double v, double u, double delta) {
  if (!(u < v)) throw std::domain_error("need u < v");
  return (v - u) * (2.0 - v - u) / (delta * delta);
}

/// Expected steps from v to absorption at 0.
inline double absorption_time(double v, double delta) {
  if (v == 0.0) return 0.0;
  return reflected_hit_time(v, 0.0, delta);
}

/// Expected steps to reach 1, conditioned on reaching 1 before 0:
/// (1 - v^2) / (3 delta^2).
inline double conditional_time_to_one(double v, double delta) {
  if (!(v > 0.0 && v < 1.0)) throw std::domain_error("need v in (0, 1)");
  return (1.0 - v * v) / (3.0 * delta * delta);
}

/// Expected total value collected from v until first reaching w <= v.
inline double cumulative_value_to(double v, double w, double delta) {
  if (w > v) throw std::domain_error("need w <= v");
  return (v - w) / (delta * delta) *
         (v * (1.0 - v) + (1.0 - w) * (1.0 - delta) + delta * delta);
}

/// Expected total value from v until absorption:
/// v^2 (1 - v) / delta^2 + v (1 - delta + delta^2) / delta^2.
inline double cumulative_value(double v, double delta) {
  return (v * v * (1.0 - v) + v * (1.0 - delta + delta * delta)) / (delta * delta);
}

/// Cumulative value under the continuum approximation that drops the
/// O(delta) terms; the reported revenue constants for the built-in
/// distributions are stated in this convention.
inline double cumulative_value_approx(double v, double delta) {
  return (v * v * (1.0 - v) + v) / (delta * delta);
}

/// Expected future utility of a buyer at value v who pays p per usage and
/// stops upon reaching w.
inline double rn_ppp_utility(double v, double w, double p, double delta) {
  if (!(0.0 <= w && w <= v && v <= 1.0)) throw std::domain_error("need 0 <= w <= v <= 1");
  if (p < 0.0) throw std::domain_error("price must be nonnegative");
  const double d2 = delta * delta;
  return (v - w) / d2 *
         (1.0 - delta - w * (1.0 - delta - p) + v * (1.0 - v) - p * (2.0 - v) + d2);
}

/// Stopping threshold of a risk-neutral buyer facing constant price p.
inline double rn_threshold(double p) {
  if (p < 0.0) throw std::domain_error("price must be nonnegative");
  return std::max(0.0, 2.0 * p - 1.0);
}

/// Cumulative value along the worst path: the exact descending sum
/// v + (v - delta) + ... + delta = v (v + delta) / (2 delta).
inline double worst_case_cumulative(double v, double delta) {
  return v * (v + delta) / (2.0 * delta);
}

/// The v^2 / (2 delta) approximation of the worst-case sum.
inline double worst_case_cumulative_approx(double v, double delta) {
  return v * v / (2.0 * delta);
}

/// Expected cumulative value v * E[T | v] in the binary model.
inline double binary_cumulative(double v, const BinaryValueModel& model) {
  if (v < 0.0 || v > 1.0) throw std::domain_error("value outside [0, 1]");
  return v * model.mean_stop(v);
}

/// One interval test for a measured statistic of the general model.
struct BoundCheck {
  std::string quantity;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double slack_constant = 0.0;

  bool pass() const { return lower <= measured && measured <= upper; }
};

/// Measured statistics of the general evolution model, filled by the
/// simulation engine.
struct GeneralWalkStats {
  std::int64_t n = 0;
  double hit_one_fraction = 0.0;       // share of paths reaching >= 1 before <= 0
  double mean_exit_time = 0.0;         // steps until first exit of (0, 1)
  double se_exit_time = 0.0;
  std::int64_t n_reflected = 0;        // paths that exited upward
  double floor_level = 0.0;            // level x probed after the upward exit
  double mean_post_reflect_time = 0.0; // steps from the exit to reach <= x
  double se_post_reflect_time = 0.0;
  double mean_cumulative = 0.0;        // total clipped value until absorption
  double se_cumulative = 0.0;
  double mean_exit_time_up = 0.0;      // exit time among upward exits
  double se_exit_time_up = 0.0;
};

/// Interval checks for the five general-model facts: upward exit
/// probability, exit time, post-reflection hit time, cumulative value, and
/// the conditional time to reach 1. Slack is slack_constant * epsilon plus
/// three standard errors.
inline std::vector<BoundCheck> markov_bound_checks(double v, const GeneralMarkovModel& model,
                                                   const GeneralWalkStats& stats,
                                                   double slack_constant) {
  if (stats.n < 10000) throw precision_error("need at least 1e4 samples");
  const double eps = model.epsilon();
  const double d2 = model.delta_sq();
  const double c3 = model.c3();
  const double slack = slack_constant * eps;
  std::vector<BoundCheck> checks;

  const double se_p =
      3.0 * std::sqrt(std::max(stats.hit_one_fraction * (1.0 - stats.hit_one_fraction),
                               1e-12) /
                      static_cast<double>(stats.n));
  checks.push_back({"hit_one_probability", stats.hit_one_fraction,
                    v - slack - se_p, v + slack + se_p, slack_constant});

  checks.push_back({"exit_time", stats.mean_exit_time,
                    (v * (1.0 - v) - slack) / d2 - 3.0 * stats.se_exit_time,
                    (v * (1.0 - v) + slack) / d2 + 3.0 * stats.se_exit_time,
                    slack_constant});

  const double x = stats.floor_level;
  checks.push_back({"post_reflection_hit_time", stats.mean_post_reflect_time,
                    ((1.0 - x) * (1.0 - x) - slack) / d2 - 3.0 * stats.se_post_reflect_time,
                    ((1.0 - x) * (1.0 - x) + slack) / d2 + 3.0 * stats.se_post_reflect_time,
                    slack_constant});

  // Cumulative value: the band constants [1, 5/4] of the symmetric walk,
  // widened by the epsilon slack on the starting value.
  checks.push_back({"cumulative_value", stats.mean_cumulative,
                    std::max(0.0, v - slack) / d2 - 3.0 * stats.se_cumulative,
                    1.25 * (v + slack) / d2 + 3.0 * stats.se_cumulative,
                    slack_constant});

  const double center = (1.0 - v * v - c3 * (1.0 - v)) / (3.0 * d2);
  checks.push_back({"conditional_time_to_one", stats.mean_exit_time_up,
                    center * (1.0 - slack) - 3.0 * stats.se_exit_time_up,
                    center * (1.0 + slack) + 3.0 * stats.se_exit_time_up,
                    slack_constant});
  return checks;
}

}  // namespace pricelab

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pricelab/analytics.hpp"
#include "pricelab/common.hpp"
#include "pricelab/distribution.hpp"
#include "pricelab/process.hpp"
#include "pricelab/quadrature.hpp"
#include "pricelab/rng.hpp"
#include "pricelab/schemes.hpp"
#include "pricelab/strategy.hpp"

namespace pricelab {

// ---------------------------------------------------------------------------
// Per-path outcome accounting
// ---------------------------------------------------------------------------

/// Realized outcome of one buyer path under a scheme and policy.
/// utility == welfare - revenue holds exactly; welfare clips per-usage
/// values above 1, which only the general model can produce.
struct OutcomeMetrics {
  double revenue = 0.0;
  double welfare = 0.0;
  double utility = 0.0;
  std::int64_t stop_time = 0;            // usages purchased
  std::int64_t post_trial_duration = 0;  // purchases after a free trial
  double min_running_net = 0.0;          // lowest welfare-minus-payments seen
  bool capped = false;
};

/// Walks one value path, consulting the policy before every usage and
/// stopping permanently on the first decline.
inline OutcomeMetrics simulate_once(const PricingScheme& scheme, const BuyerPolicy& policy,
                                    const ValueProcess& model, double v0, Rng& rng,
                                    std::int64_t cap) {
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  OutcomeMetrics out;
  const std::int64_t trial = trial_length(scheme);

  // The value evolves only on consumption, so the path can be generated
  // step by step as the buyer keeps purchasing.
  const auto* walk = std::get_if<RandomWalkModel>(&model);
  const auto* binary = std::get_if<BinaryValueModel>(&model);
  const auto* markov = std::get_if<GeneralMarkovModel>(&model);
  if (walk != nullptr) grid_index(v0, walk->delta);

  std::int64_t binary_stop = 0;
  if (binary != nullptr) binary_stop = binary->sample_stop(v0, rng);

  double current = v0;
  double prev = v0;
  double net = 0.0;
  for (std::int64_t t = 1;; ++t) {
    if (binary != nullptr) current = t <= binary_stop ? v0 : 0.0;
    if (current <= 0.0) break;
    if (t > cap) {
      out.capped = true;
      break;
    }
    if (!policy_buys(policy, scheme, t, current, net)) break;

    const double price = price_at(scheme, t);
    out.revenue += price;
    out.welfare += std::min(current, 1.0);
    net = out.welfare - out.revenue;
    out.min_running_net = std::min(out.min_running_net, net);
    ++out.stop_time;
    if (trial > 0 && t > trial) ++out.post_trial_duration;

    if (binary == nullptr) {
      std::optional<double> next = walk != nullptr ? step_walk(*walk, current, rng)
                                                   : step_general(*markov, prev, current, rng);
      prev = current;
      if (!next) break;
      current = *next;
    }
  }
  out.utility = out.welfare - out.revenue;
  return out;
}

// ---------------------------------------------------------------------------
// Policy construction for the estimator
// ---------------------------------------------------------------------------

/// Policy for every scheme whose response does not depend on the realized
/// initial value. Buy-out schemes are resolved per path via bin_accept.
inline BuyerPolicy build_policy(const PricingScheme& scheme, const RiskProfile& profile,
                                const ValueProcess& model) {
  struct Visitor {
    const RiskProfile& profile;
    const ValueProcess& model;

    BuyerPolicy operator()(const BuyItNow&) const {
      throw std::invalid_argument("buy-out policies are per-type; use bin_accept");
    }
    BuyerPolicy operator()(const ConstantPpp& s) const {
      return ppp_policy_constant(profile, s.price, model);
    }
    BuyerPolicy operator()(const FreeTrialPpp& s) const {
      if (std::holds_alternative<BinaryValueModel>(model) || profile.is_infinite()) {
        return MyopicPolicy{};
      }
      if (profile.is_neutral()) {
        // Free usages are always worth taking; afterwards the constant-price
        // threshold applies. A single threshold policy covers both phases
        // whenever the post-trial price is at most 1/2.
        const double w = rn_threshold(s.post_price);
        if (w == 0.0) return ThresholdPolicy{0.0};
      }
      throw not_closed_form_error("no closed-form trial response for this profile");
    }
    BuyerPolicy operator()(const FreeTrialBin& s) const {
      const auto* walk = std::get_if<RandomWalkModel>(&model);
      const auto* markov = std::get_if<GeneralMarkovModel>(&model);
      if (walk == nullptr && markov == nullptr) {
        throw not_closed_form_error("trial buy-out response needs an evolving value");
      }
      const double step = walk != nullptr ? walk->delta : std::sqrt(markov->delta_sq());
      if (!profile.is_neutral()) {
        throw not_closed_form_error("trial buy-out response implemented for neutral buyers");
      }
      return TrialBinPolicy{s.trial_length, s.bin_price, step};
    }
    BuyerPolicy operator()(const RentToOwn& s) const {
      return rent_to_own_response(profile, s, model);
    }
    BuyerPolicy operator()(const PriceSequence& s) const {
      if (profile.is_infinite()) return MyopicPolicy{};
      const auto* walk = std::get_if<RandomWalkModel>(&model);
      if (walk == nullptr) throw not_closed_form_error("price sequences need the grid walk");
      return solve_policy_backward(PricingScheme{s}, profile, *walk,
                                   default_policy_horizon(walk->delta));
    }
  };
  return std::visit(Visitor{profile, model}, scheme);
}

// ---------------------------------------------------------------------------
// Seeded Monte Carlo estimation
// ---------------------------------------------------------------------------

struct MetricStat {
  double mean = 0.0;
  double std_err = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Aggregate of n independent replicas. Deterministic for a fixed master
/// seed: replica i uses the generator seeded by derive_seed(master, i) and
/// accumulation runs in replica order.
struct EstimateResult {
  MetricStat revenue;
  MetricStat welfare;
  MetricStat utility;
  MetricStat stop_time;
  MetricStat post_trial_duration;
  double min_running_net = 0.0;
  double capped_fraction = 0.0;
  bool truncation_warning = false;
  std::int64_t n_samples = 0;
  std::uint64_t master_seed = 0;
};

namespace detail {

constexpr double kZ99 = 2.5758293035489004;  // 99% two-sided normal quantile

class Accumulator {
 public:
  void add(double x) {
    sum_ += x;
    sum_sq_ += x * x;
    ++n_;
  }
  MetricStat stat() const {
    MetricStat s;
    if (n_ == 0) return s;
    const double n = static_cast<double>(n_);
    s.mean = sum_ / n;
    const double var = std::max(0.0, (sum_sq_ - sum_ * sum_ / n) / std::max(1.0, n - 1.0));
    s.std_err = std::sqrt(var / n);
    s.ci_lo = s.mean - kZ99 * s.std_err;
    s.ci_hi = s.mean + kZ99 * s.std_err;
    return s;
  }

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::int64_t n_ = 0;
};

}  // namespace detail

/// Rounds a value to an adjacent grid point, up with probability equal to
/// the fractional part. Linear statistics of the grid value interpolate the
/// continuum ones; the remaining curvature gap is O(delta^2) per cell.
inline double randomized_round(double v, double delta, Rng& rng) {
  const double pos = v / delta;
  const double lo = std::floor(pos);
  const double frac = pos - lo;
  const double snapped = (rng.next_below(frac) ? lo + 1.0 : lo) * delta;
  return std::min(snapped, 1.0);
}

/// Exact expectation of g at the randomized-rounded initial value,
/// E_F[ (1-theta) g(v_lo) + theta g(v_hi) ]; the quantity the walk
/// estimator is unbiased for.
inline double grid_rounded_expectation(const ValueDistribution& F, double delta,
                                       const std::function<double(double)>& g) {
  if (F.kind() == ValueDistribution::Kind::PointMass) {
    const double v = F.atom();
    const double lo = std::floor(v / delta);
    const double frac = v / delta - lo;
    return (1.0 - frac) * g(lo * delta) + frac * g(std::min(1.0, (lo + 1.0) * delta));
  }
  const int levels = grid_levels(delta);
  double total = 0.0;
  for (int i = 0; i < levels; ++i) {
    const double a = i * delta;
    const double b = (i + 1) * delta;
    total += expect_density(F, a, b, [&](double v) {
      const double theta = (v - a) / delta;
      return (1.0 - theta) * g(a) + theta * g(b);
    });
  }
  return total;
}

/// Seeded Monte Carlo estimate of the outcome metrics. Initial values are
/// drawn from F; on the grid walk they are randomly rounded to the grid,
/// while buy-out acceptance is decided from the unrounded draw so that
/// buy-out revenue stays unbiased for the closed form.
inline EstimateResult estimate(const PricingScheme& scheme, const RiskProfile& profile,
                               const ValueProcess& model, const ValueDistribution& F,
                               std::int64_t n_samples, std::uint64_t master_seed,
                               std::int64_t cap = 0) {
  if (n_samples < 1000) throw precision_error("estimate needs at least 1e3 samples");
  validate(scheme);
  if (cap <= 0) cap = default_cap(model, 1.0);

  const auto* walk = std::get_if<RandomWalkModel>(&model);
  const auto* bin = std::get_if<BuyItNow>(&scheme);
  std::optional<BuyerPolicy> shared_policy;
  if (bin == nullptr) shared_policy = build_policy(scheme, profile, model);

  detail::Accumulator revenue, welfare, utility, stop_time, post_trial;
  double min_net = 0.0;
  std::int64_t capped = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    const double v_drawn = F.sample(rng);
    const double v0 = walk != nullptr ? randomized_round(v_drawn, walk->delta, rng) : v_drawn;

    OutcomeMetrics m;
    if (bin != nullptr) {
      const bool accept = bin_accept(profile, v_drawn, bin->price, model);
      if (accept) {
        m = simulate_once(scheme, ThresholdPolicy{0.0}, model, v0, rng, cap);
        if (m.stop_time == 0) {
          // The buyer paid on acceptance even if the rounded start absorbed
          // before the first usage.
          m.revenue = bin->price;
          m.utility = -bin->price;
          m.min_running_net = -bin->price;
        }
      }
    } else {
      m = simulate_once(scheme, *shared_policy, model, v0, rng, cap);
    }

    revenue.add(m.revenue);
    welfare.add(m.welfare);
    utility.add(m.utility);
    stop_time.add(static_cast<double>(m.stop_time));
    post_trial.add(static_cast<double>(m.post_trial_duration));
    min_net = std::min(min_net, m.min_running_net);
    if (m.capped) ++capped;
  }

  EstimateResult out;
  out.revenue = revenue.stat();
  out.welfare = welfare.stat();
  out.utility = utility.stat();
  out.stop_time = stop_time.stat();
  out.post_trial_duration = post_trial.stat();
  out.min_running_net = min_net;
  out.capped_fraction = static_cast<double>(capped) / static_cast<double>(n_samples);
  out.truncation_warning = out.capped_fraction > 1e-2;
  out.n_samples = n_samples;
  out.master_seed = master_seed;
  return out;
}

// ---------------------------------------------------------------------------
// Exact dynamic-programming oracle on the delta grid
// ---------------------------------------------------------------------------

namespace detail {

// Thomas elimination for a tridiagonal system; the walk systems are weakly
// diagonally dominant, so no pivoting is needed.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                             std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  }
  return x;
}

}  // namespace detail

/// Solves the exact linear recurrences of the grid walk by direct
/// elimination, independently of the closed forms it is used to verify.
class DpOracle {
 public:
  explicit DpOracle(RandomWalkModel model) : model_(model), levels_(model.levels()) {}

  /// P[reach u before w] for the free walk, w < v < u.
  double absorption_prob(double v, double w, double u) const {
    const int iv = idx(v), iw = idx(w), iu = idx(u);
    if (!(iw < iv && iv < iu)) throw std::domain_error("need w < v < u on the grid");
    const int n = iu - iw - 1;
    std::vector<double> lower(n, -0.5), diag(n, 1.0), upper(n, -0.5), rhs(n, 0.0);
    rhs[n - 1] += 0.5;  // boundary value 1 at u
    const auto x = detail::solve_tridiagonal(lower, diag, upper, rhs);
    return x[iv - iw - 1];
  }

  /// Expected steps of the reflected walk from v down to target < v.
  double hitting_time(double v, double target) const {
    const int iv = idx(v), it = idx(target);
    if (!(it < iv)) throw std::domain_error("need target < v on the grid");
    const auto x = reflected_system(it, nullptr);
    return x[iv - it - 1];
  }

  /// Expected steps of the free walk from v to exit (w, u).
  double two_sided_time(double v, double w, double u) const {
    const int iv = idx(v), iw = idx(w), iu = idx(u);
    if (!(iw <= iv && iv <= iu)) throw std::domain_error("need w <= v <= u on the grid");
    if (iv == iw || iv == iu) return 0.0;
    const int n = iu - iw - 1;
    std::vector<double> lower(n, -0.5), diag(n, 1.0), upper(n, -0.5), rhs(n, 1.0);
    const auto x = detail::solve_tridiagonal(lower, diag, upper, rhs);
    return x[iv - iw - 1];
  }

  /// Expected total value of the reflected walk from v until reaching w.
  double cumulative_value(double v, double w) const {
    const int iv = idx(v), iw = idx(w);
    if (iv == iw) return 0.0;
    if (!(iw < iv)) throw std::domain_error("need w <= v on the grid");
    std::vector<double> values;
    const auto x = reflected_system(iw, &values);
    return x[iv - iw - 1];
  }

  /// E[steps to reach 1 | reaching 1 before 0], via the absorption-weighted
  /// first-passage system.
  double conditional_time_to_one(double v) const {
    const int iv = idx(v);
    if (!(iv > 0 && iv < levels_)) throw std::domain_error("need v strictly inside (0, 1)");
    const int n = levels_ - 1;
    // q: probability of exiting upward.
    std::vector<double> lower(n, -0.5), diag(n, 1.0), upper(n, -0.5), rhs(n, 0.0);
    rhs[n - 1] = 0.5;
    const auto q = detail::solve_tridiagonal(lower, diag, upper, rhs);
    // g = E[tau ; exit upward]: same operator with rhs q.
    std::vector<double> lower2(n, -0.5), diag2(n, 1.0), upper2(n, -0.5);
    const auto g = detail::solve_tridiagonal(lower2, diag2, upper2, q);
    return g[iv - 1] / q[iv - 1];
  }

  /// Expected revenue at constant price p from a buyer who stops upon
  /// reaching w: p times the hitting time.
  double revenue_under_threshold(double v, double w, double p) const {
    if (idx(v) == idx(w)) return 0.0;
    return p * hitting_time(v, w);
  }

 private:
  int idx(double value) const { return grid_index(value, model_.delta); }

  // System over states target+1 .. levels with absorption at `target` and
  // the reflection row at the top. rhs is 1 per step, or the state value
  // when `values` is requested (cumulative-value system).
  std::vector<double> reflected_system(int target, std::vector<double>* values) const {
    const int n = levels_ - target;
    std::vector<double> lower(n, -0.5), diag(n, 1.0), upper(n, -0.5), rhs(n);
    for (int k = 0; k < n; ++k) {
      const int state = target + 1 + k;
      rhs[k] = values != nullptr ? state * model_.delta : 1.0;
    }
    if (values != nullptr) rhs[n - 1] = 1.0;  // collect value 1 at the top
    // Top row: x_N - x_{N-1} = rhs_N (deterministic move to 1 - delta).
    lower[n - 1] = -1.0;
    diag[n - 1] = 1.0;
    return detail::solve_tridiagonal(lower, diag, upper, rhs);
    // states map to x[0] = target+1, ..., x[n-1] = levels
  }

  RandomWalkModel model_;
  int levels_;
};

// ---------------------------------------------------------------------------
// Statistical verification utilities
// ---------------------------------------------------------------------------

struct TailCheck {
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Empirical check of the absorption-time tail bound
/// P[h >= k E[h]] <= 2^(-floor(k/2)).
inline TailCheck tail_probability_check(double v, double delta, int k, std::int64_t n_samples,
                                        std::uint64_t master_seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  const RandomWalkModel walk(delta);
  const double expected = absorption_time(v, delta);
  const double threshold = static_cast<double>(k) * expected;
  const std::int64_t cap =
      std::max<std::int64_t>(default_cap(walk, v), static_cast<std::int64_t>(threshold) + 2);
  std::int64_t tail = 0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    const Trajectory traj = sample_trajectory(walk, v, cap, rng);
    const double h = static_cast<double>(traj.stop_time);
    if (traj.capped || h >= threshold) ++tail;
  }
  TailCheck out;
  out.empirical = static_cast<double>(tail) / static_cast<double>(n_samples);
  out.bound = std::pow(2.0, -std::floor(static_cast<double>(k) / 2.0));
  const double se = std::sqrt(out.bound * (1.0 - out.bound) / static_cast<double>(n_samples));
  out.pass = out.empirical <= out.bound + 3.0 * se;
  return out;
}

enum class FreeTrialVariant { Ppp, Bin };

struct FreeTrialCheck {
  double empirical_revenue = 0.0;
  double std_err = 0.0;
  double lower_bound = 0.0;
  bool pass = false;
};

/// Monte Carlo check of the revenue floors of the recommended free-trial
/// schemes: c((1-c)^2 - 2/3) v / (2 delta^2) for the per-usage variant with
/// a loss-averse buyer, and (0.055 v / 9) / (4 delta^2) for the buy-out
/// variant with a risk-neutral buyer. Initial values off the grid run on
/// the general model with symmetric +-delta increments.
inline FreeTrialCheck free_trial_bounds_check(FreeTrialVariant variant, double v, double delta,
                                              std::int64_t n_samples,
                                              std::uint64_t master_seed) {
  const ValueProcess model =
      on_grid(v, delta)
          ? ValueProcess{RandomWalkModel(delta)}
          : ValueProcess{GeneralMarkovModel(IncrementLaw({delta, -delta}, {0.5, 0.5}))};

  PricingScheme scheme;
  BuyerPolicy policy;
  double bound = 0.0;
  if (variant == FreeTrialVariant::Ppp) {
    const FreeTrialPpp s = recommended_free_trial_ppp(delta);
    const double c = s.post_price;
    scheme = s;
    policy = MyopicPolicy{};  // loss-averse response
    bound = c * ((1.0 - c) * (1.0 - c) - 2.0 / 3.0) * v / (2.0 * delta * delta);
  } else {
    const FreeTrialBin s = recommended_free_trial_bin(delta);
    scheme = s;
    policy = TrialBinPolicy{s.trial_length, s.bin_price, delta};  // risk-neutral response
    bound = (0.055 * v / 9.0) / (4.0 * delta * delta);
  }

  const std::int64_t cap = default_cap(model, 1.0) + trial_length(scheme);
  detail::Accumulator acc;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    acc.add(simulate_once(scheme, policy, model, v, rng, cap).revenue);
  }
  FreeTrialCheck out;
  const MetricStat stat = acc.stat();
  out.empirical_revenue = stat.mean;
  out.std_err = stat.std_err;
  out.lower_bound = bound;
  out.pass = stat.mean >= bound - 3.0 * stat.std_err;
  return out;
}

/// One-pass measurement of the general-model statistics consumed by
/// markov_bound_checks: exit probability and time for the band (0, 1), the
/// post-exit time down to floor_level, and the clipped cumulative value.
inline GeneralWalkStats measure_general_walk(const GeneralMarkovModel& model, double v,
                                             double floor_level, std::int64_t n_samples,
                                             std::uint64_t master_seed) {
  GeneralWalkStats stats;
  stats.n = n_samples;
  stats.floor_level = floor_level;
  detail::Accumulator exit_time, post_time, cum, exit_up;
  std::int64_t hits = 0;
  const std::int64_t cap = 200 * static_cast<std::int64_t>(1.0 / model.delta_sq()) + 1000;
  const IncrementLaw& law = model.increments();
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    double prev = v, cur = v;
    std::int64_t t = 0;
    std::int64_t tau = -1;
    // Index of the first value after the upward exit; the collapsed
    // crossing rule realizes it in the same step as the exit.
    std::int64_t post_start = -1;
    bool up = false;
    double total_value = 0.0;
    std::int64_t floor_step = -1;
    while (cur > 0.0 && t < cap) {
      total_value += std::min(cur, 1.0);
      const double proposed = cur + law.sample(rng);
      ++t;
      // A proposal at or beyond 1 is the upward exit, whether it lands
      // exactly (within rounding) or crosses and reflects.
      if (tau < 0 && proposed >= 1.0 - 1e-9) {
        tau = t;
        up = true;
        post_start = proposed > 1.0 + 1e-9 ? t : t + 1;
      }
      if (proposed <= 1e-9) {
        cur = 0.0;
        break;
      }
      const double next = proposed > 1.0 + 1e-9 ? prev : proposed;
      prev = cur;
      cur = next;
      if (up && floor_step < 0 && t >= post_start && cur <= floor_level + 1e-12) {
        floor_step = t;
      }
    }
    if (tau < 0) tau = t;  // exited downward
    if (up && floor_step < 0) floor_step = std::max(t, post_start);  // absorbed below floor
    if (up) {
      ++hits;
      exit_up.add(static_cast<double>(tau));
      post_time.add(static_cast<double>(floor_step - post_start));
    }
    exit_time.add(static_cast<double>(tau));
    cum.add(total_value);
  }
  stats.hit_one_fraction = static_cast<double>(hits) / static_cast<double>(n_samples);
  const MetricStat t_stat = exit_time.stat();
  stats.mean_exit_time = t_stat.mean;
  stats.se_exit_time = t_stat.std_err;
  stats.n_reflected = hits;
  const MetricStat p_stat = post_time.stat();
  stats.mean_post_reflect_time = p_stat.mean;
  stats.se_post_reflect_time = p_stat.std_err;
  const MetricStat c_stat = cum.stat();
  stats.mean_cumulative = c_stat.mean;
  stats.se_cumulative = c_stat.std_err;
  const MetricStat u_stat = exit_up.stat();
  stats.mean_exit_time_up = u_stat.mean;
  stats.se_exit_time_up = u_stat.std_err;
  return stats;
}

}  // namespace pricelab

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pricelab/analytics.hpp"
#include "pricelab/common.hpp"
#include "pricelab/process.hpp"
#include "pricelab/schemes.hpp"

namespace pricelab {

/// Buyer attitude toward possible losses. alpha = 0 is risk neutral,
/// alpha = infinity never tolerates a path with negative realized utility,
/// and a finite alpha > 0 caps the realized loss at 1/alpha on every path.
struct RiskProfile {
  double alpha = 0.0;

  static RiskProfile neutral() { return {0.0}; }
  static RiskProfile infinitely_averse() { return {std::numeric_limits<double>::infinity()}; }
  static RiskProfile with_alpha(double a) {
    if (a < 0.0 || std::isnan(a)) throw std::domain_error("alpha must be nonnegative");
    return {a};
  }

  bool is_neutral() const { return alpha == 0.0; }
  bool is_infinite() const { return std::isinf(alpha); }
  double loss_budget() const {
    if (is_neutral()) return std::numeric_limits<double>::infinity();
    return 1.0 / alpha;
  }
};

// Decision tolerance: indifference buys, and closed forms that land exactly
// on a price should not be rejected by rounding noise.
inline constexpr double kDecisionTol = 1e-9;

/// Buy while the current value exceeds the threshold; stop upon reaching it.
struct ThresholdPolicy {
  double threshold = 0.0;
};

/// Buy whenever the current value covers the current price.
struct MyopicPolicy {};

struct NeverPolicy {};

/// Response to a free trial followed by a one-shot buy-out price: consume
/// the trial, then accept the buy-out iff the expected cumulative value at
/// the trial-end value covers it.
struct TrialBinPolicy {
  std::int64_t trial = 0;
  double bin_price = 0.0;
  double delta = 0.0;
};

/// Backward-induction decision table over (usage, value, remaining
/// loss allowance).
struct TablePolicy {
  double delta = 0.0;
  std::int64_t horizon = 0;
  int levels = 0;
  bool has_budget = false;
  int budget_levels = 0;      // allowance axis 0..budget_levels, in delta units
  bool budget_capped = false; // axis saturated below the full loss budget
  double start_allowance = 0.0;
  std::vector<std::uint8_t> buy;
  std::vector<double> start_values;  // value function at usage 1, by (value, budget)

  double start_value(double value, double running_net = 0.0) const {
    const int i = grid_index(value, delta);
    int b = 0;
    if (has_budget) {
      const double allowance = start_allowance + running_net;
      b = std::min(budget_levels,
                   static_cast<int>(std::floor(std::max(0.0, allowance) / delta + 1e-9)));
    }
    return start_values[static_cast<std::size_t>(i) * static_cast<std::size_t>(budget_levels + 1) +
                        static_cast<std::size_t>(b)];
  }

  std::size_t index(std::int64_t t, int i, int b) const {
    return (static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(levels + 1) +
            static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(budget_levels + 1) +
           static_cast<std::size_t>(b);
  }

  bool decide(std::int64_t t, double value, double running_net) const {
    if (t > horizon) return false;
    const int i = grid_index(value, delta);
    int b = 0;
    if (has_budget) {
      const double allowance = start_allowance + running_net;
      if (allowance < -kDecisionTol) return false;
      b = static_cast<int>(std::floor(std::max(0.0, allowance) / delta + 1e-9));
      b = std::min(b, budget_levels);
    }
    return buy[index(t, i, b)] != 0;
  }
};

using BuyerPolicy = std::variant<ThresholdPolicy, MyopicPolicy, NeverPolicy, TrialBinPolicy,
                                 TablePolicy>;

/// Whether the policy purchases usage t at the given value, with
/// running_net the realized welfare-minus-payments so far.
inline bool policy_buys(const BuyerPolicy& policy, const PricingScheme& scheme, std::int64_t t,
                        double value, double running_net) {
  struct Visitor {
    const PricingScheme& scheme;
    std::int64_t t;
    double value;
    double net;
    bool operator()(const ThresholdPolicy& p) const { return value > p.threshold + kDecisionTol; }
    bool operator()(const MyopicPolicy&) const {
      return value >= price_at(scheme, t) - kDecisionTol;
    }
    bool operator()(const NeverPolicy&) const { return false; }
    bool operator()(const TrialBinPolicy& p) const {
      if (t <= p.trial) return value > 0.0;
      if (t == p.trial + 1) {
        return cumulative_value(value, p.delta) >= p.bin_price - kDecisionTol;
      }
      return value > 0.0;
    }
    bool operator()(const TablePolicy& p) const { return p.decide(t, value, net); }
  };
  return std::visit(Visitor{scheme, t, value, running_net}, policy);
}

/// One-shot accept decision for a buy-out price. Risk-neutral buyers
/// compare the price with the expected cumulative value; infinitely averse
/// buyers with the worst-case cumulative value; finite alpha requires both
/// a nonnegative expectation and a worst-case loss within budget.
inline bool bin_accept(const RiskProfile& profile, double v0, double price,
                       const ValueProcess& model) {
  double expected = 0.0;
  double worst = 0.0;
  if (const auto* walk = std::get_if<RandomWalkModel>(&model)) {
    expected = cumulative_value(v0, walk->delta);
    worst = worst_case_cumulative(v0, walk->delta);
  } else if (const auto* binary = std::get_if<BinaryValueModel>(&model)) {
    expected = binary_cumulative(v0, *binary);
    worst = v0 * binary->min_support_stop(v0);
  } else {
    throw not_closed_form_error("buy-out acceptance needs a walk or binary model");
  }
  if (profile.is_neutral()) return expected >= price - kDecisionTol;
  if (profile.is_infinite()) return worst >= price - kDecisionTol;
  return expected >= price - kDecisionTol &&
         price <= worst + profile.loss_budget() + kDecisionTol;
}

std::int64_t default_policy_horizon(double delta);
TablePolicy solve_policy_backward(const PricingScheme& scheme, const RiskProfile& profile,
                                  const RandomWalkModel& model, std::int64_t horizon);

/// Optimal response to a constant per-usage price. On the walk the
/// risk-neutral buyer stops below max(0, 2p - 1); the infinitely averse
/// buyer is myopic; intermediate alpha falls back to backward induction.
/// In the binary model every risk attitude is myopic: the value never
/// recovers, so buying below value is never worth it.
inline BuyerPolicy ppp_policy_constant(const RiskProfile& profile, double price,
                                       const ValueProcess& model) {
  if (price < 0.0) throw std::domain_error("price must be nonnegative");
  if (std::holds_alternative<BinaryValueModel>(model)) return MyopicPolicy{};
  if (profile.is_infinite()) return MyopicPolicy{};
  if (profile.is_neutral()) return ThresholdPolicy{rn_threshold(price)};
  const auto* walk = std::get_if<RandomWalkModel>(&model);
  if (walk == nullptr) {
    throw not_closed_form_error("intermediate alpha needs the grid walk");
  }
  return solve_policy_backward(ConstantPpp{price}, profile, *walk,
                               default_policy_horizon(walk->delta));
}

/// Response to a rent-to-own scheme priced within the buyer's loss budget:
/// with a per-round price at most 1/2, continuing at every nonzero value
/// has nonnegative expected future utility, and the paid window caps the
/// realized loss at price * paid_rounds <= 1/alpha.
inline BuyerPolicy rent_to_own_response(const RiskProfile& profile, const RentToOwn& scheme,
                                        const ValueProcess& model) {
  (void)model;
  if (scheme.price > 0.5 + kDecisionTol) {
    throw std::invalid_argument("rent-to-own response requires price <= 1/2");
  }
  // A zero loss budget cannot ride out any temporary loss.
  if (profile.is_infinite()) return MyopicPolicy{};
  if (!profile.is_neutral()) {
    const double total = scheme.price * static_cast<double>(scheme.paid_rounds);
    if (total > profile.loss_budget() + scheme.price + kDecisionTol) {
      throw std::invalid_argument("scheme exceeds the buyer's loss budget");
    }
  }
  return ThresholdPolicy{0.0};
}

inline std::int64_t default_policy_horizon(double delta) {
  return 10 * static_cast<std::int64_t>(std::llround(1.0 / (delta * delta)));
}

/// Finite-horizon dynamic program over (usage, grid value, remaining loss
/// allowance in delta units). Buying is feasible when the realized net
/// cannot fall below -1/alpha; allowance transitions round down, which is
/// conservative for prices off the delta grid. Indifference buys.
inline TablePolicy solve_policy_backward(const PricingScheme& scheme, const RiskProfile& profile,
                                         const RandomWalkModel& model, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  validate(scheme);
  const int levels = model.levels();
  const double delta = model.delta;

  TablePolicy table;
  table.delta = delta;
  table.horizon = horizon;
  table.levels = levels;
  table.has_budget = !profile.is_neutral();
  if (table.has_budget) {
    table.start_allowance = profile.loss_budget();
    // Allowance beyond the largest possible remaining loss never binds.
    const double never_binds = max_price(scheme) * static_cast<double>(horizon);
    const double span = std::min(table.start_allowance, never_binds);
    table.budget_levels = static_cast<int>(std::floor(span / delta + 1e-9));
    table.budget_capped = span < table.start_allowance;
  }
  const int budgets = table.budget_levels;
  const std::size_t slice =
      static_cast<std::size_t>(levels + 1) * static_cast<std::size_t>(budgets + 1);
  if (slice * static_cast<std::size_t>(horizon) > 400000000ULL) {
    throw std::invalid_argument("policy state space too large");
  }
  table.buy.assign(slice * static_cast<std::size_t>(horizon), 0);

  std::vector<double> next(slice, 0.0);
  std::vector<double> cur(slice, 0.0);
  const auto at = [&](std::vector<double>& w, int i, int b) -> double& {
    return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(budgets + 1) +
             static_cast<std::size_t>(b)];
  };

  for (std::int64_t t = horizon; t >= 1; --t) {
    const double price = price_at(scheme, t);
    for (int i = 0; i <= levels; ++i) {
      const double v = i * delta;
      for (int b = 0; b <= budgets; ++b) {
        if (i == 0) {
          at(cur, i, b) = 0.0;
          continue;
        }
        bool feasible = true;
        int bp = b;
        if (table.has_budget) {
          const double allowance = b * delta + v - price;
          feasible = allowance >= -kDecisionTol;
          bp = feasible
                   ? std::min(budgets,
                              static_cast<int>(std::floor(std::max(0.0, allowance) / delta + 1e-9)))
                   : b;
        }
        double value = 0.0;
        if (feasible) {
          const double cont = (i == levels)
                                  ? at(next, levels - 1, bp)
                                  : 0.5 * (at(next, i - 1, bp) + at(next, i + 1, bp));
          const double buy_value = (v - price) + cont;
          if (buy_value >= -kDecisionTol) {
            table.buy[table.index(t, i, b)] = 1;
            value = std::max(0.0, buy_value);
          }
        }
        at(cur, i, b) = value;
      }
    }
    std::swap(cur, next);
  }
  table.start_values = next;
  return table;
}

}  // namespace pricelab

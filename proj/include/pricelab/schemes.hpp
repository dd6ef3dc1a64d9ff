#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pricelab/analytics.hpp"
#include "pricelab/common.hpp"

namespace pricelab {

struct BuyItNow {
  double price = 0.0;
};

struct ConstantPpp {
  double price = 0.0;
};

struct FreeTrialPpp {
  std::int64_t trial_length = 0;
  double post_price = 0.0;
};

struct FreeTrialBin {
  std::int64_t trial_length = 0;
  double bin_price = 0.0;
};

struct RentToOwn {
  double price = 0.0;
  std::int64_t paid_rounds = 0;
};

struct PriceSequence {
  std::vector<double> prices;
  double tail = 0.0;
};

using PricingScheme =
    std::variant<BuyItNow, ConstantPpp, FreeTrialPpp, FreeTrialBin, RentToOwn, PriceSequence>;

inline void validate(const PricingScheme& scheme) {
  struct Visitor {
    void operator()(const BuyItNow& s) const { check(s.price); }
    void operator()(const ConstantPpp& s) const { check(s.price); }
    void operator()(const FreeTrialPpp& s) const {
      check(s.post_price);
      if (s.trial_length < 0) throw std::domain_error("trial length must be nonnegative");
    }
    void operator()(const FreeTrialBin& s) const {
      check(s.bin_price);
      if (s.trial_length < 0) throw std::domain_error("trial length must be nonnegative");
    }
    void operator()(const RentToOwn& s) const {
      check(s.price);
      if (s.paid_rounds < 0) throw std::domain_error("paid rounds must be nonnegative");
    }
    void operator()(const PriceSequence& s) const {
      for (double p : s.prices) check(p);
      check(s.tail);
    }
    static void check(double p) {
      if (p < 0.0 || !std::isfinite(p)) throw std::domain_error("prices must be nonnegative");
    }
  };
  std::visit(Visitor{}, scheme);
}

/// Price charged for the t-th usage, t >= 1. Total on every index.
inline double price_at(const PricingScheme& scheme, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("usage index starts at 1");
  struct Visitor {
    std::int64_t t;
    double operator()(const BuyItNow& s) const { return t == 1 ? s.price : 0.0; }
    double operator()(const ConstantPpp& s) const { return s.price; }
    double operator()(const FreeTrialPpp& s) const {
      return t <= s.trial_length ? 0.0 : s.post_price;
    }
    double operator()(const FreeTrialBin& s) const {
      return t == s.trial_length + 1 ? s.bin_price : 0.0;
    }
    double operator()(const RentToOwn& s) const { return t <= s.paid_rounds ? s.price : 0.0; }
    double operator()(const PriceSequence& s) const {
      return t <= static_cast<std::int64_t>(s.prices.size())
                 ? s.prices[static_cast<std::size_t>(t - 1)]
                 : s.tail;
    }
  };
  return std::visit(Visitor{t}, scheme);
}

/// Free-usage prefix of a scheme (0 when there is no trial).
inline std::int64_t trial_length(const PricingScheme& scheme) {
  if (const auto* s = std::get_if<FreeTrialPpp>(&scheme)) return s->trial_length;
  if (const auto* s = std::get_if<FreeTrialBin>(&scheme)) return s->trial_length;
  return 0;
}

inline double max_price(const PricingScheme& scheme) {
  struct Visitor {
    double operator()(const BuyItNow& s) const { return s.price; }
    double operator()(const ConstantPpp& s) const { return s.price; }
    double operator()(const FreeTrialPpp& s) const { return s.post_price; }
    double operator()(const FreeTrialBin& s) const { return s.bin_price; }
    double operator()(const RentToOwn& s) const { return s.price; }
    double operator()(const PriceSequence& s) const {
      double m = s.tail;
      for (double p : s.prices) m = std::max(m, p);
      return m;
    }
  };
  return std::visit(Visitor{}, scheme);
}

/// Trial of ceil(2 / (3 delta^2)) free usages followed by a per-usage price
/// of 0.089, the parameterization whose revenue floor scales with the
/// buyer's cumulative value even for loss-averse buyers.
inline FreeTrialPpp recommended_free_trial_ppp(double delta) {
  grid_levels(delta);
  const auto trial = static_cast<std::int64_t>(std::ceil(2.0 / (3.0 * delta * delta) - 1e-12));
  return FreeTrialPpp{trial, 0.089};
}

/// Trial of ceil(3 / (8 delta^2)) free usages followed by a buy-out price of
/// 1 / (4 delta^2).
inline FreeTrialBin recommended_free_trial_bin(double delta) {
  grid_levels(delta);
  const auto trial = static_cast<std::int64_t>(std::ceil(3.0 / (8.0 * delta * delta) - 1e-12));
  return FreeTrialBin{trial, 1.0 / (4.0 * delta * delta)};
}

/// Rent-to-own scheme for a buyer with loss budget 1/alpha: price
/// min(1/2, 1 / (24 alpha C(v*))) for ceil(24 C(v*)) paid rounds, free
/// afterwards. The total possible payment never exceeds the loss budget by
/// more than one round's price.
inline RentToOwn rent_to_own_params(double alpha, double v_star, double delta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("rent-to-own targets a finite positive alpha");
  }
  if (!(v_star > 0.0 && v_star <= 1.0)) throw std::domain_error("v_star must lie in (0, 1]");
  const double cv = cumulative_value(v_star, delta);
  const double price = std::min(0.5, 1.0 / (24.0 * alpha * cv));
  const auto rounds = static_cast<std::int64_t>(std::ceil(24.0 * cv - 1e-9));
  return RentToOwn{price, rounds};
}

}  // namespace pricelab

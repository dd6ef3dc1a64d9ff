#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pricelab {

// Thrown when a value that must lie on the step-size grid does not.
class grid_error : public std::domain_error {
 public:
  explicit grid_error(const std::string& what) : std::domain_error(what) {}
};

// Thrown when a density is requested at a point where it is undefined.
class undefined_density_error : public std::domain_error {
 public:
  explicit undefined_density_error(const std::string& what) : std::domain_error(what) {}
};

// Thrown when a statistical check is asked to run on too few samples.
class precision_error : public std::invalid_argument {
 public:
  explicit precision_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when no closed-form expression exists for a requested quantity.
class not_closed_form_error : public std::invalid_argument {
 public:
  explicit not_closed_form_error(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr double kEps = 1e-9;

inline bool nearly_equal(double a, double b, double tol = kEps) {
  return std::abs(a - b) <= tol;
}

// Validates a walk step size: delta in (0, 1/2] and 1/delta integral.
inline int grid_levels(double delta) {
  if (!(delta > 0.0) || delta > 0.5) {
    throw std::domain_error("step size must lie in (0, 0.5]");
  }
  const double inv = 1.0 / delta;
  const long long n = std::llround(inv);
  if (std::abs(inv - static_cast<double>(n)) > 1e-9) {
    throw grid_error("1/delta must be an integer");
  }
  return static_cast<int>(n);
}

// Index of a grid value, or a grid_error if it is off the grid.
inline int grid_index(double value, double delta) {
  const int levels = grid_levels(delta);
  const double idx = value / delta;
  const long long i = std::llround(idx);
  if (std::abs(idx - static_cast<double>(i)) > 1e-9 || i < 0 || i > levels) {
    throw grid_error("value is not on the delta grid");
  }
  return static_cast<int>(i);
}

inline bool on_grid(double value, double delta) {
  const double idx = value / delta;
  const long long i = std::llround(idx);
  return std::abs(idx - static_cast<double>(i)) <= 1e-9 && i >= 0 &&
         static_cast<double>(i) <= std::llround(1.0 / delta);
}

// Largest grid value strictly below a price; the stopping level of a buyer
// who purchases only while his value is at least that price.
inline double stop_level_below(double price, double delta) {
  if (price <= 0.0) return 0.0;
  const int k = static_cast<int>(std::ceil(price / delta - 1e-12)) - 1;
  if (k <= 0) return 0.0;
  return k * delta;
}

}  // namespace pricelab

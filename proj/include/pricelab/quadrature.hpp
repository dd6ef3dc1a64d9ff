#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>

namespace pricelab {

// Composite Simpson rule with an even number of panels.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels = 10000) {
  if (panels % 2 != 0) ++panels;
  if (b <= a) return 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) {
    const double x = a + h * static_cast<double>(i);
    sum += f(x) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

// Simpson with a step-halving consistency check. Integrands here are
// piecewise polynomials times a density, so disagreement signals a bug
// rather than slow convergence.
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-8) {
  const double coarse = simpson(f, a, b, 5000);
  const double fine = simpson(f, a, b, 10000);
  const double scale = std::max({std::abs(coarse), std::abs(fine), 1e-12});
  if (std::abs(fine - coarse) > rel_tol * scale + 1e-14) {
    throw std::runtime_error("quadrature failed to converge");
  }
  return fine;
}

// Golden-section search for the maximizer of a unimodal function on [lo, hi].
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-8) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace pricelab

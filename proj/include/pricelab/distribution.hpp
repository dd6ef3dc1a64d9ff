#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pricelab/common.hpp"
#include "pricelab/quadrature.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

/// Law of the buyer's initial value on [0, 1].
///
/// Supported variants: the uniform law, power CDFs F(x) = x^k, a point mass,
/// and a piecewise-linear CDF table. Immutable after construction; sampling
/// takes a caller-owned generator.
class ValueDistribution {
 public:
  enum class Kind { Uniform01, PowerCdf, PointMass, PiecewiseTable };

  static ValueDistribution uniform01() { return ValueDistribution(Kind::Uniform01); }

  static ValueDistribution power_cdf(double k) {
    if (!(k > 0.0)) throw std::domain_error("power CDF exponent must be positive");
    ValueDistribution d(Kind::PowerCdf);
    d.k_ = k;
    return d;
  }

  static ValueDistribution point_mass(double v) {
    if (v < 0.0 || v > 1.0) throw std::domain_error("point mass must lie in [0, 1]");
    ValueDistribution d(Kind::PointMass);
    d.atom_ = v;
    return d;
  }

  // Table of (x, F(x)) breakpoints. Must start at (0, 0) and end at (1, 1)
  // with strictly increasing x and nondecreasing F; the CDF interpolates
  // linearly in between. Atoms are not representable here.
  static ValueDistribution piecewise_table(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2) throw std::domain_error("table needs at least two breakpoints");
    if (points.front() != std::pair<double, double>{0.0, 0.0} ||
        std::abs(points.back().first - 1.0) > 0.0 || std::abs(points.back().second - 1.0) > 0.0) {
      throw std::domain_error("table must run from (0,0) to (1,1)");
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i].first > points[i - 1].first)) {
        throw std::domain_error("table breakpoints must be strictly increasing");
      }
      if (points[i].second < points[i - 1].second) {
        throw std::domain_error("table CDF values must be nondecreasing");
      }
    }
    ValueDistribution d(Kind::PiecewiseTable);
    d.table_ = std::move(points);
    return d;
  }

  Kind kind() const { return kind_; }
  double atom() const { return atom_; }

  /// F(x) for x in [0, 1].
  double cdf(double x) const {
    check_domain(x);
    switch (kind_) {
      case Kind::Uniform01: return x;
      case Kind::PowerCdf: return std::pow(x, k_);
      case Kind::PointMass: return x >= atom_ ? 1.0 : 0.0;
      case Kind::PiecewiseTable: return table_cdf(x);
    }
    return 0.0;
  }

  /// P[V >= x]; differs from 1 - F(x) only at an atom.
  double survival(double x) const {
    check_domain(x);
    if (kind_ == Kind::PointMass) return x <= atom_ ? 1.0 : 0.0;
    return 1.0 - cdf(x);
  }

  /// Density where defined; the table variant uses the interpolant slope.
  double pdf(double x) const {
    check_domain(x);
    switch (kind_) {
      case Kind::Uniform01: return 1.0;
      case Kind::PowerCdf: return k_ * std::pow(x, k_ - 1.0);
      case Kind::PointMass:
        throw undefined_density_error("point mass has no density");
      case Kind::PiecewiseTable: return table_slope(x);
    }
    return 0.0;
  }

  /// Inverse-CDF sample.
  double sample(Rng& rng) const {
    const double u = rng.next_double();
    switch (kind_) {
      case Kind::Uniform01: return u;
      case Kind::PowerCdf: return std::pow(u, 1.0 / k_);
      case Kind::PointMass: return atom_;
      case Kind::PiecewiseTable: return table_inverse(u);
    }
    return 0.0;
  }

  /// x - (1 - F(x)) / f(x); requires a positive density at x.
  double virtual_value(double x) const {
    const double f = pdf(x);
    if (!(f > 0.0)) throw undefined_density_error("density vanishes at query point");
    return x - (1.0 - cdf(x)) / f;
  }

  /// argmax over [0, 1] of p * P[V >= p]; ties resolved toward smaller p.
  double monopoly_price() const {
    if (kind_ == Kind::PointMass) return atom_;
    const auto revenue = [this](double p) { return p * survival(p); };
    constexpr int kGrid = 10000;
    int best = 0;
    double best_rev = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
      const double p = static_cast<double>(i) / kGrid;
      const double r = revenue(p);
      if (r > best_rev + 1e-15) {
        best_rev = r;
        best = i;
      }
    }
    const double lo = std::max(0.0, (best - 1.0) / kGrid);
    const double hi = std::min(1.0, (best + 1.0) / kGrid);
    const double refined = golden_section_max(revenue, lo, hi, 1e-10);
    return revenue(refined) >= best_rev ? refined : static_cast<double>(best) / kGrid;
  }

  /// max_p p * P[V >= p].
  double myerson_revenue() const {
    const double mu = monopoly_price();
    return mu * survival(mu);
  }

  /// Interior points where the density jumps; integrands built on the
  /// density should be integrated piecewise between them.
  std::vector<double> density_kinks() const {
    std::vector<double> kinks;
    if (kind_ == Kind::PiecewiseTable) {
      for (std::size_t i = 1; i + 1 < table_.size(); ++i) kinks.push_back(table_[i].first);
    }
    return kinks;
  }

  /// E[V], via the tail integral for the table variant.
  double mean() const {
    switch (kind_) {
      case Kind::Uniform01: return 0.5;
      case Kind::PowerCdf: return k_ / (k_ + 1.0);
      case Kind::PointMass: return atom_;
      case Kind::PiecewiseTable:
        return integrate([this](double x) { return 1.0 - table_cdf(x); }, 0.0, 1.0);
    }
    return 0.0;
  }

 private:
  explicit ValueDistribution(Kind kind) : kind_(kind) {}

  static void check_domain(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("value outside [0, 1]");
  }

  double table_cdf(double x) const {
    auto it = std::upper_bound(table_.begin(), table_.end(), x,
                               [](double v, const auto& pt) { return v < pt.first; });
    if (it == table_.begin()) return 0.0;
    if (it == table_.end()) return 1.0;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }

  double table_slope(double x) const {
    // Right-sided slope except at x = 1.
    std::size_t i = 1;
    while (i + 1 < table_.size() && x >= table_[i].first) ++i;
    return (table_[i].second - table_[i - 1].second) /
           (table_[i].first - table_[i - 1].first);
  }

  double table_inverse(double u) const {
    auto it = std::lower_bound(table_.begin(), table_.end(), u,
                               [](const auto& pt, double v) { return pt.second < v; });
    if (it == table_.begin()) return table_.front().first;
    if (it == table_.end()) return 1.0;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.second == lo.second) return lo.first;
    const double t = (u - lo.second) / (hi.second - lo.second);
    return lo.first + t * (hi.first - lo.first);
  }

  Kind kind_;
  double k_ = 1.0;
  double atom_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

/// Integral of g(v) f(v) dv over [lo, hi], split at density kinks so the
/// one-sided slopes of table densities land on the correct side. A point
/// mass inside [lo, hi] evaluates g directly.
template <typename G>
double expect_density(const ValueDistribution& d, double lo, double hi, G&& g) {
  if (hi <= lo) return 0.0;
  if (d.kind() == ValueDistribution::Kind::PointMass) {
    const double a = d.atom();
    return (a >= lo && a <= hi) ? g(a) : 0.0;
  }
  std::vector<double> bounds{lo};
  for (double kink : d.density_kinks()) {
    if (kink > lo && kink < hi) bounds.push_back(kink);
  }
  bounds.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    // Nudge both ends so one-sided slope evaluation stays inside the piece.
    total += integrate([&](double v) { return g(v) * d.pdf(v); }, bounds[i] + 1e-13,
                       bounds[i + 1] - 1e-13);
  }
  return total;
}

}  // namespace pricelab

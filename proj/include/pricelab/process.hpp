#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pricelab/common.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

/// Symmetric +-delta walk on the grid {0, delta, ..., 1}. 0 is absorbing;
/// from 1 the next value is 1 - delta with probability one.
struct RandomWalkModel {
  double delta;

  explicit RandomWalkModel(double d) : delta(d) { grid_levels(d); }

  int levels() const { return grid_levels(delta); }
};

/// Map from initial value to the mean number of interested usages.
struct MeanMap {
  enum class Kind { Linear, Table };
  Kind kind = Kind::Linear;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<std::pair<double, double>> table;  // sorted (v, mean)

  static MeanMap linear(double intercept, double slope) {
    MeanMap m;
    m.kind = Kind::Linear;
    m.intercept = intercept;
    m.slope = slope;
    return m;
  }

  static MeanMap tabulated(std::vector<std::pair<double, double>> pts) {
    if (pts.size() < 2) throw std::domain_error("mean table needs two points");
    MeanMap m;
    m.kind = Kind::Table;
    m.table = std::move(pts);
    return m;
  }

  double operator()(double v) const {
    if (kind == Kind::Linear) return intercept + slope * v;
    if (v <= table.front().first) return table.front().second;
    if (v >= table.back().first) return table.back().second;
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (v <= table[i].first) {
        const double t = (v - table[i - 1].first) / (table[i].first - table[i - 1].first);
        return table[i - 1].second + t * (table[i].second - table[i - 1].second);
      }
    }
    return table.back().second;
  }
};

/// Value stays at V0 for T usages and is 0 afterwards. T is drawn from the
/// stop law, whose conditional mean m(V0) must be finite and nondecreasing.
class BinaryValueModel {
 public:
  enum class StopLaw { Deterministic, Geometric };

  BinaryValueModel(StopLaw law, MeanMap mean_map)
      : law_(law), mean_map_(std::move(mean_map)) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double v = static_cast<double>(i) / 100.0;
      const double m = mean_map_(v);
      if (!(m >= 0.0) || !std::isfinite(m)) {
        throw std::domain_error("stop-law mean must be finite and nonnegative");
      }
      if (m < prev - 1e-12) throw std::domain_error("stop-law mean must be nondecreasing");
      prev = m;
    }
  }

  StopLaw law() const { return law_; }

  /// E[T | V0 = v] as realized by the sampler.
  double mean_stop(double v) const {
    const double m = mean_map_(v);
    if (law_ == StopLaw::Deterministic) return static_cast<double>(std::llround(m));
    return m;
  }

  /// Smallest possible stop time; the worst case for a loss-averse buyer.
  double min_support_stop(double v) const {
    const double m = mean_map_(v);
    if (law_ == StopLaw::Deterministic) return static_cast<double>(std::llround(m));
    if (m <= 0.0) return 0.0;
    return m < 1.0 ? 0.0 : 1.0;
  }

  /// Per-step continuation probability after the first usage (geometric law).
  double continue_probability(double v) const {
    const double m = mean_map_(v);
    return m > 1.0 ? 1.0 - 1.0 / m : 0.0;
  }

  std::int64_t sample_stop(double v, Rng& rng) const {
    const double m = mean_map_(v);
    if (law_ == StopLaw::Deterministic) return std::llround(m);
    if (m <= 0.0) return 0;
    // Mean below one cannot come from a geometric law on {1, 2, ...};
    // a Bernoulli mixture on {0, 1} keeps E[T | v] = m in that regime.
    if (m < 1.0) return rng.next_below(m) ? 1 : 0;
    const double q = 1.0 - 1.0 / m;
    std::int64_t t = 1;
    while (rng.next_below(q)) ++t;
    return t;
  }

 private:
  StopLaw law_;
  MeanMap mean_map_;
};

/// Discrete martingale increment law for the general evolution model.
struct IncrementLaw {
  std::vector<double> values;
  std::vector<double> probs;

  IncrementLaw(std::vector<double> vals, std::vector<double> ps)
      : values(std::move(vals)), probs(std::move(ps)) {
    if (values.empty() || values.size() != probs.size()) {
      throw std::domain_error("increment law needs matching values and probabilities");
    }
    double total = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (probs[i] < 0.0) throw std::domain_error("negative probability");
      total += probs[i];
      mean += probs[i] * values[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::domain_error("probabilities must sum to 1");
    if (std::abs(mean) > 1e-12) throw std::domain_error("increments must have mean zero");
  }

  double sample(Rng& rng) const {
    double u = rng.next_double();
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      if (u < probs[i]) return values[i];
      u -= probs[i];
    }
    return values.back();
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  double second_moment() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += probs[i] * values[i] * values[i];
    return s;
  }

  double third_moment() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += probs[i] * values[i] * values[i] * values[i];
    return s;
  }
};

/// Markov evolution with bounded mean-zero increments. The value may
/// momentarily exceed 1: a proposed move above 1 is replaced by the value
/// two steps back, and a proposed move to 0 or below absorbs.
class GeneralMarkovModel {
 public:
  explicit GeneralMarkovModel(IncrementLaw law) : law_(std::move(law)) {}

  const IncrementLaw& increments() const { return law_; }
  double epsilon() const { return law_.max_abs(); }
  double delta_sq() const { return law_.second_moment(); }
  double c3() const { return law_.third_moment(); }

 private:
  IncrementLaw law_;
};

using ValueProcess = std::variant<RandomWalkModel, BinaryValueModel, GeneralMarkovModel>;

/// One step of the grid walk. Empty result means absorption.
inline std::optional<double> step_walk(const RandomWalkModel& model, double value, Rng& rng) {
  const int i = grid_index(value, model.delta);
  if (i == 0) return std::nullopt;
  if (i == model.levels()) return (i - 1) * model.delta;
  return (rng.next_bool() ? i + 1 : i - 1) * model.delta;
}

/// One step of the general model given the previous two values. Boundary
/// comparisons carry a small tolerance so that values assembled from
/// repeated increment additions still land on 0 and 1 as intended.
inline std::optional<double> step_general(const GeneralMarkovModel& model, double prev,
                                          double current, Rng& rng) {
  const double proposed = current + model.increments().sample(rng);
  if (proposed > 1.0 + 1e-9) return prev;
  if (proposed <= 1e-9) return std::nullopt;
  return proposed;
}

/// Realized value path: per-usage values V0 .. V_{stop-1}.
struct Trajectory {
  double v0 = 0.0;
  std::vector<double> values;
  std::int64_t stop_time = 0;
  bool absorbed = false;
  bool capped = false;
};

inline std::int64_t default_cap(const ValueProcess& model, double v0) {
  struct Visitor {
    double v0;
    std::int64_t operator()(const RandomWalkModel& m) const {
      return 50 * static_cast<std::int64_t>(
                      std::ceil(v0 * (2.0 - v0) / (m.delta * m.delta)) + 1);
    }
    std::int64_t operator()(const BinaryValueModel& m) const {
      return 50 * static_cast<std::int64_t>(std::ceil(m.mean_stop(v0)) + 1);
    }
    std::int64_t operator()(const GeneralMarkovModel& m) const {
      return 50 * static_cast<std::int64_t>(
                      std::ceil(v0 * (2.0 - v0) / m.delta_sq()) + 1);
    }
  };
  return std::visit(Visitor{v0}, model);
}

/// Runs the process from v0 until absorption or the usage cap.
inline Trajectory sample_trajectory(const ValueProcess& model, double v0, std::int64_t cap,
                                    Rng& rng) {
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  Trajectory out;
  out.v0 = v0;
  if (std::holds_alternative<BinaryValueModel>(model)) {
    const auto& m = std::get<BinaryValueModel>(model);
    if (v0 <= 0.0) {
      out.absorbed = true;
      return out;
    }
    std::int64_t t = 0;
    if (m.law() == BinaryValueModel::StopLaw::Deterministic) {
      const std::int64_t stop = m.sample_stop(v0, rng);
      t = std::min(stop, cap);
      out.absorbed = stop <= cap;
    } else {
      const double mean = m.mean_stop(v0);
      if (mean <= 0.0) {
        out.absorbed = true;
        return out;
      }
      if (mean < 1.0) {
        t = rng.next_below(mean) ? 1 : 0;
        out.absorbed = true;
      } else {
        // Memoryless continuation, so no lookahead is needed.
        const double q = m.continue_probability(v0);
        t = 1;
        while (t < cap) {
          if (!rng.next_below(q)) {
            out.absorbed = true;
            break;
          }
          ++t;
        }
      }
    }
    out.values.assign(static_cast<std::size_t>(t), v0);
    out.stop_time = t;
    out.capped = !out.absorbed;
    return out;
  }

  double prev = v0;
  double current = v0;
  bool walk = std::holds_alternative<RandomWalkModel>(model);
  if (walk) grid_index(v0, std::get<RandomWalkModel>(model).delta);
  while (true) {
    if (current <= 0.0) {
      out.absorbed = true;
      break;
    }
    if (out.stop_time == cap) {
      out.capped = true;
      break;
    }
    out.values.push_back(current);
    ++out.stop_time;
    std::optional<double> next =
        walk ? step_walk(std::get<RandomWalkModel>(model), current, rng)
             : step_general(std::get<GeneralMarkovModel>(model), prev, current, rng);
    prev = current;
    if (!next) {
      out.absorbed = true;
      break;
    }
    current = *next;
  }
  return out;
}

inline Trajectory sample_trajectory(const ValueProcess& model, double v0, Rng& rng) {
  return sample_trajectory(model, v0, default_cap(model, v0), rng);
}

}  // namespace pricelab

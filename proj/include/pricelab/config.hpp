#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pricelab/distribution.hpp"
#include "pricelab/process.hpp"
#include "pricelab/schemes.hpp"
#include "pricelab/strategy.hpp"

namespace pricelab {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Config objects follow the {kind, params} convention, e.g.
//   {"kind": "power", "k": 2}
//   {"kind": "walk", "delta": 0.1}
//   {"kind": "free_ppp", "trial": 67, "price": 0.089}

inline ValueDistribution parse_distribution(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "uniform") return ValueDistribution::uniform01();
    if (kind == "power") return ValueDistribution::power_cdf(j.at("k").get<double>());
    if (kind == "point") return ValueDistribution::point_mass(j.at("v").get<double>());
    if (kind == "table") {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : j.at("points")) {
        pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
      return ValueDistribution::piecewise_table(std::move(pts));
    }
  } catch (const std::domain_error& e) {
    throw config_error(std::string("bad distribution: ") + e.what());
  }
  throw config_error("unknown distribution kind: " + kind);
}

inline MeanMap parse_mean_map(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    return MeanMap::linear(j.value("a", 0.0), j.value("b", 0.0));
  }
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) {
      pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return MeanMap::tabulated(std::move(pts));
  }
  throw config_error("unknown mean-map kind: " + kind);
}

inline ValueProcess parse_process(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "walk") return RandomWalkModel(j.at("delta").get<double>());
    if (kind == "binary") {
      const auto& stop = j.at("stop");
      const std::string law = stop.at("kind").get<std::string>();
      const MeanMap mean = parse_mean_map(stop.at("mean"));
      if (law == "deterministic") {
        return BinaryValueModel(BinaryValueModel::StopLaw::Deterministic, mean);
      }
      if (law == "geometric") {
        return BinaryValueModel(BinaryValueModel::StopLaw::Geometric, mean);
      }
      throw config_error("unknown stop-law kind: " + law);
    }
    if (kind == "markov") {
      const auto& inc = j.at("increments");
      return GeneralMarkovModel(IncrementLaw(inc.at("values").get<std::vector<double>>(),
                                             inc.at("probs").get<std::vector<double>>()));
    }
  } catch (const std::domain_error& e) {
    throw config_error(std::string("bad process: ") + e.what());
  }
  throw config_error("unknown process kind: " + kind);
}

inline PricingScheme parse_scheme(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  try {
    PricingScheme scheme;
    if (kind == "bin") {
      scheme = BuyItNow{j.at("price").get<double>()};
    } else if (kind == "ppp") {
      scheme = ConstantPpp{j.at("price").get<double>()};
    } else if (kind == "free_ppp") {
      scheme = FreeTrialPpp{j.at("trial").get<std::int64_t>(), j.at("price").get<double>()};
    } else if (kind == "free_bin") {
      scheme = FreeTrialBin{j.at("trial").get<std::int64_t>(), j.at("price").get<double>()};
    } else if (kind == "rto") {
      scheme = RentToOwn{j.at("price").get<double>(), j.at("paid_rounds").get<std::int64_t>()};
    } else if (kind == "sequence") {
      scheme = PriceSequence{j.at("prices").get<std::vector<double>>(), j.value("tail", 0.0)};
    } else {
      throw config_error("unknown scheme kind: " + kind);
    }
    validate(scheme);
    return scheme;
  } catch (const std::domain_error& e) {
    throw config_error(std::string("bad scheme: ") + e.what());
  }
}

inline RiskProfile parse_profile(const nlohmann::json& j) {
  const auto& a = j.at("alpha");
  if (a.is_string()) {
    if (a.get<std::string>() == "inf") return RiskProfile::infinitely_averse();
    throw config_error("alpha must be a number or \"inf\"");
  }
  try {
    return RiskProfile::with_alpha(a.get<double>());
  } catch (const std::domain_error& e) {
    throw config_error(std::string("bad profile: ") + e.what());
  }
}

inline std::string scheme_name(const PricingScheme& scheme) {
  struct Visitor {
    std::string operator()(const BuyItNow&) const { return "bin"; }
    std::string operator()(const ConstantPpp&) const { return "ppp"; }
    std::string operator()(const FreeTrialPpp&) const { return "free_ppp"; }
    std::string operator()(const FreeTrialBin&) const { return "free_bin"; }
    std::string operator()(const RentToOwn&) const { return "rto"; }
    std::string operator()(const PriceSequence&) const { return "sequence"; }
  };
  return std::visit(Visitor{}, scheme);
}

inline nlohmann::json scheme_to_json(const PricingScheme& scheme) {
  struct Visitor {
    nlohmann::json operator()(const BuyItNow& s) const {
      return {{"kind", "bin"}, {"price", s.price}};
    }
    nlohmann::json operator()(const ConstantPpp& s) const {
      return {{"kind", "ppp"}, {"price", s.price}};
    }
    nlohmann::json operator()(const FreeTrialPpp& s) const {
      return {{"kind", "free_ppp"}, {"trial", s.trial_length}, {"price", s.post_price}};
    }
    nlohmann::json operator()(const FreeTrialBin& s) const {
      return {{"kind", "free_bin"}, {"trial", s.trial_length}, {"price", s.bin_price}};
    }
    nlohmann::json operator()(const RentToOwn& s) const {
      return {{"kind", "rto"}, {"price", s.price}, {"paid_rounds", s.paid_rounds}};
    }
    nlohmann::json operator()(const PriceSequence& s) const {
      return {{"kind", "sequence"}, {"prices", s.prices}, {"tail", s.tail}};
    }
  };
  return std::visit(Visitor{}, scheme);
}

/// Full experiment description: one distribution and process, one or more
/// schemes and risk profiles, and the sampling plan. The master seed is
/// mandatory so that every run is reproducible.
struct ExperimentConfig {
  nlohmann::json distribution_spec;
  nlohmann::json process_spec;
  std::vector<nlohmann::json> scheme_specs;
  std::vector<nlohmann::json> profile_specs;
  std::int64_t n_samples = 100000;
  std::uint64_t master_seed = 0;
  bool seed_given = false;
  int grid_resolution = 10000;
  double slack_constant = 10.0;
  std::string output_path;

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (!j.contains("distribution")) throw config_error("missing distribution");
    if (!j.contains("process")) throw config_error("missing process");
    c.distribution_spec = j.at("distribution");
    c.process_spec = j.at("process");
    if (j.contains("schemes")) {
      for (const auto& s : j.at("schemes")) c.scheme_specs.push_back(s);
    }
    if (j.contains("profiles")) {
      for (const auto& p : j.at("profiles")) c.profile_specs.push_back(p);
    }
    c.n_samples = j.value("n_samples", std::int64_t{100000});
    if (j.contains("master_seed")) {
      c.master_seed = j.at("master_seed").get<std::uint64_t>();
      c.seed_given = true;
    }
    c.grid_resolution = j.value("grid_resolution", 10000);
    c.slack_constant = j.value("slack_constant", 10.0);
    c.output_path = j.value("out", std::string{});
    return c;
  }

  ValueDistribution distribution() const { return parse_distribution(distribution_spec); }
  ValueProcess process() const { return parse_process(process_spec); }
  std::vector<PricingScheme> schemes() const {
    std::vector<PricingScheme> out;
    for (const auto& s : scheme_specs) out.push_back(parse_scheme(s));
    return out;
  }
  std::vector<RiskProfile> profiles() const {
    std::vector<RiskProfile> out;
    for (const auto& p : profile_specs) out.push_back(parse_profile(p));
    return out;
  }
};

}  // namespace pricelab

#include "viseq/game.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"

namespace viseq {

double require_proportion(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidProportion(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
  return p;
}

double CongestionGame::payoff_a(double p) const {
  require_proportion(p, "proportion");
  return a_.at(p);
}

double CongestionGame::payoff_b(double p) const {
  require_proportion(p, "proportion");
  return b_.at(p);
}

double CongestionGame::payoff_difference(double p) const {
  require_proportion(p, "proportion");
  return a_.at(p) - b_.at(p);
}

double CongestionGame::nash_proportion() const {
  const double denom = b_.slope - a_.slope;
  if (denom == 0.0) {
    throw NoInteriorEquilibrium("payoff lines are parallel; no indifference point");
  }
  const double p = (a_.intercept - b_.intercept) / denom;
  if (!(p >= 0.0 && p <= 1.0)) {
    throw NoInteriorEquilibrium("indifference point " + std::to_string(p) +
                                " lies outside [0, 1]");
  }
  return p;
}

double CongestionGame::social_welfare(double p) const {
  require_proportion(p, "proportion");
  return p * a_.at(p) + (1.0 - p) * b_.at(p);
}

WelfarePoint CongestionGame::welfare_optimum() const {
  // social_welfare(p) = A p^2 + B p + C with A = slope_a - slope_b,
  // B = intercept_a - intercept_b + slope_b, C = intercept_b.
  const double qa = a_.slope - b_.slope;
  const double qb = a_.intercept - b_.intercept + b_.slope;
  if (qa >= 0.0) {
    throw NotConcave("welfare quadratic is not strictly concave");
  }
  double p = -qb / (2.0 * qa);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return WelfarePoint{p, social_welfare(p)};
}

std::string game_to_json(const CongestionGame& game) {
  nlohmann::json j;
  j["intercept_a"] = game.location_a().intercept;
  j["slope_a"] = game.location_a().slope;
  j["intercept_b"] = game.location_b().intercept;
  j["slope_b"] = game.location_b().slope;
  return j.dump();
}

CongestionGame game_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad game json: ") + e.what());
  }
  for (const char* key : {"intercept_a", "slope_a", "intercept_b", "slope_b"}) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw SchemaError(std::string("game json missing numeric field '") + key + "'");
    }
  }
  return CongestionGame{AffinePayoff{j["intercept_a"].get<double>(), j["slope_a"].get<double>()},
                        AffinePayoff{j["intercept_b"].get<double>(), j["slope_b"].get<double>()}};
}

}  // namespace viseq

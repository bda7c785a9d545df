#pragma once

#include <string>

namespace viseq {

// Proportions live in [0, 1]; boundary-crossing values are rejected at API
// entry points via require_proportion.
using Proportion = double;

double require_proportion(double p, const char* what);

struct AffinePayoff {
  double intercept = 0.0;
  double slope = 0.0;
  double at(double p) const { return intercept + slope * p; }
};

struct WelfarePoint {
  double proportion = 0.0;
  double welfare = 0.0;
};

enum class Location { A, B };

// Two-location congestion game: everyone at location A earns payoff_a(p),
// everyone at B earns payoff_b(p), where p is the proportion choosing A.
// The default instance pays 40 - 30p at A and 20 + 60p at B, so the payoff
// difference is 20 - 90p and the interior equilibrium sits at p = 2/9.
class CongestionGame {
 public:
  CongestionGame() = default;
  CongestionGame(AffinePayoff payoff_a, AffinePayoff payoff_b) : a_(payoff_a), b_(payoff_b) {}

  const AffinePayoff& location_a() const { return a_; }
  const AffinePayoff& location_b() const { return b_; }

  double payoff_a(double p) const;
  double payoff_b(double p) const;
  double payoff_difference(double p) const;  // payoff_a(p) - payoff_b(p)

  // Interior indifference point; throws NoInteriorEquilibrium when payoffs
  // never cross inside [0, 1] (or the payoff lines are parallel).
  double nash_proportion() const;

  // p*payoff_a(p) + (1-p)*payoff_b(p)
  double social_welfare(double p) const;

  // Vertex of the welfare quadratic clamped to [0, 1]; throws NotConcave
  // when slope_a - slope_b >= 0.
  WelfarePoint welfare_optimum() const;

 private:
  AffinePayoff a_{40.0, -30.0};
  AffinePayoff b_{20.0, 60.0};
};

// Flat key-value form: {"intercept_a", "slope_a", "intercept_b", "slope_b"}.
std::string game_to_json(const CongestionGame& game);
CongestionGame game_from_json(const std::string& text);

}  // namespace viseq

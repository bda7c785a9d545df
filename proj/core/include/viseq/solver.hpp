#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "viseq/behavior.hpp"
#include "viseq/game.hpp"

namespace viseq {

// An evaluatable map prediction -> response proportion. evaluate() is the
// deterministic mean map (population read off the prediction itself, with the
// animated/static flag taken from the scheme); sample() draws one rendered
// signal and returns the population response to it.
class ResponseMap {
 public:
  static ResponseMap from_population(PopulationMixture pop, CongestionGame game,
                                     SignalScheme scheme, InformationAccess access);
  static ResponseMap from_function(std::function<double(double)> f,
                                   CongestionGame game = CongestionGame{});
  static ResponseMap from_sampler(std::function<double(double, RngStream&)> sampler,
                                  std::function<double(double)> mean_map,
                                  CongestionGame game = CongestionGame{});

  double evaluate(double p) const;
  double sample(double p, RngStream& rng) const;
  bool stochastic() const { return static_cast<bool>(sampler_); }
  const CongestionGame& game() const { return game_; }

 private:
  ResponseMap() = default;
  CongestionGame game_{};
  std::function<double(double)> mean_map_;
  std::function<double(double, RngStream&)> sampler_;
};

enum class SolverMethod { GridScan, Bisection, DampedIteration, RobbinsMonro, RegressionFixedPoint };

const char* solver_method_name(SolverMethod method);

struct EquilibriumResult {
  double p_star = 0.0;
  double residual = 0.0;
  SolverMethod method = SolverMethod::GridScan;
  long long iterations = 0;
  std::optional<std::pair<double, double>> ci;
  double welfare = 0.0;
  bool converged = true;
  // Sign-change intervals of evaluate(p) - p seen during a grid scan, so
  // fixed-point multiplicity stays visible.
  std::vector<std::pair<double, double>> brackets;
};

// Evaluates the map on {0, resolution, ..., 1} and returns the grid point
// minimizing |S(p) - p| (smallest p on ties). resolution must be in (0, 0.1].
EquilibriumResult grid_scan(const ResponseMap& map, double resolution, int threads = 1);

// Halves a sign-change bracket of g(p) = S(p) - p; g(0) >= 0 >= g(1) always
// holds since S maps into [0, 1]. Residual at the midpoint can stay large
// when S jumps across the bracket - callers inspect it.
EquilibriumResult bisection(const ResponseMap& map, double tol = 1e-6, int max_iter = 200);

// Iterates p <- (1-alpha)p + alpha*S(p) until the update is <= tol; on
// exhaustion returns the best iterate seen with converged = false.
EquilibriumResult damped_iteration(const ResponseMap& map, double alpha, double tol = 1e-6,
                                   int max_iter = 1000, double p0 = 0.5);

struct RobbinsMonroConfig {
  double a0 = 1.0;
  double t0 = 10.0;
  long long iterations = 100000;
  std::uint64_t seed = 0;
  double p0 = 0.5;
};

// Stochastic approximation p <- clamp(p + a_t (sample(p) - p)) with
// a_t = a0/(t + t0); returns the tail average over the final half with a
// normal-theory CI from the tail variance, and the residual of the
// deterministic map at that point. Bit-reproducible given the seed.
EquilibriumResult robbins_monro(const ResponseMap& map, const RobbinsMonroConfig& cfg);

// Identity crossing a/(1-b) of a fitted response line a + b*p.
double fit_fixed_point_from_regression(double intercept, double slope);

struct EquilibriumReport {
  double p_star = 0.0;
  double welfare_star = 0.0;
  double p_nash = 0.0;
  double welfare_nash = 0.0;
  double p_optimum = 0.0;
  double welfare_optimum = 0.0;
  double welfare_gain_over_nash = 0.0;
};

EquilibriumReport equilibrium_report(const CongestionGame& game, const EquilibriumResult& result);
std::string report_to_json(const EquilibriumReport& report);
std::string result_to_json(const EquilibriumResult& result);

}  // namespace viseq

#include "doctest.h"

#include <cmath>

#include "viseq/errors.hpp"
#include "viseq/rng.hpp"
#include "viseq/solver.hpp"

using namespace viseq;

namespace {

ResponseMap mirror_map() {
  return ResponseMap::from_function([](double p) { return 1.0 - p; });
}

ResponseMap empirical_map(VisType vis) {
  SignalScheme scheme;
  if (vis == VisType::Hops) scheme.variant = SignalScheme::Variant::FrameSequence;
  return ResponseMap::from_population(
      normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}}), CongestionGame{}, scheme,
      InformationAccess::Public);
}

ResponseMap logit_map(double rationality) {
  return ResponseMap::from_population(
      normalized_mixture({{AgentModel{LogitResponder{rationality}}, 1.0}}), CongestionGame{},
      SignalScheme{}, InformationAccess::Public);
}

}  // namespace

TEST_CASE("grid scan basics") {
  const EquilibriumResult r = grid_scan(mirror_map(), 1e-3);
  CHECK(r.p_star == 0.5);
  CHECK(r.residual == 0.0);
  CHECK(r.method == SolverMethod::GridScan);

  const EquilibriumResult c =
      grid_scan(ResponseMap::from_function([](double) { return 0.5; }), 1e-3);
  CHECK(c.p_star == 0.5);
  CHECK(c.residual == 0.0);

  CHECK_THROWS_AS(grid_scan(mirror_map(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(grid_scan(mirror_map(), 0.2), std::invalid_argument);
}

TEST_CASE("grid scan reports sign-change brackets") {
  const EquilibriumResult r = grid_scan(mirror_map(), 1e-3);
  REQUIRE(!r.brackets.empty());
  CHECK(r.brackets.front().first <= 0.5);
  CHECK(r.brackets.front().second >= 0.5);

  // three identity crossings
  const ResponseMap wavy = ResponseMap::from_function(
      [](double p) { return 0.5 + 0.45 * std::sin(3.0 * 3.141592653589793 * (p - 0.5)); });
  const EquilibriumResult w = grid_scan(wavy, 1e-3);
  CHECK(w.brackets.size() >= 2);
}

TEST_CASE("grid scan is independent of the thread count") {
  const EquilibriumResult a = grid_scan(empirical_map(VisType::Bar), 1e-4, 1);
  const EquilibriumResult b = grid_scan(empirical_map(VisType::Bar), 1e-4, 4);
  CHECK(a.p_star == b.p_star);
  CHECK(a.residual == b.residual);
}

TEST_CASE("bisection on the mirror map") {
  const EquilibriumResult r = bisection(mirror_map(), 1e-9);
  CHECK(std::abs(r.p_star - 0.5) <= 1e-9);
  CHECK(r.converged);
  CHECK(std::abs(r.welfare - CongestionGame{}.social_welfare(r.p_star)) <= 1e-12);
}

TEST_CASE("bisection at zero rationality finds the coin flip exactly") {
  const EquilibriumResult r = bisection(logit_map(0.0), 1e-6);
  CHECK(r.p_star == 0.5);
  CHECK(r.residual == 0.0);
}

TEST_CASE("rationality pushes the fixed point toward indifference") {
  const double lambdas[] = {0.0, 0.1, 1.0, 10.0};
  const double frozen[] = {0.5, 0.310740146950409, 0.23531697726543, 0.223605309473647};
  double prev = 1.0;
  for (int i = 0; i < 4; ++i) {
    const EquilibriumResult r = bisection(logit_map(lambdas[i]), 1e-9);
    CHECK(std::abs(r.p_star - frozen[i]) <= 1e-7);
    const double dist = std::abs(r.p_star - 2.0 / 9.0);
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK(prev <= 0.005);
}

TEST_CASE("bisection iteration cap") {
  const ResponseMap low = ResponseMap::from_function([](double) { return 0.4; });
  CHECK_THROWS_AS(bisection(low, 1e-12, 1), MaxIterExceeded);
}

TEST_CASE("damped iteration") {
  const ResponseMap flat = ResponseMap::from_function([](double) { return 0.5; });
  const EquilibriumResult one = damped_iteration(flat, 1.0, 1e-6, 1000, 0.9);
  CHECK(one.p_star == 0.5);
  CHECK(one.iterations == 1);

  // undamped two-cycle never settles
  const EquilibriumResult osc = damped_iteration(mirror_map(), 1.0, 1e-6, 1000, 0.2);
  CHECK(!osc.converged);

  const EquilibriumResult ok = damped_iteration(mirror_map(), 0.5, 1e-6, 1000, 0.2);
  CHECK(ok.converged);
  CHECK(std::abs(ok.p_star - 0.5) <= 1e-5);

  CHECK_THROWS_AS(damped_iteration(mirror_map(), 0.0, 1e-6, 1000, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(damped_iteration(mirror_map(), 1.5, 1e-6, 1000, 0.5), std::invalid_argument);
}

TEST_CASE("solvers agree on the fitted response maps") {
  for (VisType vis : {VisType::Bar, VisType::Hops}) {
    const ResponseMap map = empirical_map(vis);
    const double g = grid_scan(map, 1e-4).p_star;
    const double b = bisection(map, 1e-6).p_star;
    const double d = damped_iteration(map, 0.5, 1e-6).p_star;
    CHECK(std::abs(g - b) <= 1e-3);
    CHECK(std::abs(b - d) <= 1e-3);
    CHECK(std::abs(bisection(map, 1e-6).residual) <= 1e-4);
  }
}

TEST_CASE("residuals respect the advertised bounds") {
  const ResponseMap map = empirical_map(VisType::Bar);
  CHECK(std::abs(grid_scan(map, 1e-3).residual) <= 1e-3);
  CHECK(std::abs(bisection(map, 1e-6).residual) <= 1e-4);
  CHECK(std::abs(damped_iteration(map, 0.5, 1e-8).residual) <= 1e-6);
}

TEST_CASE("robbins monro on a noiseless map") {
  RobbinsMonroConfig cfg;
  cfg.iterations = 10000;
  cfg.seed = 5;
  const EquilibriumResult r = robbins_monro(mirror_map(), cfg);
  CHECK(std::abs(r.p_star - 0.5) <= 1e-3);
  CHECK(r.converged);
  REQUIRE(r.ci.has_value());
  CHECK(r.ci->first <= r.p_star);
  CHECK(r.ci->second >= r.p_star);
}

TEST_CASE("robbins monro averages a constant bernoulli sampler") {
  const ResponseMap coin = ResponseMap::from_sampler(
      [](double, RngStream& rng) { return rng.bernoulli(0.3) ? 1.0 : 0.0; },
      [](double) { return 0.3; });
  RobbinsMonroConfig cfg;
  cfg.iterations = 100000;
  cfg.seed = 6;
  const EquilibriumResult r = robbins_monro(coin, cfg);
  CHECK(std::abs(r.p_star - 0.3) <= 0.01);
}

TEST_CASE("robbins monro is bit reproducible") {
  const ResponseMap map = ResponseMap::from_population(
      normalized_mixture({{AgentModel{LogitResponder{0.1}}, 1.0}}), CongestionGame{},
      SignalScheme{SignalScheme::Variant::BinomialSample, 30, 30}, InformationAccess::Public);
  RobbinsMonroConfig cfg;
  cfg.iterations = 20000;
  cfg.seed = 7;
  const EquilibriumResult a = robbins_monro(map, cfg);
  const EquilibriumResult b = robbins_monro(map, cfg);
  CHECK(a.p_star == b.p_star);
  CHECK(a.ci->first == b.ci->first);
  CHECK(a.ci->second == b.ci->second);
}

TEST_CASE("sampled displays keep the fixed point near the exact one") {
  const ResponseMap map = ResponseMap::from_population(
      normalized_mixture({{AgentModel{LogitResponder{0.1}}, 1.0}}), CongestionGame{},
      SignalScheme{SignalScheme::Variant::BinomialSample, 30, 30}, InformationAccess::Public);
  CHECK(map.stochastic());
  RobbinsMonroConfig cfg;
  cfg.iterations = 100000;
  cfg.seed = 8;
  const EquilibriumResult r = robbins_monro(map, cfg);
  const EquilibriumResult det = bisection(logit_map(0.1), 1e-9);
  CHECK(std::abs(r.p_star - det.p_star) <= 0.01);
}

TEST_CASE("identity crossing of a fitted line") {
  CHECK(std::abs(fit_fixed_point_from_regression(0.2, 0.4) - 1.0 / 3.0) <= 1e-12);
  CHECK(fit_fixed_point_from_regression(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(fit_fixed_point_from_regression(0.3, 1.0), DegenerateSlope);
  CHECK_THROWS_AS(fit_fixed_point_from_regression(0.9, 0.5), OutsideUnitInterval);
}

TEST_CASE("welfare report against the baseline") {
  CongestionGame g;
  EquilibriumResult at_nash;
  at_nash.p_star = 2.0 / 9.0;
  at_nash.welfare = g.social_welfare(at_nash.p_star);
  const EquilibriumReport r0 = equilibrium_report(g, at_nash);
  CHECK(std::abs(r0.welfare_gain_over_nash) <= 1e-12);
  CHECK(std::abs(r0.p_nash - 2.0 / 9.0) <= 1e-12);
  CHECK(std::abs(r0.p_optimum - 4.0 / 9.0) <= 1e-9);

  EquilibriumResult at_opt;
  at_opt.p_star = 4.0 / 9.0;
  at_opt.welfare = g.social_welfare(at_opt.p_star);
  CHECK(std::abs(equilibrium_report(g, at_opt).welfare_gain_over_nash - 40.0 / 9.0) <= 1e-9);

  EquilibriumResult mid;
  mid.p_star = 0.34;
  mid.welfare = g.social_welfare(0.34);
  const EquilibriumReport rm = equilibrium_report(g, mid);
  CHECK(std::abs(rm.welfare_star - 36.796) <= 1e-9);
  CHECK(std::abs(rm.welfare_gain_over_nash - (36.796 - 300.0 / 9.0)) <= 1e-9);
}

TEST_CASE("result and report serialize") {
  const EquilibriumResult r = grid_scan(empirical_map(VisType::Bar), 1e-3);
  const std::string rj = result_to_json(r);
  CHECK(rj.find("\"p_star\"") != std::string::npos);
  CHECK(rj.find("\"method\"") != std::string::npos);
  const std::string pj = report_to_json(equilibrium_report(CongestionGame{}, r));
  CHECK(pj.find("\"welfare_gain_over_nash\"") != std::string::npos);
}

#include "viseq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"
#include "viseq/parallel.hpp"

namespace viseq {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

ResponseMap ResponseMap::from_population(PopulationMixture pop, CongestionGame game,
                                         SignalScheme scheme, InformationAccess access) {
  check_mixture(pop);
  const bool animated = scheme.variant == SignalScheme::Variant::FrameSequence;
  ResponseMap map;
  map.game_ = game;
  map.mean_map_ = [pop, game, animated, access](double p) {
    double total = 0.0;
    for (const auto& [model, weight] : pop.components) {
      total += weight * display_response(model, game, p, animated, access);
    }
    return total;
  };
  map.sampler_ = [pop, game, scheme, access](double p, RngStream& rng) {
    const Signal signal = render(scheme, p, rng);
    double total = 0.0;
    for (const auto& [model, weight] : pop.components) {
      total += weight * choose_prob_a(model, game, &signal, access);
    }
    return total;
  };
  return map;
}

ResponseMap ResponseMap::from_function(std::function<double(double)> f, CongestionGame game) {
  if (!f) {
    throw std::invalid_argument("response function must not be empty");
  }
  ResponseMap map;
  map.game_ = game;
  map.mean_map_ = std::move(f);
  return map;
}

ResponseMap ResponseMap::from_sampler(std::function<double(double, RngStream&)> sampler,
                                      std::function<double(double)> mean_map, CongestionGame game) {
  if (!sampler || !mean_map) {
    throw std::invalid_argument("sampler and mean map must not be empty");
  }
  ResponseMap map;
  map.game_ = game;
  map.mean_map_ = std::move(mean_map);
  map.sampler_ = std::move(sampler);
  return map;
}

double ResponseMap::evaluate(double p) const {
  require_proportion(p, "prediction");
  return clamp01(mean_map_(p));
}

double ResponseMap::sample(double p, RngStream& rng) const {
  require_proportion(p, "prediction");
  if (!sampler_) {
    return clamp01(mean_map_(p));
  }
  return clamp01(sampler_(p, rng));
}

const char* solver_method_name(SolverMethod method) {
  switch (method) {
    case SolverMethod::GridScan: return "grid_scan";
    case SolverMethod::Bisection: return "bisection";
    case SolverMethod::DampedIteration: return "damped_iteration";
    case SolverMethod::RobbinsMonro: return "robbins_monro";
    case SolverMethod::RegressionFixedPoint: return "regression_fixed_point";
  }
  return "unknown";
}

EquilibriumResult grid_scan(const ResponseMap& map, double resolution, int threads) {
  if (!(resolution > 0.0 && resolution <= 0.1)) {
    throw std::invalid_argument("grid resolution must lie in (0, 0.1]");
  }
  std::vector<double> points;
  for (std::size_t i = 0; static_cast<double>(i) * resolution < 1.0; ++i) {
    points.push_back(static_cast<double>(i) * resolution);
  }
  points.push_back(1.0);
  std::vector<double> values(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) { values[i] = map.evaluate(points[i]); });

  EquilibriumResult out;
  out.method = SolverMethod::GridScan;
  out.iterations = static_cast<long long>(points.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double gap = std::abs(values[i] - points[i]);
    if (gap < best) {
      best = gap;
      out.p_star = points[i];
    }
    const double g = values[i] - points[i];
    if (g == 0.0) {
      out.brackets.emplace_back(points[i], points[i]);
    } else if (i + 1 < points.size()) {
      const double g_next = values[i + 1] - points[i + 1];
      if (g * g_next < 0.0) {
        out.brackets.emplace_back(points[i], points[i + 1]);
      }
    }
  }
  out.residual = best;
  out.welfare = map.game().social_welfare(out.p_star);
  out.converged = true;
  return out;
}

EquilibriumResult bisection(const ResponseMap& map, double tol, int max_iter) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  const auto g = [&map](double p) { return map.evaluate(p) - p; };
  EquilibriumResult out;
  out.method = SolverMethod::Bisection;
  const auto finish_exact = [&](double p, long long iters) {
    out.p_star = p;
    out.residual = 0.0;
    out.iterations = iters;
    out.welfare = map.game().social_welfare(p);
    out.converged = true;
    return out;
  };
  double lo = 0.0, hi = 1.0;
  if (g(lo) == 0.0) return finish_exact(lo, 0);
  if (g(hi) == 0.0) return finish_exact(hi, 0);
  long long iterations = 0;
  while (hi - lo > tol) {
    if (iterations >= max_iter) {
      throw MaxIterExceeded("bisection exceeded its iteration budget");
    }
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    ++iterations;
    if (gm == 0.0) {
      out.brackets.emplace_back(lo, hi);
      return finish_exact(mid, iterations);
    }
    if (gm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.p_star = 0.5 * (lo + hi);
  out.residual = std::abs(g(out.p_star));
  out.iterations = iterations;
  out.welfare = map.game().social_welfare(out.p_star);
  out.converged = true;
  out.brackets.emplace_back(lo, hi);
  return out;
}

EquilibriumResult damped_iteration(const ResponseMap& map, double alpha, double tol, int max_iter,
                                   double p0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("tolerance must be positive and max_iter >= 1");
  }
  require_proportion(p0, "p0");
  EquilibriumResult out;
  out.method = SolverMethod::DampedIteration;
  double p = p0;
  double best_p = p0;
  double best_residual = std::numeric_limits<double>::infinity();
  // a step is only taken when it moves p by more than tol, so the reported
  // iteration count is the number of moves, not evaluations
  for (int steps = 0; steps <= max_iter; ++steps) {
    const double s = map.evaluate(p);
    const double residual = std::abs(s - p);
    if (residual < best_residual) {
      best_residual = residual;
      best_p = p;
    }
    const double next = (1.0 - alpha) * p + alpha * s;
    if (std::abs(next - p) <= tol) {
      out.p_star = p;
      out.residual = residual;
      out.iterations = steps;
      out.welfare = map.game().social_welfare(p);
      out.converged = true;
      return out;
    }
    if (steps == max_iter) break;
    p = next;
  }
  out.p_star = best_p;
  out.residual = best_residual;
  out.iterations = max_iter;
  out.welfare = map.game().social_welfare(best_p);
  out.converged = false;
  return out;
}

EquilibriumResult robbins_monro(const ResponseMap& map, const RobbinsMonroConfig& cfg) {
  if (!(cfg.a0 > 0.0) || !(cfg.t0 >= 1.0)) {
    throw std::invalid_argument("step schedule needs a0 > 0 and t0 >= 1");
  }
  if (cfg.iterations < 2) {
    throw std::invalid_argument("need at least 2 iterations for a tail average");
  }
  require_proportion(cfg.p0, "p0");
  RngStream base(cfg.seed);
  double p = cfg.p0;
  const long long tail_start = cfg.iterations / 2;
  std::vector<double> tail;
  tail.reserve(static_cast<std::size_t>(cfg.iterations - tail_start));
  for (long long t = 1; t <= cfg.iterations; ++t) {
    RngStream stream = base.split(static_cast<std::uint64_t>(t));
    const double s = map.sample(p, stream);
    const double a = cfg.a0 / (static_cast<double>(t) + cfg.t0);
    p = clamp01(p + a * (s - p));
    if (t > tail_start) {
      tail.push_back(p);
    }
  }
  double sum = 0.0;
  for (double x : tail) sum += x;
  const double mean = sum / static_cast<double>(tail.size());
  double ss = 0.0;
  for (double x : tail) ss += (x - mean) * (x - mean);
  const double se = tail.size() > 1
                        ? std::sqrt(ss / static_cast<double>(tail.size() - 1) /
                                    static_cast<double>(tail.size()))
                        : 0.0;
  EquilibriumResult out;
  out.method = SolverMethod::RobbinsMonro;
  out.p_star = mean;
  out.residual = std::abs(map.evaluate(mean) - mean);
  out.iterations = cfg.iterations;
  out.ci = std::make_pair(clamp01(mean - 1.96 * se), clamp01(mean + 1.96 * se));
  out.welfare = map.game().social_welfare(mean);
  out.converged = true;
  return out;
}

double fit_fixed_point_from_regression(double intercept, double slope) {
  if (std::abs(1.0 - slope) < 1e-9) {
    throw DegenerateSlope("fitted line is parallel to the identity");
  }
  const double p = intercept / (1.0 - slope);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw OutsideUnitInterval("fitted crossing " + std::to_string(p) + " lies outside [0, 1]");
  }
  return p;
}

EquilibriumReport equilibrium_report(const CongestionGame& game, const EquilibriumResult& result) {
  EquilibriumReport report;
  report.p_star = result.p_star;
  report.welfare_star = game.social_welfare(result.p_star);
  report.p_nash = game.nash_proportion();
  report.welfare_nash = game.social_welfare(report.p_nash);
  const WelfarePoint opt = game.welfare_optimum();
  report.p_optimum = opt.proportion;
  report.welfare_optimum = opt.welfare;
  report.welfare_gain_over_nash = report.welfare_star - report.welfare_nash;
  return report;
}

std::string report_to_json(const EquilibriumReport& report) {
  nlohmann::json j;
  j["p_star"] = report.p_star;
  j["welfare_star"] = report.welfare_star;
  j["p_nash"] = report.p_nash;
  j["welfare_nash"] = report.welfare_nash;
  j["p_optimum"] = report.p_optimum;
  j["welfare_optimum"] = report.welfare_optimum;
  j["welfare_gain_over_nash"] = report.welfare_gain_over_nash;
  return j.dump();
}

std::string result_to_json(const EquilibriumResult& result) {
  nlohmann::json j;
  j["p_star"] = result.p_star;
  j["residual"] = result.residual;
  j["method"] = solver_method_name(result.method);
  j["iterations"] = result.iterations;
  if (result.ci) {
    j["ci"] = {result.ci->first, result.ci->second};
  } else {
    j["ci"] = nullptr;
  }
  j["welfare"] = result.welfare;
  j["converged"] = result.converged;
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& [lo, hi] : result.brackets) {
    brackets.push_back({lo, hi});
  }
  j["brackets"] = std::move(brackets);
  return j.dump();
}

}  // namespace viseq

#include "viseq/behavior.hpp"

#include <cmath>
#include <stdexcept>

#include "viseq/errors.hpp"
#include "viseq/parallel.hpp"
#include "viseq/stats.hpp"

namespace viseq {

namespace {

double step_response(double payoff_diff) {
  if (payoff_diff > 0.0) return 1.0;
  if (payoff_diff < 0.0) return 0.0;
  return 0.5;
}

// prop == nullptr means no display is available (NoInfo).
double eval_model(const AgentModel& model, const CongestionGame& game, const double* prop,
                  bool animated, InformationAccess access) {
  const auto require_display = [&]() -> double {
    if (prop == nullptr) {
      throw SignalRequired(model.name() + " needs a displayed signal");
    }
    return *prop;
  };
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BestResponder>) {
          return step_response(game.payoff_difference(require_display()));
        } else if constexpr (std::is_same_v<T, RandomChooser>) {
          return 0.5;
        } else if constexpr (std::is_same_v<T, PayoffPrior>) {
          require_proportion(m.prior_belief, "prior_belief");
          return step_response(game.payoff_difference(m.prior_belief));
        } else if constexpr (std::is_same_v<T, LogitResponder>) {
          if (!(m.rationality >= 0.0)) {
            throw std::invalid_argument("rationality must be >= 0");
          }
          return logistic(m.rationality * game.payoff_difference(require_display()));
        } else if constexpr (std::is_same_v<T, LevelK>) {
          if (m.level < 0) {
            throw std::invalid_argument("level must be >= 0");
          }
          double q;
          if (m.base) {
            q = eval_model(*m.base, game, prop, animated, access);
          } else if (access == InformationAccess::NoInfo) {
            q = eval_model(AgentModel{PayoffPrior{}}, game, prop, animated, access);
          } else {
            q = eval_model(AgentModel{BestResponder{}}, game, prop, animated, access);
          }
          for (int j = 0; j < m.level; ++j) {
            q = step_response(game.payoff_difference(q));
          }
          return q;
        } else if constexpr (std::is_same_v<T, EmpiricalLogistic>) {
          const double shown = require_display();
          const double diff = game.payoff_difference(shown);
          if (diff == 0.0) return 0.5;
          const bool b_higher = diff < 0.0;
          const bool is_public = access == InformationAccess::Public;
          const EmpiricalCoefficients& c = m.coef;
          const double eta = c.intercept + (animated ? c.hops : 0.0) +
                             (is_public ? c.public_access : 0.0) +
                             (animated && is_public ? c.hops_public_interaction : 0.0) +
                             c.abs_payoff_diff * std::abs(diff) + (b_higher ? c.b_is_higher : 0.0);
          const double p_best = logistic(eta);
          return b_higher ? 1.0 - p_best : p_best;
        } else {
          static_assert(std::is_same_v<T, LLOReporter>);
          throw UnsupportedModel("LLOReporter distorts probability reports; it does not choose");
        }
      },
      model.value);
}

double mixture_response(const PopulationMixture& pop, const CongestionGame& game,
                        const Signal* signal, InformationAccess access) {
  double total = 0.0;
  if (signal != nullptr) {
    const double prop = expected_proportion(*signal);
    const bool animated = signal->frames.has_value();
    for (const auto& [model, weight] : pop.components) {
      total += weight * eval_model(model, game, &prop, animated, access);
    }
  } else {
    for (const auto& [model, weight] : pop.components) {
      total += weight * eval_model(model, game, nullptr, false, access);
    }
  }
  return total;
}

}  // namespace

std::string AgentModel::name() const {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BestResponder>) return "best_responder";
        if constexpr (std::is_same_v<T, RandomChooser>) return "random";
        if constexpr (std::is_same_v<T, PayoffPrior>) return "payoff_prior";
        if constexpr (std::is_same_v<T, LogitResponder>) return "logit";
        if constexpr (std::is_same_v<T, LevelK>) return "level_k";
        if constexpr (std::is_same_v<T, EmpiricalLogistic>) return "empirical_logistic";
        if constexpr (std::is_same_v<T, LLOReporter>) return "llo_reporter";
      },
      value);
}

double choose_prob_a(const AgentModel& model, const CongestionGame& game, const Signal* signal,
                     InformationAccess access) {
  if (access == InformationAccess::NoInfo && signal != nullptr) {
    throw std::invalid_argument("signal must be absent under NoInfo access");
  }
  if (signal == nullptr) {
    return eval_model(model, game, nullptr, false, access);
  }
  const double prop = expected_proportion(*signal);
  return eval_model(model, game, &prop, signal->frames.has_value(), access);
}

double display_response(const AgentModel& model, const CongestionGame& game,
                        Proportion displayed_prop, bool animated, InformationAccess access) {
  require_proportion(displayed_prop, "displayed_prop");
  if (access == InformationAccess::NoInfo) {
    return eval_model(model, game, nullptr, animated, access);
  }
  return eval_model(model, game, &displayed_prop, animated, access);
}

void check_mixture(const PopulationMixture& pop) {
  if (pop.components.empty()) {
    throw InvalidMixture("population mixture is empty");
  }
  double sum = 0.0;
  for (const auto& [model, weight] : pop.components) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw InvalidMixture("mixture weights must be nonnegative");
    }
    sum += weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidMixture("mixture weights must sum to 1");
  }
}

PopulationMixture normalized_mixture(std::vector<std::pair<AgentModel, double>> components) {
  if (components.empty()) {
    throw InvalidMixture("population mixture is empty");
  }
  double sum = 0.0;
  for (const auto& [model, weight] : components) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw InvalidMixture("mixture weights must be nonnegative");
    }
    sum += weight;
  }
  if (sum <= 0.0) {
    throw InvalidMixture("mixture weights must not all be zero");
  }
  for (auto& [model, weight] : components) {
    weight /= sum;
  }
  return PopulationMixture{std::move(components)};
}

AggregateResponse aggregate_response(const PopulationMixture& pop, const CongestionGame& game,
                                     const SignalScheme& scheme, Proportion p_hat,
                                     InformationAccess access, const MonteCarloConfig& mc) {
  check_mixture(pop);
  require_proportion(p_hat, "p_hat");
  if (mc.draws < 1) {
    throw std::invalid_argument("Monte Carlo draws must be >= 1");
  }
  if (access == InformationAccess::NoInfo) {
    return AggregateResponse{mixture_response(pop, game, nullptr, access), 0.0};
  }
  if (scheme.variant == SignalScheme::Variant::Exact) {
    RngStream rng(mc.seed);
    const Signal signal = render(scheme, p_hat, rng);
    return AggregateResponse{mixture_response(pop, game, &signal, access), 0.0};
  }
  const std::size_t draws = static_cast<std::size_t>(mc.draws);
  std::vector<double> responses(draws);
  RngStream base(mc.seed);
  parallel_for(draws, mc.threads, [&](std::size_t i) {
    RngStream stream = base.split(static_cast<std::uint64_t>(i));
    const Signal signal = render(scheme, p_hat, stream);
    responses[i] = mixture_response(pop, game, &signal, access);
  });
  double sum = 0.0;
  for (double r : responses) sum += r;
  const double mean = sum / static_cast<double>(draws);
  double ss = 0.0;
  for (double r : responses) ss += (r - mean) * (r - mean);
  const double se =
      draws > 1 ? std::sqrt(ss / static_cast<double>(draws - 1) / static_cast<double>(draws)) : 0.0;
  return AggregateResponse{mean, se};
}

double llo_weight(double p, double gamma, double delta) {
  require_proportion(p, "p");
  if (!(gamma > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("llo_weight needs gamma > 0 and delta > 0");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double num = delta * std::pow(p, gamma);
  return num / (num + std::pow(1.0 - p, gamma));
}

PopulationMixture default_population(InformationAccess access, VisType vis_type) {
  if (access == InformationAccess::NoInfo) {
    auto prior = std::make_shared<const AgentModel>(AgentModel{PayoffPrior{}});
    return normalized_mixture({{AgentModel{PayoffPrior{}}, 0.61},
                               {AgentModel{LevelK{1, prior}}, 0.28},
                               {AgentModel{RandomChooser{}}, 0.11}});
  }
  if (vis_type == VisType::Bar) {
    return normalized_mixture({{AgentModel{BestResponder{}}, 0.42},
                               {AgentModel{LevelK{1, nullptr}}, 0.32},
                               {AgentModel{PayoffPrior{}}, 0.15},
                               {AgentModel{RandomChooser{}}, 0.09}});
  }
  return normalized_mixture({{AgentModel{BestResponder{}}, 0.53},
                             {AgentModel{LevelK{1, nullptr}}, 0.24},
                             {AgentModel{PayoffPrior{}}, 0.15},
                             {AgentModel{RandomChooser{}}, 0.06}});
}

}  // namespace viseq

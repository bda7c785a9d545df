#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "viseq/game.hpp"
#include "viseq/signal.hpp"

namespace viseq {

enum class InformationAccess { NoInfo, Private, Public };

struct AgentModel;

struct BestResponder {};

struct RandomChooser {};

struct PayoffPrior {
  Proportion prior_belief = 0.5;
};

struct LogitResponder {
  double rationality = 1.0;  // log-odds per payoff point; must be >= 0
};

// Best responds assuming the whole population plays level-(k-1); a null base
// resolves to PayoffPrior under NoInfo access and BestResponder otherwise.
struct LevelK {
  int level = 1;
  std::shared_ptr<const AgentModel> base;
};

// Log-odds units throughout; defaults are the fitted response model for the
// probability of choosing the displayed higher-payoff location.
struct EmpiricalCoefficients {
  double intercept = 0.41;
  double hops = -0.33;
  double public_access = -0.41;
  double hops_public_interaction = 0.12;
  double abs_payoff_diff = 0.02;  // per payoff point
  double b_is_higher = 0.76;
  double block_order = 0.0;       // value unreported upstream; private-first = 1
};

struct EmpiricalLogistic {
  EmpiricalCoefficients coef{};
};

// Distorts probability reports only; it never picks a location.
struct LLOReporter {
  double gamma = 0.6;
  double delta = 1.0;
};

struct AgentModel {
  std::variant<BestResponder, RandomChooser, PayoffPrior, LogitResponder, LevelK,
               EmpiricalLogistic, LLOReporter>
      value;
  std::string name() const;
};

// Probability of choosing location A given what the signal displays; signal
// may be null only under NoInfo access (signal-reading models then throw
// SignalRequired).
double choose_prob_a(const AgentModel& model, const CongestionGame& game, const Signal* signal,
                     InformationAccess access);

// Same response rule evaluated at a continuous displayed proportion with the
// animated/static distinction passed explicitly; this is the deterministic
// map the solvers iterate on, free of display rounding and frame noise.
double display_response(const AgentModel& model, const CongestionGame& game,
                        Proportion displayed_prop, bool animated, InformationAccess access);

struct PopulationMixture {
  std::vector<std::pair<AgentModel, double>> components;
};

// Validates weights (nonnegative, summing to 1 within 1e-9); throws InvalidMixture.
void check_mixture(const PopulationMixture& pop);

// Rescales nonnegative weights to sum to exactly 1.
PopulationMixture normalized_mixture(std::vector<std::pair<AgentModel, double>> components);

struct MonteCarloConfig {
  int draws = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct AggregateResponse {
  double mean = 0.0;
  double std_error = 0.0;
};

// Weighted population response to a rendered display. Exact schemes (and
// NoInfo access) evaluate in closed form with zero standard error; sampled
// schemes average over mc.draws independently rendered signals.
// Deterministic given mc.seed, independent of mc.threads.
AggregateResponse aggregate_response(const PopulationMixture& pop, const CongestionGame& game,
                                     const SignalScheme& scheme, Proportion p_hat,
                                     InformationAccess access, const MonteCarloConfig& mc);

// Linear-in-log-odds transform: logit of output = gamma * logit(p) + ln(delta);
// endpoints map to themselves.
double llo_weight(double p, double gamma, double delta);

// Mixtures with weights taken from coded strategy frequencies in the public
// setting; rows that do not sum to 1 are renormalized.
PopulationMixture default_population(InformationAccess access, VisType vis_type);

}  // namespace viseq

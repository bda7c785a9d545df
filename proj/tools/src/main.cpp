#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "viseq/behavior.hpp"
#include "viseq/errors.hpp"
#include "viseq/game.hpp"
#include "viseq/pipeline.hpp"
#include "viseq/signal.hpp"
#include "viseq/solver.hpp"
#include "viseq/stats.hpp"
#include "viseq/textio.hpp"

namespace {

using nlohmann::json;
using namespace viseq;

struct SolverSettings {
  SolverMethod method = SolverMethod::Bisection;
  double tol = 1e-6;
  double resolution = 1e-4;
  double alpha = 0.5;
  int max_iter = 0;  // 0 = the method's own default
  double p0 = 0.5;
  double rm_a0 = 1.0;
  double rm_t0 = 10.0;
  long long rm_iterations = 100000;
  double residual_tolerance = 1e-3;
};

PopulationSpec default_cli_populations() {
  PopulationSpec spec;
  spec.no_info = default_population(InformationAccess::NoInfo, VisType::Bar);
  spec.bar = normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}});
  spec.hops = normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}});
  return spec;
}

struct CliConfig {
  CongestionGame game{};
  InformationAccess access = InformationAccess::Public;
  VisType vis_type = VisType::Bar;
  std::optional<SignalScheme> scheme;  // solve-only override for vis_type's scheme
  SchemeSpec schemes{};
  PopulationSpec populations = default_cli_populations();
  SolverSettings solver{};
  ExperimentConfig experiment{};
  BootstrapConfig bootstrap{};
};

struct GlobalArgs {
  std::string config_path;
  bool config_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  int threads = 1;
};

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + it.key() + "' in " + context);
    }
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) {
    throw ConfigError("'" + std::string(key) + "' in " + context + " must be a number");
  }
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) {
    throw ConfigError("'" + std::string(key) + "' in " + context + " must be an integer");
  }
  return obj.at(key).get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) {
    throw ConfigError("'" + std::string(key) + "' in " + context + " must be a string");
  }
  return obj.at(key).get<std::string>();
}

AgentModel parse_model(const json& spec, const std::string& context) {
  if (!spec.is_object()) {
    throw ConfigError("each entry in " + context + " must be an object");
  }
  require_keys(spec, {"model", "weight", "params"}, context);
  const std::string name = get_string(spec, "model", "", context);
  if (name.empty()) {
    throw ConfigError("'model' is required in " + context);
  }
  const json params = spec.contains("params") ? spec.at("params") : json::object();
  if (!params.is_object()) {
    throw ConfigError("'params' in " + context + " must be an object");
  }
  const std::string pctx = context + " params";
  if (name == "best_responder") {
    require_keys(params, {}, pctx);
    return AgentModel{BestResponder{}};
  }
  if (name == "random") {
    require_keys(params, {}, pctx);
    return AgentModel{RandomChooser{}};
  }
  if (name == "payoff_prior") {
    require_keys(params, {"prior_belief"}, pctx);
    PayoffPrior model;
    model.prior_belief = get_number(params, "prior_belief", model.prior_belief, pctx);
    require_proportion(model.prior_belief, "prior_belief");
    return AgentModel{model};
  }
  if (name == "logit") {
    require_keys(params, {"rationality"}, pctx);
    LogitResponder model;
    model.rationality = get_number(params, "rationality", model.rationality, pctx);
    if (model.rationality < 0.0) {
      throw ConfigError("'rationality' in " + pctx + " must be >= 0");
    }
    return AgentModel{model};
  }
  if (name == "level_k") {
    require_keys(params, {"level"}, pctx);
    LevelK model;
    model.level = get_int(params, "level", model.level, pctx);
    if (model.level < 1) {
      throw ConfigError("'level' in " + pctx + " must be >= 1");
    }
    return AgentModel{model};
  }
  if (name == "empirical_logistic") {
    require_keys(params,
                 {"intercept", "hops", "public_access", "hops_public_interaction",
                  "abs_payoff_diff", "b_is_higher", "block_order"},
                 pctx);
    EmpiricalCoefficients coef;
    coef.intercept = get_number(params, "intercept", coef.intercept, pctx);
    coef.hops = get_number(params, "hops", coef.hops, pctx);
    coef.public_access = get_number(params, "public_access", coef.public_access, pctx);
    coef.hops_public_interaction =
        get_number(params, "hops_public_interaction", coef.hops_public_interaction, pctx);
    coef.abs_payoff_diff = get_number(params, "abs_payoff_diff", coef.abs_payoff_diff, pctx);
    coef.b_is_higher = get_number(params, "b_is_higher", coef.b_is_higher, pctx);
    coef.block_order = get_number(params, "block_order", coef.block_order, pctx);
    return AgentModel{EmpiricalLogistic{coef}};
  }
  if (name == "llo_reporter") {
    require_keys(params, {"gamma", "delta"}, pctx);
    LLOReporter model;
    model.gamma = get_number(params, "gamma", model.gamma, pctx);
    model.delta = get_number(params, "delta", model.delta, pctx);
    return AgentModel{model};
  }
  throw ConfigError("unknown model '" + name + "' in " + context);
}

PopulationMixture parse_mixture(const json& arr, const std::string& context) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(context + " must be a nonempty array of model entries");
  }
  std::vector<std::pair<AgentModel, double>> components;
  components.reserve(arr.size());
  for (const json& spec : arr) {
    const double weight = get_number(spec, "weight", 1.0, context);
    if (weight < 0.0) {
      throw ConfigError("'weight' in " + context + " must be >= 0");
    }
    components.emplace_back(parse_model(spec, context), weight);
  }
  return normalized_mixture(std::move(components));
}

SignalScheme parse_scheme(const json& obj, const std::string& context) {
  if (!obj.is_object()) {
    throw ConfigError(context + " must be an object");
  }
  require_keys(obj, {"kind", "sample_size", "frame_count"}, context);
  SignalScheme scheme;
  const std::string kind = get_string(obj, "kind", "exact", context);
  if (kind == "exact") {
    scheme.variant = SignalScheme::Variant::Exact;
  } else if (kind == "binomial_sample") {
    scheme.variant = SignalScheme::Variant::BinomialSample;
  } else if (kind == "frame_sequence") {
    scheme.variant = SignalScheme::Variant::FrameSequence;
  } else {
    throw ConfigError("unknown scheme kind '" + kind + "' in " + context);
  }
  scheme.sample_size = get_int(obj, "sample_size", scheme.sample_size, context);
  scheme.frame_count = get_int(obj, "frame_count", scheme.frame_count, context);
  if (scheme.sample_size < 1 || scheme.frame_count < 1) {
    throw ConfigError("scheme sample_size and frame_count must be >= 1 in " + context);
  }
  return scheme;
}

SolverMethod method_from_token(const std::string& token) {
  for (SolverMethod method :
       {SolverMethod::GridScan, SolverMethod::Bisection, SolverMethod::DampedIteration,
        SolverMethod::RobbinsMonro, SolverMethod::RegressionFixedPoint}) {
    if (token == solver_method_name(method)) return method;
  }
  throw ConfigError("unknown solver method '" + token + "'");
}

CliConfig load_config(const GlobalArgs& g) {
  CliConfig cfg;
  if (!g.config_set) return cfg;

  std::ifstream in(g.config_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config '" + g.config_path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json root;
  try {
    root = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be an object");
  }
  require_keys(root,
               {"game", "access", "vis_type", "scheme", "schemes", "population", "solver",
                "experiment", "bootstrap"},
               "config");

  if (root.contains("game")) {
    cfg.game = game_from_json(root.at("game").dump());
  }
  if (root.contains("access")) {
    const InformationAccess access = access_from_token(get_string(root, "access", "", "config"));
    if (access == InformationAccess::NoInfo) {
      throw ConfigError("'access' must be private or public");
    }
    cfg.access = access;
  }
  if (root.contains("vis_type")) {
    cfg.vis_type = vis_type_from_token(get_string(root, "vis_type", "", "config"));
  }
  if (root.contains("scheme")) {
    cfg.scheme = parse_scheme(root.at("scheme"), "scheme");
  }
  if (root.contains("schemes")) {
    const json& schemes = root.at("schemes");
    require_keys(schemes, {"bar", "hops"}, "schemes");
    if (schemes.contains("bar")) cfg.schemes.bar = parse_scheme(schemes.at("bar"), "schemes.bar");
    if (schemes.contains("hops")) {
      cfg.schemes.hops = parse_scheme(schemes.at("hops"), "schemes.hops");
    }
  }
  if (root.contains("population")) {
    const json& pop = root.at("population");
    if (pop.is_array()) {
      cfg.populations.bar = parse_mixture(pop, "population");
      cfg.populations.hops = cfg.populations.bar;
    } else if (pop.is_object()) {
      require_keys(pop, {"no_info", "bar", "hops"}, "population");
      if (pop.contains("no_info")) {
        cfg.populations.no_info = parse_mixture(pop.at("no_info"), "population.no_info");
      }
      if (pop.contains("bar")) {
        cfg.populations.bar = parse_mixture(pop.at("bar"), "population.bar");
      }
      if (pop.contains("hops")) {
        cfg.populations.hops = parse_mixture(pop.at("hops"), "population.hops");
      }
    } else {
      throw ConfigError("'population' must be an array or a per-condition object");
    }
  }
  if (root.contains("solver")) {
    const json& solver = root.at("solver");
    require_keys(solver,
                 {"method", "tol", "resolution", "alpha", "max_iter", "p0", "rm_a0", "rm_t0",
                  "rm_iterations", "residual_tolerance"},
                 "solver");
    cfg.solver.method = method_from_token(
        get_string(solver, "method", solver_method_name(cfg.solver.method), "solver"));
    cfg.solver.tol = get_number(solver, "tol", cfg.solver.tol, "solver");
    cfg.solver.resolution = get_number(solver, "resolution", cfg.solver.resolution, "solver");
    cfg.solver.alpha = get_number(solver, "alpha", cfg.solver.alpha, "solver");
    cfg.solver.max_iter = get_int(solver, "max_iter", cfg.solver.max_iter, "solver");
    cfg.solver.p0 = get_number(solver, "p0", cfg.solver.p0, "solver");
    cfg.solver.rm_a0 = get_number(solver, "rm_a0", cfg.solver.rm_a0, "solver");
    cfg.solver.rm_t0 = get_number(solver, "rm_t0", cfg.solver.rm_t0, "solver");
    if (solver.contains("rm_iterations")) {
      if (!solver.at("rm_iterations").is_number_integer()) {
        throw ConfigError("'rm_iterations' in solver must be an integer");
      }
      cfg.solver.rm_iterations = solver.at("rm_iterations").get<long long>();
    }
    cfg.solver.residual_tolerance =
        get_number(solver, "residual_tolerance", cfg.solver.residual_tolerance, "solver");
  }
  if (root.contains("experiment")) {
    const json& experiment = root.at("experiment");
    require_keys(experiment,
                 {"participants", "group_size", "signals", "vis_types", "block_orders",
                  "llo_gamma", "llo_delta"},
                 "experiment");
    cfg.experiment.participants =
        get_int(experiment, "participants", cfg.experiment.participants, "experiment");
    cfg.experiment.group_size =
        get_int(experiment, "group_size", cfg.experiment.group_size, "experiment");
    if (experiment.contains("signals")) {
      if (!experiment.at("signals").is_array()) {
        throw ConfigError("'signals' in experiment must be an array of numbers");
      }
      cfg.experiment.signals.clear();
      for (const json& value : experiment.at("signals")) {
        if (!value.is_number()) {
          throw ConfigError("'signals' in experiment must be an array of numbers");
        }
        cfg.experiment.signals.push_back(value.get<double>());
      }
    }
    if (experiment.contains("vis_types")) {
      if (!experiment.at("vis_types").is_array()) {
        throw ConfigError("'vis_types' in experiment must be an array of strings");
      }
      cfg.experiment.vis_types.clear();
      for (const json& value : experiment.at("vis_types")) {
        cfg.experiment.vis_types.push_back(vis_type_from_token(value.get<std::string>()));
      }
    }
    if (experiment.contains("block_orders")) {
      if (!experiment.at("block_orders").is_array()) {
        throw ConfigError("'block_orders' in experiment must be an array of strings");
      }
      cfg.experiment.block_orders.clear();
      for (const json& value : experiment.at("block_orders")) {
        cfg.experiment.block_orders.push_back(block_order_from_token(value.get<std::string>()));
      }
    }
    cfg.experiment.report_gamma =
        get_number(experiment, "llo_gamma", cfg.experiment.report_gamma, "experiment");
    cfg.experiment.report_delta =
        get_number(experiment, "llo_delta", cfg.experiment.report_delta, "experiment");
  }
  if (root.contains("bootstrap")) {
    const json& bootstrap = root.at("bootstrap");
    require_keys(bootstrap, {"group_size", "replications", "coverage"}, "bootstrap");
    cfg.bootstrap.group_size =
        get_int(bootstrap, "group_size", cfg.bootstrap.group_size, "bootstrap");
    cfg.bootstrap.replications =
        get_int(bootstrap, "replications", cfg.bootstrap.replications, "bootstrap");
    cfg.bootstrap.coverage = get_number(bootstrap, "coverage", cfg.bootstrap.coverage, "bootstrap");
  }
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

int cmd_game(const CliConfig& cfg, const GlobalArgs& g) {
  const double nash = cfg.game.nash_proportion();
  const WelfarePoint optimum = cfg.game.welfare_optimum();
  std::cout << "nash_proportion " << format_double(nash) << "\n";
  std::cout << "welfare_optimum " << format_double(optimum.proportion) << " (social welfare "
            << format_double(optimum.welfare) << ")\n\n";
  std::cout << "p,social_welfare\n";
  json curve = json::array();
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    const double sw = cfg.game.social_welfare(p);
    std::cout << format_double(p) << ',' << format_double(sw) << "\n";
    curve.push_back({p, sw});
  }
  json out;
  out["game"] = json::parse(game_to_json(cfg.game));
  out["nash_proportion"] = nash;
  out["welfare_optimum"] = {{"p", optimum.proportion}, {"welfare", optimum.welfare}};
  out["welfare_curve"] = std::move(curve);
  write_file(std::filesystem::path(g.out_dir) / "game.json", out.dump(2) + "\n");
  return 0;
}

int cmd_truth(const CliConfig& cfg, const GlobalArgs&) {
  const int n = cfg.experiment.group_size;
  std::cout << "signal,a_wins,b_wins\n";
  for (double signal : cfg.experiment.signals) {
    const double a = ground_truth_prob(cfg.game, Location::A, signal, n);
    const double b = ground_truth_prob(cfg.game, Location::B, signal, n);
    std::cout << format_double(signal) << ',' << format_double(a) << ',' << format_double(b)
              << "\n";
  }
  return 0;
}

int cmd_solve(const CliConfig& cfg, const GlobalArgs& g, const std::string& method_flag) {
  SolverSettings settings = cfg.solver;
  if (!method_flag.empty()) {
    settings.method = method_from_token(method_flag);
  }
  const PopulationMixture& pop =
      cfg.vis_type == VisType::Bar ? cfg.populations.bar : cfg.populations.hops;
  const SignalScheme scheme =
      cfg.scheme ? *cfg.scheme
                 : (cfg.vis_type == VisType::Bar ? cfg.schemes.bar : cfg.schemes.hops);
  const ResponseMap map = ResponseMap::from_population(pop, cfg.game, scheme, cfg.access);

  EquilibriumResult result;
  switch (settings.method) {
    case SolverMethod::GridScan:
      result = grid_scan(map, settings.resolution, g.threads);
      break;
    case SolverMethod::Bisection:
      result = bisection(map, settings.tol, settings.max_iter > 0 ? settings.max_iter : 200);
      break;
    case SolverMethod::DampedIteration:
      result = damped_iteration(map, settings.alpha, settings.tol,
                                settings.max_iter > 0 ? settings.max_iter : 1000, settings.p0);
      break;
    case SolverMethod::RobbinsMonro: {
      if (!g.seed_set) {
        throw ConfigError("solver method robbins_monro requires an explicit --seed");
      }
      RobbinsMonroConfig rm;
      rm.a0 = settings.rm_a0;
      rm.t0 = settings.rm_t0;
      rm.iterations = settings.rm_iterations;
      rm.seed = g.seed;
      rm.p0 = settings.p0;
      result = robbins_monro(map, rm);
      break;
    }
    case SolverMethod::RegressionFixedPoint:
      throw ConfigError("solver method regression_fixed_point comes from analyze, not solve");
  }

  const EquilibriumReport report = equilibrium_report(cfg.game, result);
  json out;
  out["result"] = json::parse(result_to_json(result));
  out["report"] = json::parse(report_to_json(report));
  write_file(std::filesystem::path(g.out_dir) / "solve.json", out.dump(2) + "\n");

  std::cout << "method " << solver_method_name(result.method) << "\n";
  std::cout << "p_star " << format_double(result.p_star) << "\n";
  if (result.ci) {
    std::cout << "ci [" << format_double(result.ci->first) << ", "
              << format_double(result.ci->second) << "]\n";
  }
  std::cout << "residual " << format_double(result.residual) << "\n";
  std::cout << "welfare " << format_double(result.welfare) << "\n";
  if (!result.converged || result.residual > settings.residual_tolerance) {
    std::cerr << "error: solver did not reach residual tolerance "
              << format_double(settings.residual_tolerance) << " (residual "
              << format_double(result.residual) << ")\n";
    return 3;
  }
  return 0;
}

int cmd_simulate(const CliConfig& cfg, const GlobalArgs& g, int participants_flag) {
  if (!g.seed_set) {
    throw ConfigError("simulate requires an explicit --seed");
  }
  ExperimentConfig experiment = cfg.experiment;
  if (participants_flag > 0) experiment.participants = participants_flag;
  experiment.seed = g.seed;
  experiment.threads = g.threads;

  std::vector<std::string> warnings;
  const std::vector<TrialRecord> records =
      simulate_experiment(experiment, cfg.populations, cfg.game, cfg.schemes, &warnings);
  for (const std::string& warning : warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  const std::filesystem::path path = std::filesystem::path(g.out_dir) / "records.csv";
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
    }
  }
  write_records_csv(records, path.string());
  std::cout << "wrote " << path.string() << " (" << records.size() << " records)\n";
  return 0;
}

void print_fit(const char* label, const std::optional<RegressionFit>& fit) {
  if (!fit) {
    std::cout << label << ": not fit\n";
    return;
  }
  std::cout << label << " coefficients (n=" << fit->n_obs << "):\n";
  for (std::size_t i = 0; i < fit->names.size(); ++i) {
    std::cout << "  " << fit->names[i] << " " << format_double(fit->coefficients[i]) << " (se "
              << format_double(fit->standard_errors[i]) << ")\n";
  }
  for (const std::string& dropped : fit->dropped) {
    std::cout << "  [dropped constant column " << dropped << "]\n";
  }
}

void print_equilibrium(const char* label, const std::optional<EquilibriumResult>& result) {
  if (!result) return;
  std::cout << label << " equilibrium " << format_double(result->p_star);
  if (result->ci) {
    std::cout << " [" << format_double(result->ci->first) << ", "
              << format_double(result->ci->second) << "]";
  }
  std::cout << " welfare " << format_double(result->welfare) << "\n";
}

int run_analysis(const CliConfig& cfg, const GlobalArgs& g, const std::string& data_path,
                 bool verbose) {
  if (!g.seed_set) {
    throw ConfigError("analysis requires an explicit --seed");
  }
  const std::vector<TrialRecord> records = ingest_csv(data_path);

  AnalysisOptions options;
  options.bootstrap = cfg.bootstrap;
  options.bootstrap.seed = g.seed;
  options.group_size = cfg.experiment.group_size;
  options.threads = g.threads;

  const AnalysisBundle bundle = analyze_records(records, cfg.game, options);
  export_plot_data(bundle, g.out_dir);

  if (verbose) {
    std::cout << "cells (vis,access,signal -> proportion at A):\n";
    for (const CellSummary& cell : bundle.cells) {
      std::cout << "  " << to_token(cell.vis_type) << ',' << to_token(cell.access) << ','
                << (cell.signal_prop ? format_double(*cell.signal_prop) : std::string("-")) << " "
                << format_double(cell.proportion_a) << " [" << format_double(cell.lower) << ", "
                << format_double(cell.upper) << "] n=" << cell.n << "\n";
    }
    print_fit("eq3", bundle.eq3);
    print_fit("eq4", bundle.eq4);
    print_fit("eq5", bundle.eq5);
    std::cout << "note: eq4 and eq5 are fixed-effects fits; repeated trials per participant "
                 "are not modeled with random intercepts, so their standard errors ignore "
                 "within-participant clustering.\n";
    print_equilibrium("bar", bundle.bar_equilibrium);
    print_equilibrium("hops", bundle.hops_equilibrium);
  }
  for (const std::string& warning : bundle.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  std::cout << "wrote " << (std::filesystem::path(g.out_dir) / "analysis.json").string() << ", "
            << (std::filesystem::path(g.out_dir) / "cells.csv").string() << ", "
            << (std::filesystem::path(g.out_dir) / "coefficients.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-location congestion games under shared forecast displays"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalArgs g;
  auto* config_opt = app.add_option("--config", g.config_path, "JSON configuration file");
  auto* seed_opt =
      app.add_option("--seed", g.seed, "RNG seed (required for any stochastic command)");
  app.add_option("--out-dir", g.out_dir, "directory for file outputs")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();

  CLI::App* c_game =
      app.add_subcommand("game", "print the Nash point, welfare optimum, and welfare curve");
  CLI::App* c_solve = app.add_subcommand("solve", "solve the display response map's fixed point");
  std::string method_flag;
  c_solve->add_option("--method", method_flag,
                      "grid_scan | bisection | damped_iteration | robbins_monro");
  CLI::App* c_simulate = app.add_subcommand("simulate", "generate a synthetic experiment CSV");
  int participants_flag = 0;
  c_simulate->add_option("--participants", participants_flag, "override experiment.participants");
  CLI::App* c_analyze = app.add_subcommand(
      "analyze", "cell summaries, response fits, and equilibrium estimates from a records CSV");
  std::string analyze_data;
  c_analyze->add_option("--data", analyze_data, "records CSV path")->required();
  CLI::App* c_truth =
      app.add_subcommand("truth", "ground-truth win probabilities for each signal");
  CLI::App* c_plots =
      app.add_subcommand("export-plots", "write plot-data files from a records CSV");
  std::string plots_data;
  c_plots->add_option("--data", plots_data, "records CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  g.config_set = config_opt->count() > 0;
  g.seed_set = seed_opt->count() > 0;

  try {
    const CliConfig cfg = load_config(g);
    if (c_game->parsed()) return cmd_game(cfg, g);
    if (c_solve->parsed()) return cmd_solve(cfg, g, method_flag);
    if (c_simulate->parsed()) return cmd_simulate(cfg, g, participants_flag);
    if (c_analyze->parsed()) return run_analysis(cfg, g, analyze_data, true);
    if (c_truth->parsed()) return cmd_truth(cfg, g);
    if (c_plots->parsed()) return run_analysis(cfg, g, plots_data, false);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const MaxIterExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Separation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const RankDeficient& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const DegenerateSlope& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const OutsideUnitInterval& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#include "viseq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"
#include "viseq/parallel.hpp"
#include "viseq/textio.hpp"

namespace viseq {

namespace {

constexpr std::uint64_t kChoiceDomain = 1;
constexpr std::uint64_t kPrivatePayoffDomain = 2;
constexpr std::uint64_t kPublicPayoffDomain = 3;

const AgentModel& pick_model(const PopulationMixture& pop, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [model, weight] : pop.components) {
    acc += weight;
    if (u < acc) return model;
  }
  return pop.components.back().first;
}

}  // namespace

std::string to_token(BlockOrder order) {
  return order == BlockOrder::PublicFirst ? "public_first" : "private_first";
}

BlockOrder block_order_from_token(const std::string& token) {
  if (token == "public_first") return BlockOrder::PublicFirst;
  if (token == "private_first") return BlockOrder::PrivateFirst;
  throw ParseError("unknown block_order '" + token + "' (expected public_first|private_first)");
}

int best_responded(const CongestionGame& game, const TrialRecord& record) {
  if (!record.signal_prop) {
    throw MissingSignal("no-information trials have no displayed higher-payoff location");
  }
  const double diff = game.payoff_difference(*record.signal_prop);
  if (diff == 0.0) return 1;
  const Location best = diff > 0.0 ? Location::A : Location::B;
  return record.choice == best ? 1 : 0;
}

PopulationSpec default_population_spec() {
  return PopulationSpec{default_population(InformationAccess::NoInfo, VisType::Bar),
                        default_population(InformationAccess::Public, VisType::Bar),
                        default_population(InformationAccess::Public, VisType::Hops)};
}

std::vector<TrialRecord> simulate_experiment(const ExperimentConfig& cfg,
                                             const PopulationSpec& populations,
                                             const CongestionGame& game, const SchemeSpec& schemes,
                                             std::vector<std::string>* warnings) {
  if (cfg.participants < 1) {
    throw ConfigError("participants must be >= 1");
  }
  if (cfg.group_size < 1) {
    throw ConfigError("group_size must be >= 1");
  }
  if (cfg.participants < cfg.group_size) {
    throw ConfigError("participants must be >= group_size");
  }
  if (cfg.signals.empty()) {
    throw ConfigError("at least one signal proportion is required");
  }
  for (double s : cfg.signals) {
    require_proportion(s, "signal");
  }
  if (cfg.vis_types.empty() || cfg.block_orders.empty()) {
    throw ConfigError("vis_types and block_orders must be nonempty");
  }
  if (!(cfg.report_gamma > 0.0) || !(cfg.report_delta > 0.0)) {
    throw ConfigError("report_gamma and report_delta must be positive");
  }
  check_mixture(populations.no_info);
  check_mixture(populations.bar);
  check_mixture(populations.hops);

  const std::size_t orders = cfg.block_orders.size();
  const std::size_t combos = cfg.vis_types.size() * orders;
  const std::size_t trials_per_participant = 2 * (1 + cfg.signals.size());
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.participants) *
                                   trials_per_participant);

  parallel_for(static_cast<std::size_t>(cfg.participants), cfg.threads, [&](std::size_t pid) {
    RngStream rng = RngStream(cfg.seed).split(kChoiceDomain).split(pid);
    const std::size_t combo = pid % combos;
    const VisType vis = cfg.vis_types[combo / orders];
    const BlockOrder order = cfg.block_orders[combo % orders];
    const PopulationMixture& signal_pop = vis == VisType::Bar ? populations.bar : populations.hops;
    const SignalScheme& scheme = vis == VisType::Bar ? schemes.bar : schemes.hops;
    const AgentModel signal_model = pick_model(signal_pop, rng);
    const AgentModel no_info_model = pick_model(populations.no_info, rng);

    int trial_index = 0;
    const auto base_record = [&](InformationAccess access) {
      TrialRecord rec;
      rec.participant_id = static_cast<int>(pid);
      rec.vis_type = vis;
      rec.access = access;
      rec.block_order = order;
      rec.trial_index = ++trial_index;
      return rec;
    };
    for (int block = 0; block < 2; ++block) {
      const bool public_block = (order == BlockOrder::PublicFirst) == (block == 0);
      const InformationAccess access =
          public_block ? InformationAccess::Public : InformationAccess::Private;

      TrialRecord no_info = base_record(access);
      const double p_no_info =
          choose_prob_a(no_info_model, game, nullptr, InformationAccess::NoInfo);
      no_info.choice = rng.bernoulli(p_no_info) ? Location::A : Location::B;
      no_info.prob_estimate = 50.0;
      no_info.strategy_text = no_info_model.name();
      records[pid * trials_per_participant + static_cast<std::size_t>(trial_index - 1)] = no_info;

      std::vector<double> block_signals = cfg.signals;
      rng.shuffle(block_signals);
      for (double assigned : block_signals) {
        TrialRecord rec = base_record(access);
        rec.signal_prop = assigned;
        const Signal signal = render(scheme, assigned, rng);
        const double p_choose = choose_prob_a(signal_model, game, &signal, access);
        rec.choice = rng.bernoulli(p_choose) ? Location::A : Location::B;
        const double shown = expected_proportion(signal);
        const double truth = ground_truth_prob(game, rec.choice, shown, cfg.group_size);
        rec.prob_estimate = 100.0 * llo_weight(truth, cfg.report_gamma, cfg.report_delta);
        rec.strategy_text = signal_model.name();
        if (access == InformationAccess::Private) {
          RngStream payoff_rng =
              RngStream(cfg.seed).split(kPrivatePayoffDomain).split(pid).split(
                  static_cast<std::uint64_t>(rec.trial_index));
          rec.payoff = compute_private_payoff(game, rec, cfg.group_size, payoff_rng);
        }
        records[pid * trials_per_participant + static_cast<std::size_t>(trial_index - 1)] = rec;
      }
    }
  });

  // Public payoffs need whole condition cells, so they run after all choices
  // exist. Cell key: (vis, signal slot), slot 0 = no-information.
  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrialRecord& rec = records[i];
    if (rec.access != InformationAccess::Public) continue;
    int slot = 0;
    if (rec.signal_prop) {
      for (std::size_t j = 0; j < cfg.signals.size(); ++j) {
        if (cfg.signals[j] == *rec.signal_prop) {
          slot = static_cast<int>(j) + 1;
          break;
        }
      }
    }
    cells[{static_cast<int>(rec.vis_type), slot}].push_back(i);
  }
  for (const auto& [key, indices] : cells) {
    if (indices.size() < static_cast<std::size_t>(cfg.group_size)) {
      if (warnings) {
        warnings->push_back("public cell (" + to_token(static_cast<VisType>(key.first)) +
                            ", slot " + std::to_string(key.second) + ") has only " +
                            std::to_string(indices.size()) + " records; payoffs left empty");
      }
      continue;
    }
    std::vector<TrialRecord> cell;
    cell.reserve(indices.size());
    for (std::size_t i : indices) cell.push_back(records[i]);
    RngStream rng = RngStream(cfg.seed)
                        .split(kPublicPayoffDomain)
                        .split(static_cast<std::uint64_t>(key.first))
                        .split(static_cast<std::uint64_t>(key.second));
    compute_public_payoffs(game, cell, cfg.group_size, rng);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      records[indices[k]].payoff = cell[k].payoff;
    }
  }
  return records;
}

double compute_private_payoff(const CongestionGame& game, const TrialRecord& record, int n,
                              RngStream& rng) {
  if (n < 1) {
    throw std::invalid_argument("group size must be >= 1");
  }
  if (!record.signal_prop) {
    throw MissingSignal("private payoff needs a signal proportion");
  }
  const double p_hat = require_proportion(*record.signal_prop, "signal_prop");
  const int k = rng.binomial(n - 1, p_hat);
  const bool chose_a = record.choice == Location::A;
  const double realized = (static_cast<double>(k) + (chose_a ? 1.0 : 0.0)) / n;
  return chose_a ? game.payoff_a(realized) : game.payoff_b(realized);
}

std::vector<int> compute_public_payoffs(const CongestionGame& game,
                                        std::vector<TrialRecord>& cell_records, int n,
                                        RngStream& rng) {
  if (n < 1) {
    throw std::invalid_argument("group size must be >= 1");
  }
  const std::size_t m = cell_records.size();
  if (m < static_cast<std::size_t>(n)) {
    throw CellTooSmall("cell has " + std::to_string(m) + " records; need at least " +
                       std::to_string(n));
  }
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<int> group_ids(m, 0);
  const std::size_t groups = (m + static_cast<std::size_t>(n) - 1) / static_cast<std::size_t>(n);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * static_cast<std::size_t>(n);
    const std::size_t hi = std::min(m, lo + static_cast<std::size_t>(n));
    int count_a = 0;
    for (std::size_t j = lo; j < hi; ++j) {
      if (cell_records[perm[j]].choice == Location::A) ++count_a;
    }
    // The short final group is topped up by resampling choices from the cell;
    // pad members shape the realized proportion but receive nothing.
    for (std::size_t j = hi; j < lo + static_cast<std::size_t>(n); ++j) {
      if (cell_records[rng.uniform_index(m)].choice == Location::A) ++count_a;
    }
    const double realized = static_cast<double>(count_a) / n;
    for (std::size_t j = lo; j < hi; ++j) {
      TrialRecord& rec = cell_records[perm[j]];
      rec.payoff =
          rec.choice == Location::A ? game.payoff_a(realized) : game.payoff_b(realized);
      group_ids[perm[j]] = static_cast<int>(g);
    }
  }
  return group_ids;
}

const char* const kRecordsCsvHeader =
    "participant_id,vis_type,access,block_order,trial_index,signal_prop,choice,"
    "prob_estimate,payoff,strategy_text";

namespace {

void require_field_text(const std::string& text) {
  if (text.find_first_of(",\n\r") != std::string::npos) {
    throw SchemaError("strategy_text must not contain commas or line breaks: '" + text + "'");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  bool with_checks = false;
  for (const TrialRecord& rec : records) {
    if (rec.passed_checks) {
      with_checks = true;
      break;
    }
  }
  std::string out = kRecordsCsvHeader;
  if (with_checks) out += ",passed_checks";
  out += '\n';
  for (const TrialRecord& rec : records) {
    if (rec.access == InformationAccess::NoInfo) {
      throw SchemaError("record access must be private or public");
    }
    require_field_text(rec.strategy_text);
    out += std::to_string(rec.participant_id);
    out += ',';
    out += to_token(rec.vis_type);
    out += ',';
    out += to_token(rec.access);
    out += ',';
    out += to_token(rec.block_order);
    out += ',';
    out += std::to_string(rec.trial_index);
    out += ',';
    if (rec.signal_prop) out += format_double(*rec.signal_prop);
    out += ',';
    out += to_token(rec.choice);
    out += ',';
    out += format_double(rec.prob_estimate);
    out += ',';
    if (rec.payoff) out += format_double(*rec.payoff);
    out += ',';
    out += rec.strategy_text;
    if (with_checks) {
      out += ',';
      if (rec.passed_checks) out += std::to_string(*rec.passed_checks);
    }
    out += '\n';
  }
  return out;
}

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << records_to_csv(records);
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

std::vector<TrialRecord> parse_records_csv(const std::string& text, const IngestOptions& options) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  if (lines.empty()) {
    throw SchemaError("empty CSV");
  }
  bool with_checks = false;
  if (lines[0] == std::string(kRecordsCsvHeader) + ",passed_checks") {
    with_checks = true;
  } else if (lines[0] != kRecordsCsvHeader) {
    throw SchemaError("unexpected CSV header: '" + lines[0] + "'");
  }
  const std::size_t expected = with_checks ? 11 : 10;

  std::vector<TrialRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty() && row + 1 == lines.size()) break;
    const std::vector<std::string> fields = split_fields(lines[row]);
    const auto fail = [&](const char* column, const std::string& why) -> ParseError {
      return ParseError("row " + std::to_string(row) + ", column " + column + ": " + why);
    };
    if (fields.size() != expected) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(expected) +
                       " fields, got " + std::to_string(fields.size()));
    }
    TrialRecord rec;
    try {
      rec.participant_id = parse_int(fields[0]);
    } catch (const std::exception& e) {
      throw fail("participant_id", e.what());
    }
    try {
      rec.vis_type = vis_type_from_token(fields[1]);
    } catch (const std::exception& e) {
      throw fail("vis_type", e.what());
    }
    if (fields[2] == "private") {
      rec.access = InformationAccess::Private;
    } else if (fields[2] == "public") {
      rec.access = InformationAccess::Public;
    } else {
      throw fail("access", "expected private|public, got '" + fields[2] + "'");
    }
    try {
      rec.block_order = block_order_from_token(fields[3]);
    } catch (const std::exception& e) {
      throw fail("block_order", e.what());
    }
    try {
      rec.trial_index = parse_int(fields[4]);
      if (rec.trial_index < 1) throw ParseError("must be >= 1");
    } catch (const std::exception& e) {
      throw fail("trial_index", e.what());
    }
    if (!fields[5].empty()) {
      try {
        rec.signal_prop = require_proportion(parse_double(fields[5]), "signal_prop");
      } catch (const std::exception& e) {
        throw fail("signal_prop", e.what());
      }
    }
    try {
      rec.choice = location_from_token(fields[6]);
    } catch (const std::exception& e) {
      throw fail("choice", e.what());
    }
    try {
      rec.prob_estimate = parse_double(fields[7]);
      if (!(rec.prob_estimate >= 0.0 && rec.prob_estimate <= 100.0)) {
        throw ParseError("must be in [0, 100]");
      }
    } catch (const std::exception& e) {
      throw fail("prob_estimate", e.what());
    }
    if (!fields[8].empty()) {
      try {
        rec.payoff = parse_double(fields[8]);
      } catch (const std::exception& e) {
        throw fail("payoff", e.what());
      }
    }
    rec.strategy_text = fields[9];
    if (with_checks && !fields[10].empty()) {
      try {
        rec.passed_checks = parse_int(fields[10]);
      } catch (const std::exception& e) {
        throw fail("passed_checks", e.what());
      }
    }
    if (options.filter_attention_checks && rec.passed_checks && *rec.passed_checks == 0) {
      continue;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TrialRecord> ingest_csv(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read from '" + path + "' failed");
  }
  return parse_records_csv(buffer.str(), options);
}

namespace {

using CellKey = std::tuple<int, int, int, double>;

CellKey cell_key(const TrialRecord& rec) {
  return {static_cast<int>(rec.vis_type), static_cast<int>(rec.access),
          rec.signal_prop ? 1 : 0, rec.signal_prop.value_or(0.0)};
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records,
                                   const BootstrapConfig& cfg) {
  std::map<CellKey, std::vector<int>> cells;
  for (const TrialRecord& rec : records) {
    cells[cell_key(rec)].push_back(rec.choice == Location::A ? 1 : 0);
  }
  std::vector<CellSummary> out;
  out.reserve(cells.size());
  std::uint64_t cell_index = 0;
  for (const auto& [key, choices] : cells) {
    BootstrapConfig cell_cfg = cfg;
    cell_cfg.seed = mix_seed(cfg.seed, ++cell_index);
    const BootstrapSummary boot = bootstrap_proportion(choices, cell_cfg);
    CellSummary cell;
    cell.vis_type = static_cast<VisType>(std::get<0>(key));
    cell.access = static_cast<InformationAccess>(std::get<1>(key));
    if (std::get<2>(key) == 1) cell.signal_prop = std::get<3>(key);
    cell.proportion_a = boot.estimate;
    cell.lower = boot.lower;
    cell.upper = boot.upper;
    cell.n = choices.size();
    out.push_back(std::move(cell));
  }
  return out;
}

namespace {

template <typename Fn>
RegressionFit named_fit(const char* label, Fn&& fn) {
  const auto prefix = [label](const std::exception& e) {
    return std::string(label) + ": " + e.what();
  };
  try {
    return fn();
  } catch (const Separation& e) {
    throw Separation(prefix(e));
  } catch (const NotConverged& e) {
    throw NotConverged(prefix(e));
  } catch (const RankDeficient& e) {
    throw RankDeficient(prefix(e));
  }
}

}  // namespace

ResponseModelFits fit_response_models(const std::vector<TrialRecord>& records,
                                      const CongestionGame& game, const BootstrapConfig& cfg,
                                      int group_size) {
  ResponseModelFits out;

  // Bootstrapped public cell proportions against vis type and the visualized
  // proportion; every replicate contributes one row.
  std::map<std::pair<int, double>, std::vector<int>> public_cells;
  for (const TrialRecord& rec : records) {
    if (rec.access != InformationAccess::Public || !rec.signal_prop) continue;
    public_cells[{static_cast<int>(rec.vis_type), *rec.signal_prop}].push_back(
        rec.choice == Location::A ? 1 : 0);
  }
  if (public_cells.empty()) {
    out.warnings.push_back("no public signal trials; skipping the cell-proportion fit");
  } else {
    DesignMatrix design({"intercept", "hops", "visualized_prop"});
    std::vector<double> response;
    std::uint64_t cell_index = 0;
    for (const auto& [key, choices] : public_cells) {
      BootstrapConfig cell_cfg = cfg;
      cell_cfg.seed = mix_seed(cfg.seed, 1000 + cell_index++);
      const double hops = key.first == static_cast<int>(VisType::Hops) ? 1.0 : 0.0;
      for (double replicate : bootstrap_replicates(choices, cell_cfg)) {
        design.add_row({1.0, hops, key.second});
        response.push_back(replicate);
      }
    }
    out.eq3 = named_fit("eq3", [&] { return ols_fit(design, response); });
  }

  DesignMatrix design4({"intercept", "hops", "public", "hops_public", "abs_payoff_diff",
                        "b_is_higher", "block_order"});
  std::vector<int> responded;
  DesignMatrix design5(design4.names());
  std::vector<double> abs_error;
  std::map<std::pair<int, double>, double> truth_cache;
  for (const TrialRecord& rec : records) {
    if (!rec.signal_prop) continue;
    const double sp = *rec.signal_prop;
    const double diff = game.payoff_difference(sp);
    const double hops = rec.vis_type == VisType::Hops ? 1.0 : 0.0;
    const double is_public = rec.access == InformationAccess::Public ? 1.0 : 0.0;
    const std::vector<double> row = {1.0,
                                     hops,
                                     is_public,
                                     hops * is_public,
                                     std::fabs(diff),
                                     diff < 0.0 ? 1.0 : 0.0,
                                     rec.block_order == BlockOrder::PrivateFirst ? 1.0 : 0.0};
    design4.add_row(row);
    responded.push_back(best_responded(game, rec));
    if (diff == 0.0) continue;  // no unique displayed-higher location to grade
    const Location best = diff > 0.0 ? Location::A : Location::B;
    const double reported =
        rec.choice == best ? rec.prob_estimate : 100.0 - rec.prob_estimate;
    const std::pair<int, double> truth_key{best == Location::A ? 1 : 0, sp};
    auto cached = truth_cache.find(truth_key);
    if (cached == truth_cache.end()) {
      cached = truth_cache.emplace(truth_key, 100.0 * ground_truth_prob(game, best, sp, group_size))
                   .first;
    }
    design5.add_row(row);
    abs_error.push_back(std::fabs(reported - cached->second));
  }
  if (design4.rows() == 0) {
    out.warnings.push_back("no signal trials; skipping the best-response fit");
  } else {
    out.eq4 = named_fit("eq4", [&] { return logistic_fit(design4, responded); });
  }
  if (design5.rows() == 0) {
    out.warnings.push_back("no gradable signal trials; skipping the report-error fit");
  } else {
    out.eq5 = named_fit("eq5", [&] { return ols_fit(design5, abs_error); });
  }
  return out;
}

namespace {

struct PublicRow {
  int participant_id = 0;
  double hops = 0.0;
  double signal = 0.0;
  double chose_a = 0.0;
};

struct LinePoints {
  // NaN marks a replicate whose fit failed or whose crossing left [0, 1].
  double bar = std::numeric_limits<double>::quiet_NaN();
  double hops = std::numeric_limits<double>::quiet_NaN();
};

// propagate_errors: the point estimate surfaces a degenerate or out-of-range
// crossing to the caller; bootstrap replicates record it as NaN instead.
LinePoints line_crossings(const std::vector<PublicRow>& rows, bool want_bar, bool want_hops,
                          bool propagate_errors) {
  DesignMatrix design({"intercept", "hops", "visualized_prop"});
  std::vector<double> response;
  response.reserve(rows.size());
  for (const PublicRow& row : rows) {
    design.add_row({1.0, row.hops, row.signal});
    response.push_back(row.chose_a);
  }
  const RegressionFit fit = ols_fit(design, response);
  LinePoints points;
  if (!fit.has("visualized_prop")) {
    return points;
  }
  const double slope = fit.coefficient("visualized_prop");
  const double intercept = fit.coefficient("intercept");
  const double hops_shift = fit.has("hops") ? fit.coefficient("hops") : 0.0;
  const auto crossing = [&](double line_intercept) {
    if (propagate_errors) {
      return fit_fixed_point_from_regression(line_intercept, slope);
    }
    try {
      return fit_fixed_point_from_regression(line_intercept, slope);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  if (want_bar) {
    points.bar = crossing(intercept);
  }
  if (want_hops) {
    points.hops = crossing(intercept + hops_shift);
  }
  return points;
}

EquilibriumResult crossing_result(const CongestionGame& game, double p_star,
                                  const std::vector<double>& replicates, double coverage) {
  std::vector<double> successes;
  successes.reserve(replicates.size());
  for (double value : replicates) {
    if (!std::isnan(value)) successes.push_back(value);
  }
  if (successes.size() * 2 < replicates.size()) {
    throw NotConverged("more than half the bootstrap replications failed");
  }
  const double alpha = (1.0 - coverage) / 2.0;
  EquilibriumResult result;
  result.p_star = p_star;
  result.residual = 0.0;
  result.method = SolverMethod::RegressionFixedPoint;
  result.iterations = static_cast<long long>(successes.size());
  double lo = quantile(successes, alpha);
  double hi = quantile(successes, 1.0 - alpha);
  result.ci = {std::min(lo, p_star), std::max(hi, p_star)};
  result.welfare = game.social_welfare(p_star);
  result.converged = true;
  return result;
}

}  // namespace

VisEquilibria estimate_vis_equilibrium(const std::vector<TrialRecord>& records,
                                       const CongestionGame& game, const BootstrapConfig& cfg,
                                       int threads) {
  VisEquilibria out;
  std::vector<PublicRow> rows;
  bool any_bar = false;
  bool any_hops = false;
  for (const TrialRecord& rec : records) {
    if (rec.access != InformationAccess::Public || !rec.signal_prop) continue;
    PublicRow row;
    row.participant_id = rec.participant_id;
    row.hops = rec.vis_type == VisType::Hops ? 1.0 : 0.0;
    row.signal = *rec.signal_prop;
    row.chose_a = rec.choice == Location::A ? 1.0 : 0.0;
    (row.hops == 1.0 ? any_hops : any_bar) = true;
    rows.push_back(row);
  }
  if (rows.empty()) {
    out.warnings.push_back("no public signal trials; skipping equilibrium estimation");
    return out;
  }

  const LinePoints points = line_crossings(rows, any_bar, any_hops, /*propagate_errors=*/true);
  if (std::isnan(points.bar) && std::isnan(points.hops)) {
    throw DegenerateSlope("visualized proportion has no variation across public trials");
  }

  std::vector<int> pids;
  std::map<int, std::vector<std::size_t>> rows_by_pid;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = rows_by_pid.try_emplace(rows[i].participant_id);
    if (inserted) pids.push_back(rows[i].participant_id);
    it->second.push_back(i);
  }
  std::sort(pids.begin(), pids.end());

  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  std::vector<LinePoints> boot(reps);
  const RngStream base(cfg.seed);
  parallel_for(reps, threads, [&](std::size_t r) {
    RngStream rng = base.split(r);
    std::vector<PublicRow> resampled;
    resampled.reserve(rows.size());
    bool has_bar = false;
    bool has_hops = false;
    for (std::size_t i = 0; i < pids.size(); ++i) {
      const int pid = pids[rng.uniform_index(pids.size())];
      for (std::size_t j : rows_by_pid.at(pid)) {
        resampled.push_back(rows[j]);
        (rows[j].hops == 1.0 ? has_hops : has_bar) = true;
      }
    }
    try {
      boot[r] = line_crossings(resampled, has_bar && any_bar, has_hops && any_hops,
                               /*propagate_errors=*/false);
    } catch (const Error&) {
      // leave NaNs; the replicate failed
    }
  });

  if (any_bar) {
    std::vector<double> bar_reps(reps);
    for (std::size_t r = 0; r < reps; ++r) bar_reps[r] = boot[r].bar;
    out.bar = crossing_result(game, points.bar, bar_reps, cfg.coverage);
  }
  if (any_hops) {
    std::vector<double> hops_reps(reps);
    for (std::size_t r = 0; r < reps; ++r) hops_reps[r] = boot[r].hops;
    out.hops = crossing_result(game, points.hops, hops_reps, cfg.coverage);
  }
  return out;
}

AnalysisBundle analyze_records(const std::vector<TrialRecord>& records, const CongestionGame& game,
                               const AnalysisOptions& options) {
  if (records.empty()) {
    throw EmptyInput("no records to analyze");
  }
  AnalysisBundle bundle;

  BootstrapConfig cells_cfg = options.bootstrap;
  cells_cfg.seed = mix_seed(options.bootstrap.seed, 11);
  bundle.cells = summarize(records, cells_cfg);

  BootstrapConfig fits_cfg = options.bootstrap;
  fits_cfg.seed = mix_seed(options.bootstrap.seed, 12);
  ResponseModelFits fits = fit_response_models(records, game, fits_cfg, options.group_size);
  bundle.eq3 = std::move(fits.eq3);
  bundle.eq4 = std::move(fits.eq4);
  bundle.eq5 = std::move(fits.eq5);
  bundle.warnings = std::move(fits.warnings);

  BootstrapConfig equilibria_cfg = options.bootstrap;
  equilibria_cfg.seed = mix_seed(options.bootstrap.seed, 13);
  VisEquilibria equilibria =
      estimate_vis_equilibrium(records, game, equilibria_cfg, options.threads);
  bundle.bar_equilibrium = std::move(equilibria.bar);
  bundle.hops_equilibrium = std::move(equilibria.hops);
  for (std::string& warning : equilibria.warnings) {
    bundle.warnings.push_back(std::move(warning));
  }
  return bundle;
}

namespace {

nlohmann::json equilibrium_entry(const std::optional<EquilibriumResult>& result) {
  if (!result) return nullptr;
  const auto [lo, hi] = result->ci.value_or(std::pair{result->p_star, result->p_star});
  return {{"p", result->p_star}, {"lo", lo}, {"hi", hi}};
}

}  // namespace

std::string analysis_to_json(const AnalysisBundle& bundle) {
  nlohmann::json root;
  root["cells"] = nlohmann::json::array();
  for (const CellSummary& cell : bundle.cells) {
    nlohmann::json entry;
    entry["vis_type"] = to_token(cell.vis_type);
    entry["access"] = to_token(cell.access);
    entry["signal_prop"] =
        cell.signal_prop ? nlohmann::json(*cell.signal_prop) : nlohmann::json(nullptr);
    entry["proportion_a"] = cell.proportion_a;
    entry["ci"] = {cell.lower, cell.upper};
    entry["n"] = cell.n;
    root["cells"].push_back(std::move(entry));
  }
  const auto fit_entry = [](const std::optional<RegressionFit>& fit) {
    return fit ? nlohmann::json::parse(fit->to_json()) : nlohmann::json(nullptr);
  };
  root["eq3"] = fit_entry(bundle.eq3);
  root["eq4"] = fit_entry(bundle.eq4);
  root["eq5"] = fit_entry(bundle.eq5);
  root["equilibria"] = {{"bar", equilibrium_entry(bundle.bar_equilibrium)},
                        {"hops", equilibrium_entry(bundle.hops_equilibrium)}};
  root["warnings"] = bundle.warnings;
  return root.dump(2);
}

namespace {

constexpr const char* kCellsCsvHeader = "vis_type,access,signal_prop,proportion_a,ci_lo,ci_hi,n";

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

}  // namespace

void export_plot_data(const AnalysisBundle& bundle, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory '" + dir + "': " + ec.message());
  }
  const std::filesystem::path base(dir);

  std::string cells = std::string(kCellsCsvHeader) + '\n';
  for (const CellSummary& cell : bundle.cells) {
    cells += to_token(cell.vis_type);
    cells += ',';
    cells += to_token(cell.access);
    cells += ',';
    if (cell.signal_prop) cells += format_double(*cell.signal_prop);
    cells += ',';
    cells += format_double(cell.proportion_a);
    cells += ',';
    cells += format_double(cell.lower);
    cells += ',';
    cells += format_double(cell.upper);
    cells += ',';
    cells += std::to_string(cell.n);
    cells += '\n';
  }
  write_text_file((base / "cells.csv").string(), cells);

  std::string coefficients = "model,term,estimate,std_error\n";
  const std::pair<const char*, const std::optional<RegressionFit>*> fits[] = {
      {"eq3", &bundle.eq3}, {"eq4", &bundle.eq4}, {"eq5", &bundle.eq5}};
  for (const auto& [label, fit] : fits) {
    if (!*fit) continue;
    for (std::size_t i = 0; i < (*fit)->names.size(); ++i) {
      coefficients += label;
      coefficients += ',';
      coefficients += (*fit)->names[i];
      coefficients += ',';
      coefficients += format_double((*fit)->coefficients[i]);
      coefficients += ',';
      coefficients += format_double((*fit)->standard_errors[i]);
      coefficients += '\n';
    }
  }
  write_text_file((base / "coefficients.csv").string(), coefficients);

  write_text_file((base / "analysis.json").string(), analysis_to_json(bundle));
}

std::vector<CellSummary> read_cells_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<CellSummary> out;
  std::size_t start = 0;
  std::size_t row = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    start = end + 1;
    if (row++ == 0) {
      if (line != kCellsCsvHeader) {
        throw SchemaError("unexpected cells header: '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 7) {
      throw ParseError("cells row " + std::to_string(row - 1) + ": expected 7 fields, got " +
                       std::to_string(fields.size()));
    }
    CellSummary cell;
    cell.vis_type = vis_type_from_token(fields[0]);
    cell.access = access_from_token(fields[1]);
    if (!fields[2].empty()) cell.signal_prop = parse_double(fields[2]);
    cell.proportion_a = parse_double(fields[3]);
    cell.lower = parse_double(fields[4]);
    cell.upper = parse_double(fields[5]);
    cell.n = static_cast<std::size_t>(parse_int(fields[6]));
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace viseq

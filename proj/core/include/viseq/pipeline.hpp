#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viseq/behavior.hpp"
#include "viseq/solver.hpp"
#include "viseq/stats.hpp"

namespace viseq {

enum class BlockOrder { PublicFirst, PrivateFirst };

std::string to_token(BlockOrder order);
BlockOrder block_order_from_token(const std::string& token);

struct ExperimentConfig {
  std::vector<double> signals = {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  int group_size = 30;
  int participants = 0;
  std::vector<VisType> vis_types = {VisType::Bar, VisType::Hops};
  std::vector<BlockOrder> block_orders = {BlockOrder::PublicFirst, BlockOrder::PrivateFirst};
  std::uint64_t seed = 0;
  int threads = 1;
  // Probability reports pass through llo_weight with these parameters,
  // compressing them toward 50%.
  double report_gamma = 0.6;
  double report_delta = 1.0;
};

struct TrialRecord {
  int participant_id = 0;
  VisType vis_type = VisType::Bar;
  // Block access: private or public. A no-information trial is flagged by an
  // absent signal_prop, not by this field.
  InformationAccess access = InformationAccess::Private;
  BlockOrder block_order = BlockOrder::PublicFirst;
  int trial_index = 0;  // 1..20 in play order across both blocks
  std::optional<double> signal_prop;  // assigned proportion; absent on no-information trials
  Location choice = Location::A;
  double prob_estimate = 50.0;  // percent in [0, 100]
  std::optional<double> payoff;
  std::string strategy_text;
  std::optional<int> passed_checks;  // optional ingest column; 0 = failed attention checks

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// 1 when the choice is the displayed higher-payoff location at the assigned
// signal (payoff ties count as best-responding); throws MissingSignal on
// no-information trials.
int best_responded(const CongestionGame& game, const TrialRecord& record);

struct PopulationSpec {
  PopulationMixture no_info;
  PopulationMixture bar;
  PopulationMixture hops;
};

PopulationSpec default_population_spec();

struct SchemeSpec {
  SignalScheme bar{SignalScheme::Variant::Exact, 30, 30};
  SignalScheme hops{SignalScheme::Variant::FrameSequence, 30, 30};
};

// Balanced assignment over vis_type x block_order; each participant plays two
// ten-trial blocks (a no-information trial, then the nine signals in seeded
// random order). Choices are Bernoulli draws from the acting model's
// choose_prob_a; payoffs follow the private/public rules below. Deterministic
// given cfg.seed and independent of cfg.threads. Public cells smaller than
// group_size keep empty payoffs and add a warning.
std::vector<TrialRecord> simulate_experiment(const ExperimentConfig& cfg,
                                             const PopulationSpec& populations,
                                             const CongestionGame& game, const SchemeSpec& schemes,
                                             std::vector<std::string>* warnings = nullptr);

// Draws k ~ Binomial(n-1, signal_prop) other players at A; the participant is
// the n-th group member. Returns the chosen location's payoff at (k + [A])/n.
double compute_private_payoff(const CongestionGame& game, const TrialRecord& record, int n,
                              RngStream& rng);

// Shuffles one condition cell, partitions it into groups of n (the last short
// group is padded by resampling choices from the cell), and writes each
// record's payoff at its group's realized proportion. Returns the group id
// per record, aligned with the input order.
std::vector<int> compute_public_payoffs(const CongestionGame& game,
                                        std::vector<TrialRecord>& cell_records, int n,
                                        RngStream& rng);

// participant_id,vis_type,access,block_order,trial_index,signal_prop,choice,
// prob_estimate,payoff,strategy_text  (optionally + passed_checks)
extern const char* const kRecordsCsvHeader;

std::string records_to_csv(const std::vector<TrialRecord>& records);
void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path);

struct IngestOptions {
  // Drop records whose passed_checks column is 0; without the column every
  // record is kept.
  bool filter_attention_checks = false;
};

std::vector<TrialRecord> parse_records_csv(const std::string& text,
                                           const IngestOptions& options = {});
std::vector<TrialRecord> ingest_csv(const std::string& path, const IngestOptions& options = {});

struct CellSummary {
  VisType vis_type = VisType::Bar;
  InformationAccess access = InformationAccess::Private;
  std::optional<double> signal_prop;  // absent = no-information cell
  double proportion_a = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n = 0;
};

// Groups records by (vis_type, access, signal) and bootstraps each cell's
// proportion choosing A. Cells are ordered bar/hops, private/public,
// no-information first then ascending signal.
std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records,
                                   const BootstrapConfig& cfg);

struct ResponseModelFits {
  // eq3: proportion at A ~ vis type + visualized proportion, least squares
  // over bootstrapped public cell proportions.
  std::optional<RegressionFit> eq3;
  // eq4: best-responded ~ vis*access + |payoff difference| + B-higher +
  // block order, logistic over signal trials.
  std::optional<RegressionFit> eq4;
  // eq5: |probability-estimate error| in percentage points, same design.
  std::optional<RegressionFit> eq5;
  std::vector<std::string> warnings;
};

ResponseModelFits fit_response_models(const std::vector<TrialRecord>& records,
                                      const CongestionGame& game, const BootstrapConfig& cfg,
                                      int group_size = 30);

struct VisEquilibria {
  std::optional<EquilibriumResult> bar;
  std::optional<EquilibriumResult> hops;
  std::vector<std::string> warnings;
};

// Fits the public-trial response line (shared slope, vis-type intercepts) and
// returns each vis type's identity crossing with a participant-bootstrap
// percentile CI. iterations counts the successful bootstrap replications.
VisEquilibria estimate_vis_equilibrium(const std::vector<TrialRecord>& records,
                                       const CongestionGame& game, const BootstrapConfig& cfg,
                                       int threads = 1);

struct AnalysisOptions {
  BootstrapConfig bootstrap{};
  int group_size = 30;
  int threads = 1;
};

struct AnalysisBundle {
  std::vector<CellSummary> cells;
  std::optional<RegressionFit> eq3;
  std::optional<RegressionFit> eq4;
  std::optional<RegressionFit> eq5;
  std::optional<EquilibriumResult> bar_equilibrium;
  std::optional<EquilibriumResult> hops_equilibrium;
  std::vector<std::string> warnings;
};

AnalysisBundle analyze_records(const std::vector<TrialRecord>& records, const CongestionGame& game,
                               const AnalysisOptions& options);

// {cells:[...], eq3:{...}, eq4:{...}, eq5:{...},
//  equilibria:{bar:{p,lo,hi}, hops:{p,lo,hi}}, warnings:[...]}
std::string analysis_to_json(const AnalysisBundle& bundle);

// Writes cells.csv, coefficients.csv, and analysis.json under dir.
void export_plot_data(const AnalysisBundle& bundle, const std::string& dir);

// Reads back an exported cells.csv.
std::vector<CellSummary> read_cells_csv(const std::string& path);

}  // namespace viseq

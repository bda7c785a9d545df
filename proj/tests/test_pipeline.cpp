#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"
#include "viseq/pipeline.hpp"
#include "viseq/rng.hpp"

using namespace viseq;

namespace {

PopulationSpec uniform_spec(AgentModel model) {
  PopulationSpec spec;
  spec.no_info = normalized_mixture({{AgentModel{PayoffPrior{}}, 1.0}});
  spec.bar = normalized_mixture({{model, 1.0}});
  spec.hops = normalized_mixture({{model, 1.0}});
  return spec;
}

SchemeSpec exact_schemes() {
  SchemeSpec s;
  s.hops = SignalScheme{SignalScheme::Variant::Exact, 30, 30};
  return s;
}

PopulationSpec empirical_spec() {
  PopulationSpec spec;
  // EmpiricalLogistic needs a display, so no-information trials keep the
  // default mixture
  spec.no_info = default_population_spec().no_info;
  spec.bar = normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}});
  spec.hops = normalized_mixture({{AgentModel{EmpiricalLogistic{}}, 1.0}});
  return spec;
}

TrialRecord public_row(int pid, VisType vis, double signal, Location choice) {
  TrialRecord r;
  r.participant_id = pid;
  r.vis_type = vis;
  r.access = InformationAccess::Public;
  r.trial_index = 2;
  r.signal_prop = signal;
  r.choice = choice;
  r.strategy_text = "scripted";
  return r;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("viseq_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("simulation structure") {
  ExperimentConfig cfg;
  cfg.participants = 400;
  cfg.seed = 101;
  cfg.threads = 2;
  const auto records =
      simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  CHECK(records.size() == 8000);

  std::map<int, std::vector<const TrialRecord*>> by_pid;
  for (const auto& r : records) by_pid[r.participant_id].push_back(&r);
  CHECK(by_pid.size() == 400);
  for (const auto& [pid, rows] : by_pid) {
    REQUIRE(rows.size() == 20);
    int no_signal = 0;
    int private_count = 0;
    std::multiset<double> first_block, second_block;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i]->trial_index == static_cast<int>(i) + 1);
      CHECK(rows[i]->vis_type == rows[0]->vis_type);
      CHECK(rows[i]->block_order == rows[0]->block_order);
      CHECK(!rows[i]->strategy_text.empty());
      if (!rows[i]->signal_prop) {
        ++no_signal;
      } else {
        (i < 10 ? first_block : second_block).insert(*rows[i]->signal_prop);
      }
      if (rows[i]->access == InformationAccess::Private) ++private_count;
    }
    CHECK(no_signal == 2);
    CHECK(!rows[0]->signal_prop.has_value());
    CHECK(!rows[10]->signal_prop.has_value());
    CHECK(private_count == 10);
    // each block holds every signal exactly once
    CHECK(first_block.size() == 9);
    CHECK(second_block.size() == 9);
    CHECK(first_block == second_block);
    // one block is private, the other public
    CHECK(rows[0]->access != rows[10]->access);
    const InformationAccess first = rows[0]->access;
    const bool public_first = first == InformationAccess::Public;
    CHECK(public_first == (rows[0]->block_order == BlockOrder::PublicFirst));
  }

  // balanced assignment across the four condition combinations
  std::map<std::pair<int, int>, int> combo;
  for (const auto& [pid, rows] : by_pid) {
    combo[{static_cast<int>(rows[0]->vis_type), static_cast<int>(rows[0]->block_order)}]++;
  }
  REQUIRE(combo.size() == 4);
  for (const auto& [key, count] : combo) CHECK(count == 100);
}

TEST_CASE("simulation is deterministic and thread independent") {
  ExperimentConfig cfg;
  cfg.participants = 60;
  cfg.seed = 77;
  cfg.threads = 1;
  const auto a = simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  cfg.threads = 4;
  const auto b = simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  CHECK(a == b);
}

TEST_CASE("best responders always take the displayed better location") {
  ExperimentConfig cfg;
  cfg.participants = 80;
  cfg.seed = 55;
  CongestionGame g;
  const auto records =
      simulate_experiment(cfg, uniform_spec({BestResponder{}}), g, exact_schemes());
  for (const auto& r : records) {
    if (!r.signal_prop) continue;
    CHECK(best_responded(g, r) == 1);
    CHECK(r.choice == (*r.signal_prop < 2.0 / 9.0 ? Location::A : Location::B));
  }
}

TEST_CASE("simulated bar cells track the acting model") {
  ExperimentConfig cfg;
  cfg.participants = 400;
  cfg.seed = 660;
  cfg.threads = 4;
  CongestionGame g;
  const auto records = simulate_experiment(cfg, empirical_spec(), g, SchemeSpec{});
  BootstrapConfig bs;
  bs.seed = 661;
  const auto cells = summarize(records, bs);
  const AgentModel model{EmpiricalLogistic{}};
  SignalScheme exact;
  RngStream rng(0);
  int checked = 0;
  for (const auto& cell : cells) {
    if (cell.vis_type != VisType::Bar || !cell.signal_prop) continue;
    const double shown = render(exact, *cell.signal_prop, rng).displayed_prop;
    const double expect = display_response(model, g, shown, false, cell.access);
    CHECK(cell.lower <= expect);
    CHECK(cell.upper >= expect);
    ++checked;
  }
  CHECK(checked == 18);
}

TEST_CASE("private payoff draws the rest of the group") {
  CongestionGame g;
  TrialRecord r;
  r.signal_prop = 0.0;
  r.choice = Location::A;
  RngStream rng(9);
  CHECK(compute_private_payoff(g, r, 30, rng) == doctest::Approx(39.0).epsilon(1e-14));
  r.choice = Location::B;
  CHECK(compute_private_payoff(g, r, 30, rng) == doctest::Approx(20.0).epsilon(1e-14));

  r.signal_prop = 0.3;
  r.choice = Location::A;
  RngStream draw(123);
  RngStream replay(123);
  const double payoff = compute_private_payoff(g, r, 30, draw);
  const int k = replay.binomial(29, 0.3);
  CHECK(payoff == doctest::Approx(g.payoff_a((k + 1) / 30.0)).epsilon(1e-14));

  CHECK_THROWS_AS(compute_private_payoff(g, TrialRecord{}, 30, rng), MissingSignal);
}

TEST_CASE("public payoffs clear at the realized proportion") {
  CongestionGame g;
  std::vector<TrialRecord> all_a(30), all_b(30);
  for (int i = 0; i < 30; ++i) {
    all_a[i] = public_row(i, VisType::Bar, 0.2, Location::A);
    all_b[i] = public_row(i, VisType::Bar, 0.2, Location::B);
  }
  RngStream r1(5);
  compute_public_payoffs(g, all_a, 30, r1);
  for (const auto& r : all_a) CHECK(*r.payoff == doctest::Approx(10.0).epsilon(1e-14));
  RngStream r2(5);
  compute_public_payoffs(g, all_b, 30, r2);
  for (const auto& r : all_b) CHECK(*r.payoff == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("public payoff grouping is reproducible and conserves the group rate") {
  CongestionGame g;
  std::vector<TrialRecord> cell;
  RngStream mk(31);
  for (int i = 0; i < 60; ++i) {
    cell.push_back(public_row(i, VisType::Hops, 0.25,
                              mk.bernoulli(0.4) ? Location::A : Location::B));
  }
  auto copy = cell;
  RngStream ra(32), rb(32);
  const auto groups_a = compute_public_payoffs(g, cell, 30, ra);
  const auto groups_b = compute_public_payoffs(g, copy, 30, rb);
  REQUIRE(groups_a.size() == 60);
  CHECK(groups_a == groups_b);
  for (int i = 0; i < 60; ++i) CHECK(*cell[i].payoff == *copy[i].payoff);

  // short final group gets padded by resampled choices
  std::vector<TrialRecord> padded;
  RngStream mk2(33);
  for (int i = 0; i < 45; ++i) {
    padded.push_back(public_row(i, VisType::Bar, 0.3,
                                mk2.bernoulli(0.5) ? Location::A : Location::B));
  }
  RngStream rp(34);
  const auto groups = compute_public_payoffs(g, padded, 30, rp);
  std::map<int, std::vector<const TrialRecord*>> by_group;
  for (int i = 0; i < 45; ++i) by_group[groups[i]].push_back(&padded[i]);
  CHECK(by_group.size() == 2);
  for (const auto& [gid, members] : by_group) {
    // a single realized proportion must explain every member payoff
    double q = -1.0;
    for (const auto* m : members) {
      const double mq = m->choice == Location::A ? (40.0 - *m->payoff) / 30.0
                                                 : (*m->payoff - 20.0) / 60.0;
      if (q < 0.0) q = mq;
      CHECK(std::abs(mq - q) <= 1e-12);
    }
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(std::abs(q * 30.0 - std::round(q * 30.0)) <= 1e-9);
  }

  std::vector<TrialRecord> tiny(29, public_row(1, VisType::Bar, 0.2, Location::A));
  RngStream rt(35);
  CHECK_THROWS_AS(compute_public_payoffs(g, tiny, 30, rt), CellTooSmall);
}

TEST_CASE("undersized public cells carry a warning and empty payoffs") {
  ExperimentConfig cfg;
  cfg.participants = 32;  // 16 per vis arm; public cells hold 16 < 30 records
  cfg.seed = 12;
  std::vector<std::string> warnings;
  const auto records = simulate_experiment(cfg, default_population_spec(), CongestionGame{},
                                           SchemeSpec{}, &warnings);
  CHECK(!warnings.empty());
  for (const auto& r : records) {
    if (r.access == InformationAccess::Public) CHECK(!r.payoff.has_value());
    if (r.access == InformationAccess::Private && r.signal_prop) CHECK(r.payoff.has_value());
  }
}

TEST_CASE("records survive a csv round trip") {
  ExperimentConfig cfg;
  cfg.participants = 40;
  cfg.seed = 88;
  const auto records =
      simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  const std::string csv = records_to_csv(records);
  CHECK(csv.rfind(kRecordsCsvHeader, 0) == 0);
  CHECK(records_to_csv(records) == csv);
  const auto back = parse_records_csv(csv);
  CHECK(back == records);
}

TEST_CASE("csv write and ingest through the filesystem") {
  const auto dir = fresh_dir("csvio");
  ExperimentConfig cfg;
  cfg.participants = 32;
  cfg.seed = 13;
  const auto records =
      simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  const std::string path = (dir / "records.csv").string();
  write_records_csv(records, path);
  CHECK(ingest_csv(path) == records);
  CHECK_THROWS_AS(ingest_csv((dir / "missing.csv").string()), IoError);
}

TEST_CASE("csv parser rejects bad rows with a location") {
  const std::string header(kRecordsCsvHeader);
  const std::string good = "1,bar,private,public_first,3,0.25,A,60,12.5,scripted";

  CHECK(parse_records_csv(header + "\n").empty());

  const std::string bad_prob = header + "\n1,bar,private,public_first,3,0.25,A,140,12.5,x\n";
  CHECK_THROWS_AS(parse_records_csv(bad_prob), ParseError);
  try {
    parse_records_csv(bad_prob);
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 1") != std::string::npos);
    CHECK(what.find("prob_estimate") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_records_csv("wrong,header\n" + good + "\n"), SchemaError);
  CHECK_THROWS_AS(parse_records_csv(header + "\n1,bar,private\n"), ParseError);
  CHECK_THROWS_AS(
      parse_records_csv(header + "\n1,bar,no_info,public_first,3,0.25,A,60,12.5,x\n"),
      ParseError);
  CHECK_THROWS_AS(
      parse_records_csv(header + "\n1,tri,private,public_first,3,0.25,A,60,12.5,x\n"),
      ParseError);

  // tolerated: CRLF line endings and a trailing newline
  const auto crlf = parse_records_csv(header + "\r\n" + good + "\r\n");
  CHECK(crlf.size() == 1);
  CHECK(crlf[0].signal_prop == 0.25);

  const std::string flagged = header + ",passed_checks\n" + good + ",1\n" + good + ",0\n";
  CHECK(parse_records_csv(flagged).size() == 2);
  IngestOptions filter;
  filter.filter_attention_checks = true;
  const auto kept = parse_records_csv(flagged, filter);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].passed_checks == 1);
}

TEST_CASE("summaries of scripted cells") {
  std::vector<TrialRecord> records;
  for (int i = 0; i < 30; ++i) records.push_back(public_row(i, VisType::Bar, 0.1, Location::A));
  BootstrapConfig bs;
  bs.seed = 42;
  const auto cells = summarize(records, bs);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].proportion_a == 1.0);
  CHECK(cells[0].lower == 1.0);
  CHECK(cells[0].upper == 1.0);
  CHECK(cells[0].n == 30);

  // doubling the data leaves the point estimates alone
  auto doubled = records;
  for (int i = 0; i < 15; ++i) doubled[static_cast<std::size_t>(i)].choice = Location::B;
  auto twice = doubled;
  twice.insert(twice.end(), doubled.begin(), doubled.end());
  const auto once_cells = summarize(doubled, bs);
  const auto twice_cells = summarize(twice, bs);
  CHECK(once_cells[0].proportion_a == twice_cells[0].proportion_a);
  CHECK(twice_cells[0].n == 60);
}

TEST_CASE("cell ordering is stable") {
  ExperimentConfig cfg;
  cfg.participants = 40;
  cfg.seed = 21;
  const auto records =
      simulate_experiment(cfg, default_population_spec(), CongestionGame{}, SchemeSpec{});
  BootstrapConfig bs;
  bs.seed = 3;
  const auto cells = summarize(records, bs);
  REQUIRE(cells.size() == 40);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const std::size_t vis_block = i / 20;
    CHECK(c.vis_type == (vis_block == 0 ? VisType::Bar : VisType::Hops));
    const std::size_t access_block = (i % 20) / 10;
    CHECK(c.access ==
          (access_block == 0 ? InformationAccess::Private : InformationAccess::Public));
    if (i % 10 == 0) {
      CHECK(!c.signal_prop.has_value());
    } else {
      CHECK(c.signal_prop == doctest::Approx(0.10 + 0.05 * (i % 10 - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("best responded flags and ties") {
  CongestionGame g;
  TrialRecord r = public_row(1, VisType::Bar, 0.1, Location::A);
  CHECK(best_responded(g, r) == 1);
  r.choice = Location::B;
  CHECK(best_responded(g, r) == 0);
  r.signal_prop = 0.5;
  CHECK(best_responded(g, r) == 1);

  const CongestionGame tie_game{{40.0, -20.0}, {20.0, 60.0}};
  TrialRecord tie = public_row(1, VisType::Bar, 0.25, Location::A);
  CHECK(best_responded(tie_game, tie) == 1);
  tie.choice = Location::B;
  CHECK(best_responded(tie_game, tie) == 1);

  TrialRecord no_signal;
  CHECK_THROWS_AS(best_responded(g, no_signal), MissingSignal);
}

TEST_CASE("scripted best responders separate the choice regression") {
  ExperimentConfig cfg;
  cfg.participants = 40;
  cfg.seed = 19;
  CongestionGame g;
  const auto records = simulate_experiment(cfg, uniform_spec({BestResponder{}}), g,
                                           exact_schemes());
  BootstrapConfig bs;
  bs.seed = 20;
  CHECK_THROWS_AS(fit_response_models(records, g, bs), Separation);
  try {
    fit_response_models(records, g, bs);
  } catch (const Separation& e) {
    CHECK(std::string(e.what()).find("eq4") != std::string::npos);
  }
}

TEST_CASE("choice regression recovers the acting coefficients") {
  ExperimentConfig cfg;
  cfg.participants = 800;
  cfg.seed = 740;
  cfg.threads = 4;
  CongestionGame g;
  const auto records = simulate_experiment(cfg, empirical_spec(), g, SchemeSpec{});
  BootstrapConfig bs;
  bs.seed = 741;
  const auto fits = fit_response_models(records, g, bs);
  REQUIRE(fits.eq4.has_value());
  const double truth[] = {0.41, -0.33, -0.41, 0.12, 0.02, 0.76, 0.0};
  const char* names[] = {"intercept", "hops",        "public",      "hops_public",
                         "abs_payoff_diff", "b_is_higher", "block_order"};
  for (int i = 0; i < 7; ++i) {
    CHECK(std::abs(fits.eq4->coefficient(names[i]) - truth[i]) <= 0.15);
  }
  REQUIRE(fits.eq5.has_value());
  CHECK(fits.eq5->n_obs == 800 * 18);
  REQUIRE(fits.eq3.has_value());
  CHECK(fits.eq3->coefficient("visualized_prop") < 0.0);
}

TEST_CASE("signal-blind choices leave the cell regression flat") {
  ExperimentConfig cfg;
  cfg.participants = 1600;
  cfg.seed = 920;
  CongestionGame g;
  const auto records = simulate_experiment(cfg, uniform_spec({RandomChooser{}}), g, SchemeSpec{});
  BootstrapConfig bs;
  bs.seed = 921;
  const auto fits = fit_response_models(records, g, bs);
  REQUIRE(fits.eq3.has_value());
  // cells of 800 coin flips put ~0.032 of noise on the slope; the fit's own
  // standard error describes replicate rows, not cells, so bound in absolute
  // terms at roughly 3.7 sigma
  const double slope = fits.eq3->coefficient("visualized_prop");
  CHECK(std::abs(slope) <= 0.12);
}

TEST_CASE("fits refuse thin data with warnings") {
  BootstrapConfig bs;
  bs.seed = 1;
  // both choices at each signal keep the choice fit identified and unseparated
  std::vector<TrialRecord> only_private;
  for (double signal : {0.2, 0.3, 0.4}) {
    for (Location choice : {Location::A, Location::B}) {
      TrialRecord r = public_row(1, VisType::Bar, signal, choice);
      r.access = InformationAccess::Private;
      only_private.push_back(r);
    }
  }
  const auto fits = fit_response_models(only_private, CongestionGame{}, bs);
  CHECK(!fits.eq3.has_value());
  CHECK(!fits.warnings.empty());

  TrialRecord no_signal;
  no_signal.strategy_text = "x";
  const auto nothing = fit_response_models({no_signal}, CongestionGame{}, bs);
  CHECK(!nothing.eq4.has_value());
  CHECK(!nothing.eq5.has_value());
}

TEST_CASE("equilibrium estimate from a linear response") {
  RngStream rng(5100);
  std::vector<TrialRecord> records;
  for (int pid = 0; pid < 600; ++pid) {
    for (int s = 0; s < 9; ++s) {
      const double signal = 0.10 + 0.05 * s;
      const Location choice =
          rng.bernoulli(0.2 + 0.4 * signal) ? Location::A : Location::B;
      records.push_back(public_row(pid, VisType::Bar, signal, choice));
    }
  }
  BootstrapConfig bs;
  bs.seed = 5101;
  const VisEquilibria eq = estimate_vis_equilibrium(records, CongestionGame{}, bs);
  REQUIRE(eq.bar.has_value());
  CHECK(!eq.hops.has_value());
  CHECK(std::abs(eq.bar->p_star - 1.0 / 3.0) <= 0.02);
  REQUIRE(eq.bar->ci.has_value());
  CHECK(eq.bar->ci->first <= eq.bar->p_star);
  CHECK(eq.bar->ci->second >= eq.bar->p_star);
  CHECK(eq.bar->ci->first <= 1.0 / 3.0);
  CHECK(eq.bar->ci->second >= 1.0 / 3.0);
  CHECK(eq.bar->method == SolverMethod::RegressionFixedPoint);
}

TEST_CASE("equilibrium estimation failure modes") {
  // observed cell proportions equal the visualized proportion exactly
  std::vector<TrialRecord> identity;
  int pid = 0;
  for (int s = 0; s < 9; ++s) {
    const double signal = 0.10 + 0.05 * s;
    const int n_a = static_cast<int>(std::lround(20.0 * signal));
    for (int i = 0; i < 20; ++i) {
      identity.push_back(
          public_row(pid++, VisType::Bar, signal, i < n_a ? Location::A : Location::B));
    }
  }
  BootstrapConfig bs;
  bs.seed = 61;
  CHECK_THROWS_AS(estimate_vis_equilibrium(identity, CongestionGame{}, bs), DegenerateSlope);

  std::vector<TrialRecord> private_only;
  TrialRecord r = public_row(1, VisType::Bar, 0.2, Location::A);
  r.access = InformationAccess::Private;
  private_only.push_back(r);
  const VisEquilibria eq = estimate_vis_equilibrium(private_only, CongestionGame{}, bs);
  CHECK(!eq.bar.has_value());
  CHECK(!eq.hops.has_value());
  CHECK(!eq.warnings.empty());
}

TEST_CASE("analysis bundle end to end") {
  ExperimentConfig cfg;
  cfg.participants = 80;
  cfg.seed = 314;
  cfg.threads = 4;
  CongestionGame g;
  const auto records = simulate_experiment(cfg, default_population_spec(), g, SchemeSpec{});

  AnalysisOptions opt;
  opt.bootstrap.seed = 315;
  opt.threads = 4;
  const AnalysisBundle bundle = analyze_records(records, g, opt);
  CHECK(bundle.cells.size() == 40);
  CHECK(bundle.eq3.has_value());
  CHECK(bundle.eq4.has_value());
  CHECK(bundle.eq5.has_value());
  CHECK(bundle.bar_equilibrium.has_value());
  CHECK(bundle.hops_equilibrium.has_value());

  AnalysisOptions serial = opt;
  serial.threads = 1;
  CHECK(analysis_to_json(analyze_records(records, g, serial)) == analysis_to_json(bundle));

  CHECK_THROWS_AS(analyze_records({}, g, opt), EmptyInput);

  const auto j = nlohmann::json::parse(analysis_to_json(bundle));
  CHECK(j.contains("cells"));
  CHECK(j.contains("eq3"));
  CHECK(j.contains("eq4"));
  CHECK(j.contains("eq5"));
  CHECK(j.contains("equilibria"));
  CHECK(j["cells"].size() == 40);
  CHECK(j["equilibria"]["bar"].contains("p"));
  CHECK(j["equilibria"]["bar"].contains("lo"));
  CHECK(j["equilibria"]["bar"].contains("hi"));
  CHECK(j["eq3"]["coef"].contains("visualized_prop"));
}

TEST_CASE("plot exports round trip") {
  AnalysisBundle bundle;
  CellSummary a;
  a.vis_type = VisType::Bar;
  a.access = InformationAccess::Public;
  a.signal_prop = 0.25;
  a.proportion_a = 1.0 / 3.0;
  a.lower = 0.2;
  a.upper = 0.44;
  a.n = 30;
  CellSummary b = a;
  b.vis_type = VisType::Hops;
  b.signal_prop.reset();
  b.proportion_a = 0.125;
  bundle.cells = {a, b};

  const auto dir = fresh_dir("plots");
  export_plot_data(bundle, dir.string());
  const std::string cells_text = slurp(dir / "cells.csv");
  CHECK(std::count(cells_text.begin(), cells_text.end(), '\n') == 3);
  CHECK(std::filesystem::exists(dir / "coefficients.csv"));
  CHECK(std::filesystem::exists(dir / "analysis.json"));

  export_plot_data(bundle, dir.string());
  CHECK(slurp(dir / "cells.csv") == cells_text);

  const auto back = read_cells_csv((dir / "cells.csv").string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].vis_type == a.vis_type);
  CHECK(back[0].access == a.access);
  CHECK(std::abs(*back[0].signal_prop - *a.signal_prop) <= 1e-12);
  CHECK(std::abs(back[0].proportion_a - a.proportion_a) <= 1e-12);
  CHECK(std::abs(back[0].lower - a.lower) <= 1e-12);
  CHECK(std::abs(back[0].upper - a.upper) <= 1e-12);
  CHECK(back[0].n == 30);
  CHECK(!back[1].signal_prop.has_value());
}

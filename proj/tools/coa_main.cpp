// coa: optimize, simulate, cluster, render and sweep blue force groupings.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "coa/cluster.hpp"
#include "coa/csv.hpp"
#include "coa/optimizer.hpp"
#include "coa/report.hpp"
#include "coa/simulation.hpp"

namespace fs = std::filesystem;
using namespace coa;

namespace {

struct Common {
  std::string scenario = std::string(COA_DATA_DIR) + "/scenarios/delay14.json";
  int platoons = 7;
  std::uint64_t seed = 1;
  std::string out = "coa_out";
  double p_method = 0.4;
  std::size_t batch = 12;
  double tau = 0.2;
  std::size_t top_k = 10;
  std::size_t budget = 10000;
  bool no_branching = false;
  std::string design;
  std::string config;
  std::string population;
  bool literal_selection = false;
  int from = 1, to = 16, reps = 10;
  bool quiet = false;
};

RunManifest make_manifest(const std::string& command, const Common& c) {
  RunManifest m;
  m.command = command;
  m.created = utc_timestamp();
  auto& f = m.fields;
  f["scenario"] = fs::path(c.scenario).filename().string();
  f["seed"] = c.seed;
  f["out"] = c.out;
  if (command == "optimize" || command == "sweep" || command == "simulate" || command == "frames") {
    f["platoons"] = c.platoons;
    f["rollout_budget"] = c.budget;
    f["branching"] = !c.no_branching;
  }
  if (command == "optimize" || command == "sweep") {
    f["p_method"] = c.p_method;
    f["batch"] = c.batch;
    f["mutation_prob"] = 0.05;
    f["population"] = 256;
    f["convergence"] = "17 stagnant iterations over top 40";
    f["selection"] = c.literal_selection ? "literal" : "fitness";
    f["design"] = c.design.empty() ? "generated" : fs::path(c.design).filename().string();
  }
  if (command == "sweep") {
    f["from"] = c.from;
    f["to"] = c.to;
    f["repetitions"] = c.reps;
  }
  if (command == "cluster") {
    f["tau"] = c.tau;
    f["top_k"] = c.top_k;
    f["population_file"] = fs::path(c.population).filename().string();
  }
  if (command == "simulate" || command == "frames") f["config"] = c.config;
  return m;
}

OptimizerConfig optimizer_config(const Common& c) {
  OptimizerConfig cfg;
  cfg.p_method = c.p_method;
  cfg.batch_size = c.batch;
  cfg.seed = c.seed;
  cfg.selection = c.literal_selection ? SelectionDirection::Literal : SelectionDirection::Fitness;
  cfg.sim.rollout_budget = c.budget;
  cfg.sim.branching = !c.no_branching;
  if (!c.design.empty()) cfg.design = DesignMatrix::load_csv(c.design);
  return cfg;
}

Configuration parse_config(const std::string& text) {
  Configuration c;
  std::string t = text;
  for (char& ch : t) {
    if (ch == ',' || ch == ';') ch = ' ';
  }
  std::istringstream in(t);
  for (std::string tok; in >> tok;) c.assignment.push_back(csv::to_int(tok, "--config"));
  if (c.assignment.empty()) throw std::runtime_error("--config needs at least one box id");
  return c;
}

void prepare_out(const Common& c, const RunManifest& m) {
  fs::create_directories(c.out);
  m.write(c.out);
}

int cmd_optimize(const Common& c) {
  const auto scenario = load_scenario(c.scenario);
  const auto m = make_manifest("optimize", c);
  prepare_out(c, m);
  const auto cfg = optimizer_config(c);
  auto progress = [&](const TraceEntry& t, const Population&) {
    if (!c.quiet && (t.iteration % 50 == 0)) {
      std::fprintf(stderr, "iteration %d: best %.6f after %zu evaluations\n", t.iteration, t.best_x, t.evaluations);
    }
  };
  const auto r = optimize(scenario, c.platoons, cfg, {}, progress);
  const fs::path out(c.out);
  write_text(out / "trace.csv", trace_csv(r.trace, m));
  write_text(out / "population.csv", population_csv(r.population, m));
  const auto labels = slot_labels(scenario, c.platoons);
  write_text(out / "best.txt", "# manifest " + m.hash_hex() + "\n" + configuration_report(r.best, labels));
  std::printf("best x_value %s after %zu iterations, %zu evaluations%s\n", csv::format_double(*r.best.value).c_str(),
              r.trace.size() - 1, r.evaluations, r.converged ? " (converged)" : "");
  std::printf("%s", configuration_report(r.best, labels).c_str());
  return 0;
}

SimOptions sim_options(const Common& c) {
  SimOptions o;
  o.seed = c.seed;
  o.rollout_budget = c.budget;
  o.branching = !c.no_branching;
  o.record_log = true;
  return o;
}

int cmd_simulate(const Common& c) {
  const auto scenario = load_scenario(c.scenario);
  const auto config = parse_config(c.config);
  Common cc = c;
  cc.platoons = static_cast<int>(config.assignment.size());
  const auto m = make_manifest("simulate", cc);
  prepare_out(cc, m);
  const auto r = simulate(config, scenario, sim_options(cc));
  const fs::path out(c.out);
  const auto labels = slot_labels(scenario, cc.platoons);
  write_text(out / "result.json", simulation_json(r, labels));
  write_text(out / "battle_log.csv", battle_log_csv(r, m));
  write_text(out / "events.ndjson", event_log_ndjson(r.events));
  std::printf("x_value %s  blue_final %s  red_final %s  illegal_moves %d  rollouts %zu%s\n",
              csv::format_double(r.x_value).c_str(), csv::format_double(r.blue_final).c_str(),
              csv::format_double(r.red_final).c_str(), r.illegal_moves, r.rollouts_explored,
              r.truncated ? " (budget reached)" : "");
  return 0;
}

int cmd_frames(const Common& c) {
  const auto scenario = load_scenario(c.scenario);
  const auto config = parse_config(c.config);
  Common cc = c;
  cc.platoons = static_cast<int>(config.assignment.size());
  const auto m = make_manifest("frames", cc);
  prepare_out(cc, m);
  const auto r = simulate(config, scenario, sim_options(cc));
  const fs::path dir = fs::path(c.out) / "frames";
  fs::create_directories(dir);
  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.svg", i);
    write_text(dir / name, frame_svg(scenario, r.frames[i], i, m));
  }
  std::printf("%zu frames written to %s\n", r.frames.size(), dir.string().c_str());
  return 0;
}

int cmd_cluster(const Common& c) {
  Common cc = c;
  if (cc.population.empty()) cc.population = (fs::path(c.out) / "population.csv").string();
  const auto configs = read_population_csv(cc.population);
  const auto scenario = load_scenario(c.scenario);
  const auto m = make_manifest("cluster", cc);
  prepare_out(cc, m);
  const int n = static_cast<int>(configs.front().assignment.size());
  const auto labels = slot_labels(scenario, n);
  auto clusters = cluster_all(configs, c.tau);
  for (auto& cl : clusters) cluster_stats(cl, labels);
  double v_min = *configs.front().value, v_max = v_min;
  for (const auto& cf : configs) {
    v_min = std::min(v_min, *cf.value);
    v_max = std::max(v_max, *cf.value);
  }
  const auto points = layout_topk(clusters, c.top_k, v_min, v_max);
  const fs::path out(c.out);
  write_text(out / "clusters.csv", clusters_csv(clusters, m));
  write_text(out / "cluster_allocation.csv", allocation_csv(clusters, m));
  write_text(out / "clusters.txt", "# manifest " + m.hash_hex() + "\n" + clusters_text(clusters, c.top_k));
  write_text(out / "clusters.svg", clusters_svg(clusters, points, m));
  std::printf("%zu configurations in %zu clusters\n", configs.size(), clusters.size());
  return 0;
}

int cmd_sweep(const Common& c) {
  const auto scenario = load_scenario(c.scenario);
  const auto m = make_manifest("sweep", c);
  prepare_out(c, m);
  const auto rows = sweep(scenario, c.from, c.to, c.reps, optimizer_config(c));
  write_text(fs::path(c.out) / "sweep.csv", sweep_csv(rows, m));
  const auto halt = halt_threshold(rows);
  for (const auto& r : rows) {
    std::printf("%2d platoons: mean %s%s\n", r.platoons, csv::format_double(r.mean).c_str(),
                r.sdom ? (" +/- " + csv::format_double(*r.sdom)).c_str() : "");
  }
  if (halt) std::printf("halt threshold: %d platoons\n", *halt);
  else std::printf("halt threshold: not reached\n");
  return 0;
}

int cmd_design(const Common& c) {
  const auto m = make_manifest("design", c);
  prepare_out(c, m);
  const auto d = c.design.empty() ? DesignMatrix::generate(c.seed) : DesignMatrix::load_csv(c.design);
  write_text(fs::path(c.out) / "design.csv", design_csv(d, m));
  std::printf("%dx%d design, max |column correlation| %.4f\n", d.rows, d.cols, d.max_abs_correlation());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Course-of-action generation for box-based ground combat"};
  app.require_subcommand(1);
  Common c;

  auto add_scenario = [&](CLI::App* s) {
    s->add_option("--scenario", c.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
    s->add_option("--seed", c.seed, "Random seed");
    s->add_option("--out", c.out, "Output directory");
  };
  auto add_sim = [&](CLI::App* s) {
    s->add_option("--budget", c.budget, "Rollouts per simulation")->check(CLI::PositiveNumber);
    s->add_flag("--no-branching", c.no_branching, "Blue waits after a victory instead of regrouping");
  };
  auto add_opt = [&](CLI::App* s) {
    s->add_option("--p-method", c.p_method, "Probability of a search step")->check(CLI::Range(0.0, 1.0));
    s->add_option("--batch", c.batch, "Configurations per iteration")->check(CLI::PositiveNumber);
    s->add_option("--design", c.design, "Design matrix CSV")->check(CLI::ExistingFile);
    s->add_flag("--literal-selection", c.literal_selection, "Give the highest x_value the highest selection weight");
  };

  auto* opt = app.add_subcommand("optimize", "Search for the best blue grouping");
  add_scenario(opt);
  add_sim(opt);
  add_opt(opt);
  opt->add_option("--platoons", c.platoons, "Blue platoons")->check(CLI::Range(1, 16));
  opt->add_flag("--quiet", c.quiet, "No progress output");

  auto* sim = app.add_subcommand("simulate", "Simulate one configuration and export its battle log");
  add_scenario(sim);
  add_sim(sim);
  sim->add_option("--config", c.config, "Destination box per platoon, e.g. 3,5,5,12")->required();

  auto* cl = app.add_subcommand("cluster", "Cluster an evaluated population");
  add_scenario(cl);
  cl->add_option("--population", c.population, "Population CSV (default: <out>/population.csv)");
  cl->add_option("--tau", c.tau, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
  cl->add_option("--top-k", c.top_k, "Clusters to plot")->check(CLI::PositiveNumber);

  auto* fr = app.add_subcommand("frames", "Render one simulation as SVG frames");
  add_scenario(fr);
  add_sim(fr);
  fr->add_option("--config", c.config, "Destination box per platoon")->required();

  auto* sw = app.add_subcommand("sweep", "Best value against platoon count");
  add_scenario(sw);
  add_sim(sw);
  add_opt(sw);
  sw->add_option("--from", c.from, "Smallest platoon count")->check(CLI::Range(1, 16));
  sw->add_option("--to", c.to, "Largest platoon count")->check(CLI::Range(1, 16));
  sw->add_option("--reps", c.reps, "Repetitions per count")->check(CLI::PositiveNumber);

  auto* de = app.add_subcommand("design", "Write or check a design matrix");
  de->add_option("--seed", c.seed, "Random seed");
  de->add_option("--out", c.out, "Output directory");
  de->add_option("--design", c.design, "Check this design CSV instead of generating")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (opt->parsed()) return cmd_optimize(c);
    if (sim->parsed()) return cmd_simulate(c);
    if (cl->parsed()) return cmd_cluster(c);
    if (fr->parsed()) return cmd_frames(c);
    if (sw->parsed()) {
      if (c.from > c.to) throw std::runtime_error("--from must not exceed --to");
      return cmd_sweep(c);
    }
    if (de->parsed()) return cmd_design(c);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "combgame/complexity.hpp"
#include "combgame/experiments.hpp"

using namespace combgame;

namespace {

struct ScenarioOptions {
  std::string family = "uniform_matroid";
  int d = 5;
  int k = 3;
  int n_s = 6;
  int n_n = 2;
  int n_l = 4;
  std::optional<double> sigma;
  std::string graph;
  std::uint64_t scenario_seed = 0;
};

struct ConfigOptions {
  std::string tracking = "d_track";
  std::string threshold = "stylized";
  std::string bonus = "stylized";
  double bonus_c = 1.0;
  double bonus_b = 1.0;
  bool per_answer = false;
  double delta = 0.1;
  std::int64_t max_rounds = 10'000'000;
};

int default_workers() {
  if (const char* env = std::getenv("COMBGAME_WORKERS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_parameter, std::string("COMBGAME_WORKERS is not an integer: ") + env);
    }
  }
  return 0;
}

void add_scenario_options(CLI::App* cmd, ScenarioOptions& s) {
  cmd->add_option("--scenario", s.family, "uniform_matroid, grid, line, almost_all or graph")
      ->check(CLI::IsMember({"uniform_matroid", "grid", "line", "almost_all", "graph"}));
  cmd->add_option("--d", s.d, "number of arms (uniform_matroid, almost_all)");
  cmd->add_option("--k", s.k, "action size (uniform_matroid)");
  cmd->add_option("--ns", s.n_s, "stages of the grid network");
  cmd->add_option("--nn", s.n_n, "nodes per layer of the line network");
  cmd->add_option("--nl", s.n_l, "layers of the line network");
  cmd->add_option("--sigma", s.sigma, "noise standard deviation (family default when omitted)");
  cmd->add_option("--graph", s.graph, "edge-list file for --scenario graph");
  cmd->add_option("--scenario-seed", s.scenario_seed, "seed of the random network means");
}

void add_config_options(CLI::App* cmd, ConfigOptions& c) {
  cmd->add_option("--tracking", c.tracking, "c_track, d_track or direct_sample");
  cmd->add_option("--threshold", c.threshold, "stylized, theoretical_subgaussian or theoretical_gaussian");
  cmd->add_option("--bonus", c.bonus, "stylized or theoretical");
  cmd->add_option("--bonus-c", c.bonus_c, "constant c of the theoretical bonus");
  cmd->add_option("--bonus-b", c.bonus_b, "constant b of the theoretical bonus");
  cmd->add_flag("--per-answer-learners", c.per_answer, "one learner per candidate answer");
  cmd->add_option("--delta", c.delta, "confidence level");
  cmd->add_option("--max-rounds", c.max_rounds, "round budget per run");
}

Scenario build_scenario(const ScenarioOptions& s) {
  if (s.family == "uniform_matroid") {
    return scenario_uniform_matroid(s.d, s.k, s.sigma.value_or(s.k == 2 ? 0.035 : 0.1));
  }
  if (s.family == "grid") return scenario_grid_network(s.n_s, s.sigma.value_or(0.075), s.scenario_seed);
  if (s.family == "line") return scenario_line_network(s.n_n, s.n_l, s.sigma.value_or(0.2), s.scenario_seed);
  if (s.family == "almost_all") return scenario_almost_all_sets(s.d, s.sigma.value_or(0.25));
  if (s.graph.empty()) throw Error(Errc::invalid_parameter, "--scenario graph needs --graph");
  return scenario_from_graph("graph", read_graph_file(s.graph), s.sigma.value_or(0.2), s.scenario_seed);
}

GameConfig build_config(const ConfigOptions& c, LearnerKind learner) {
  GameConfig cfg;
  cfg.learner = learner;
  cfg.tracking = parse_tracking_kind(c.tracking.c_str());
  cfg.threshold_mode = parse_threshold_mode(c.threshold.c_str());
  cfg.bonus_mode = parse_bonus_mode(c.bonus.c_str());
  cfg.bonus_c = c.bonus_c;
  cfg.bonus_b = c.bonus_b;
  cfg.per_answer_learners = c.per_answer;
  cfg.delta = c.delta;
  cfg.max_rounds = c.max_rounds;
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const BatchSummary& s) {
  return {{"scenario", s.scenario},
          {"learner", s.learner},
          {"tracking", s.tracking},
          {"threshold_mode", s.threshold_mode},
          {"d", s.d},
          {"runs", s.runs},
          {"delta", s.delta},
          {"mean_tau", s.mean_tau},
          {"q1_tau", s.q1_tau},
          {"q3_tau", s.q3_tau},
          {"error_count", s.error_count},
          {"budget_exceeded", s.budget_exceeded},
          {"mean_round_nanos", s.mean_round_nanos},
          {"mean_support_size", s.mean_support_size}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path);
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-confidence pure exploration in combinatorial semi-bandits"};
  app.set_config("--config", "", "TOML or INI file holding any of the flags");
  app.require_subcommand(1);

  ScenarioOptions scenario_opts;
  ConfigOptions config_opts;

  auto* run = app.add_subcommand("run", "Monte-Carlo batch of runs, one CSV row per learner");
  std::vector<std::string> learners{"lloo"};
  std::int64_t runs = 50;
  std::uint64_t seed = 1;
  int workers = -1;
  std::string out_path;
  std::string json_path;
  add_scenario_options(run, scenario_opts);
  add_config_options(run, config_opts);
  run->add_option("--learner", learners, "hedge, adahedge, ofw, lloo, uniform (repeat or comma-separate)")
      ->delimiter(',');
  run->add_option("--runs", runs, "independent runs per learner")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "batch seed");
  run->add_option("--workers", workers, "worker threads (default $COMBGAME_WORKERS, else all cores)");
  run->add_option("--out", out_path, "CSV output path (stdout when omitted)");
  run->add_option("--json", json_path, "also write the summaries as JSON");

  auto* complexity = app.add_subcommand("complexity", "Complexity D and the stopping-time lower bound");
  double tol = 1e-6;
  std::int64_t max_iter = 100000;
  add_scenario_options(complexity, scenario_opts);
  complexity->add_option("--delta", config_opts.delta, "confidence level of the lower bound");
  complexity->add_option("--tol", tol, "certified gap tolerance");
  complexity->add_option("--max-iter", max_iter, "Frank-Wolfe iteration cap");

  auto* trace = app.add_subcommand("trace", "Per-round trace of one run");
  std::string trace_learner = "lloo";
  std::int64_t run_index = 0;
  add_scenario_options(trace, scenario_opts);
  add_config_options(trace, config_opts);
  trace->add_option("--learner", trace_learner, "learner of the traced run");
  trace->add_option("--seed", seed, "batch seed");
  trace->add_option("--run-index", run_index, "index of the run inside the batch");
  trace->add_option("--out", out_path, "trace output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    const Scenario scenario = build_scenario(scenario_opts);

    if (*run) {
      if (workers < 0) workers = default_workers();
      std::vector<BatchSummary> summaries;
      for (const auto& name : learners) {
        const GameConfig cfg = build_config(config_opts, parse_learner_kind(name.c_str()));
        summaries.push_back(run_batch(scenario, cfg, runs, seed, workers));
        const auto& s = summaries.back();
        std::fprintf(stderr, "%s %s: mean tau %.1f, errors %lld/%lld\n", s.scenario.c_str(), s.learner.c_str(),
                     s.mean_tau, static_cast<long long>(s.error_count), static_cast<long long>(s.runs));
      }
      if (out_path.empty()) {
        write_csv(summaries, std::cout);
      } else {
        emit_csv(summaries, out_path);
      }
      if (!json_path.empty()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& s : summaries) doc.push_back(to_json(s));
        write_text(json_path, doc.dump(2) + "\n");
      }
    } else if (*complexity) {
      const ComplexityResult r =
          compute_complexity(scenario.instance, *scenario.actions, *scenario.answers, tol, max_iter);
      const LowerBound lb = lower_bound(config_opts.delta, r.value);
      nlohmann::json doc = {{"scenario", scenario.name},
                            {"complexity", r.value},
                            {"characteristic_time", r.value > 0.0 ? 1.0 / r.value : 0.0},
                            {"residual", r.residual},
                            {"iterations", r.iterations},
                            {"allocation", r.allocation},
                            {"delta", config_opts.delta},
                            {"lower_bound", lb.value},
                            {"vacuous", lb.vacuous}};
      std::cout << doc.dump(2) << "\n";
    } else if (*trace) {
      GameConfig cfg = build_config(config_opts, parse_learner_kind(trace_learner.c_str()));
      cfg.record_trace = true;
      Rng rng = run_rng(seed, run_index);
      const RunResult r = run_combgame(cfg, scenario.instance, *scenario.actions, *scenario.answers, rng);
      if (out_path.empty()) {
        write_run_trace(r, std::cout);
      } else {
        emit_run_trace(r, out_path);
      }
      std::fprintf(stderr, "tau %lld, recommended %s, %s\n", static_cast<long long>(r.stopping_time),
                   format_arm_set(r.recommended).c_str(), r.correct ? "correct" : "wrong");
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

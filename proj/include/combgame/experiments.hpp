#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "combgame/bandit.hpp"
#include "combgame/game.hpp"
#include "combgame/structures.hpp"

namespace combgame {

struct Scenario {
  std::string name;
  BanditInstance instance;
  ActionSpacePtr actions;
  std::shared_ptr<const AnswerSpace> answers;
  ArmSet expected_best;

  int dimension() const { return instance.dimension(); }
};

// Mean vector of the uniform-matroid benchmark for d in {5, 10, ..., 50}.
std::vector<double> uniform_matroid_means(int d);
// Mean vector of the almost-all-sets benchmark for d in {7, ..., 14}.
std::vector<double> almost_all_sets_means(int d);
// N(0.2, 0.025²) draws, sorted decreasingly, first entry raised by 0.025.
std::vector<double> network_means(int d, std::uint64_t seed);

Dag grid_network(int n_s);
Dag line_network(int n_n, int n_l);

Scenario scenario_uniform_matroid(int d, int k, double sigma);
Scenario scenario_grid_network(int n_s, double sigma, std::uint64_t seed);
Scenario scenario_line_network(int n_n, int n_l, double sigma, std::uint64_t seed);
Scenario scenario_almost_all_sets(int d, double sigma);
// Best-arm identification by playing source-sink paths of a user graph.
Scenario scenario_from_graph(const std::string& name, Dag dag, double sigma, std::uint64_t seed);

// Reads "source S", "sink T" and "u v arm" lines; '#' starts a comment.
Dag read_graph(std::istream& in);
Dag read_graph_file(const std::string& path);

struct BatchSummary {
  std::string scenario;
  std::string learner;
  std::string tracking;
  std::string threshold_mode;
  int d = 0;
  std::int64_t runs = 0;
  double delta = 0.0;
  double mean_tau = 0.0;
  double q1_tau = 0.0;
  double q3_tau = 0.0;
  std::int64_t error_count = 0;
  double mean_round_nanos = 0.0;
  double mean_support_size = 0.0;

  // not serialized
  std::int64_t budget_exceeded = 0;
  std::int64_t tracking_violations = 0;
  std::int64_t tracking_checks = 0;
  double max_weight_drift = 0.0;
  std::vector<std::int64_t> taus;

  bool operator==(const BatchSummary&) const = default;
};

// Per-run generator derived from (seed, index) only.
Rng run_rng(std::uint64_t seed, std::int64_t index);

// Runs are independent and keyed by index, so the summary does not depend
// on `workers` (0 picks the hardware concurrency).
BatchSummary run_batch(const Scenario& scenario, const GameConfig& config, std::int64_t runs, std::uint64_t seed,
                       int workers);

// Type-7 (linear interpolation) quantile of a sample.
double quantile(std::vector<double> values, double q);

extern const char* const kCsvHeader;
void write_csv(const std::vector<BatchSummary>& summaries, std::ostream& out);
void emit_csv(const std::vector<BatchSummary>& summaries, const std::string& path);
std::vector<BatchSummary> read_csv(std::istream& in);

void write_run_trace(const RunResult& result, std::ostream& out);
void emit_run_trace(const RunResult& result, const std::string& path);

}  // namespace combgame

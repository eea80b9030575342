#include "combgame/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

namespace combgame {

namespace {

const std::vector<double>& matroid_table() {
  // μ_{4:50}: blocks appended for d = 10, 15, ..., 50
  static const std::vector<double> tail = {
      0.232, 0.224, 0.207, 0.200, 0.192, 0.182, 0.176,  // d = 10
      0.214, 0.199, 0.195, 0.190, 0.164,                // 15
      0.185, 0.19, 0.195, 0.199, 0.214,                 // 20
      0.158, 0.172, 0.211, 0.228, 0.244,                // 25
      0.174, 0.18, 0.194, 0.202, 0.23, 0.242,           // 30
      0.17, 0.178, 0.219, 0.222, 0.226,                 // 35
      0.197, 0.198, 0.201, 0.203, 0.205,                // 40
      0.193, 0.206, 0.208, 0.21,                        // 45
      0.188, 0.189, 0.191, 0.212, 0.213,                // 50
  };
  return tail;
}

}  // namespace

std::vector<double> uniform_matroid_means(int d) {
  if (d == 5) return {0.3, 0.29, 0.28, 0.23, 0.2};
  if (d < 10 || d > 50 || d % 5 != 0) throw Error(Errc::invalid_parameter, "uniform matroid needs d in {5, 10, ..., 50}");
  std::vector<double> mu = {0.3, 0.29, 0.28};
  const auto& tail = matroid_table();
  mu.insert(mu.end(), tail.begin(), tail.begin() + (d - 3));
  return mu;
}

std::vector<double> almost_all_sets_means(int d) {
  if (d < 7 || d > 14) throw Error(Errc::invalid_parameter, "almost-all-sets needs d in {7, ..., 14}");
  static const std::vector<double> all = {0.3,  0.24, 0.23, 0.22,  0.21,  0.2,   0.19,
                                          0.18, 0.17, 0.16, 0.215, 0.195, 0.205, 0.185};
  return {all.begin(), all.begin() + d};
}

std::vector<double> network_means(int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> draw(0.2, 0.025);
  std::vector<double> mu(static_cast<std::size_t>(d));
  for (auto& x : mu) x = draw(rng);
  std::sort(mu.begin(), mu.end(), std::greater<>());
  mu[0] += 0.025;
  return mu;
}

namespace {

// Numbers edges in list order except that `first` gets arm 0.
Dag number_edges(int num_nodes, int source, int sink, const std::vector<std::pair<int, int>>& edges,
                 std::pair<int, int> first) {
  Dag dag{num_nodes, source, sink, {}};
  int next = 1;
  for (const auto& [u, v] : edges) {
    const bool special = u == first.first && v == first.second;
    dag.edges.push_back({u, v, special ? 0 : next++});
  }
  if (next != static_cast<int>(edges.size())) throw Error(Errc::invalid_graph, "distinguished edge missing");
  return dag;
}

}  // namespace

Dag grid_network(int n_s) {
  if (n_s < 2 || n_s % 2 != 0) throw Error(Errc::invalid_parameter, "grid needs an even number of stages >= 2");
  const int m = n_s / 2;
  auto node = [m](int i, int j) { return i * (m + 1) + j; };
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (j < m) edges.emplace_back(node(i, j), node(i, j + 1));
      if (i < m) edges.emplace_back(node(i, j), node(i + 1, j));
    }
  }
  // arm 0 sits on the single path going down first, then right
  return number_edges((m + 1) * (m + 1), node(0, 0), node(m, m), edges, {node(m, 0), node(m, 1)});
}

Dag line_network(int n_n, int n_l) {
  if (n_n < 2 || n_l < 2) throw Error(Errc::invalid_parameter, "line network needs n_n >= 2 and n_l >= 2");
  const int source = 0;
  const int sink = 1 + n_l * n_n;
  auto node = [n_n](int layer, int j) { return 1 + layer * n_n + j; };
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < n_n; ++j) edges.emplace_back(source, node(0, j));
  for (int l = 0; l + 1 < n_l; ++l) {
    for (int i = 0; i < n_n; ++i) {
      for (int j = 0; j < n_n; ++j) edges.emplace_back(node(l, i), node(l + 1, j));
    }
  }
  for (int j = 0; j < n_n; ++j) edges.emplace_back(node(n_l - 1, j), sink);
  return number_edges(sink + 1, source, sink, edges, {node(0, 0), node(1, 0)});
}

namespace {

Scenario finish(std::string name, std::vector<double> means, double sigma, ActionSpacePtr actions,
                std::shared_ptr<const AnswerSpace> answers) {
  Scenario s;
  s.name = std::move(name);
  s.instance = make_gaussian(std::move(means), sigma);
  s.actions = std::move(actions);
  s.answers = std::move(answers);
  if (s.actions->dimension() != s.instance.dimension()) throw Error(Errc::invalid_parameter, "dimension mismatch");
  s.expected_best = s.answers->best(s.instance.means);
  const double top = set_sum(s.expected_best, s.instance.means);
  s.answers->for_each_neighbor(s.expected_best, [&](const ArmSet& j) {
    if (set_sum(j, s.instance.means) >= top) throw Error(Errc::degenerate_instance, "best answer is not unique");
  });
  return s;
}

std::string fmt(const char* pattern, int a, int b = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

Scenario scenario_uniform_matroid(int d, int k, double sigma) {
  if (k < 1 || k >= d) throw Error(Errc::invalid_parameter, "k must lie in [1, d)");
  auto answers = std::make_shared<const AnswerSpace>(AnswerSpace::singletons(d));
  return finish(fmt("uniform_matroid_d%d_k%d", d, k), uniform_matroid_means(d), sigma, make_top_k(d, k),
                std::move(answers));
}

Scenario scenario_from_graph(const std::string& name, Dag dag, double sigma, std::uint64_t seed) {
  ActionSpacePtr actions = make_dag_paths(std::move(dag));
  const int d = actions->dimension();
  auto answers = std::make_shared<const AnswerSpace>(AnswerSpace::singletons(d));
  return finish(name, network_means(d, seed), sigma, std::move(actions), std::move(answers));
}

Scenario scenario_grid_network(int n_s, double sigma, std::uint64_t seed) {
  return scenario_from_graph(fmt("grid_network_ns%d", n_s), grid_network(n_s), sigma, seed);
}

Scenario scenario_line_network(int n_n, int n_l, double sigma, std::uint64_t seed) {
  return scenario_from_graph(fmt("line_network_nn%d_nl%d", n_n, n_l), line_network(n_n, n_l), sigma, seed);
}

Scenario scenario_almost_all_sets(int d, double sigma) {
  auto answers = std::make_shared<const AnswerSpace>(AnswerSpace::singletons(d));
  return finish(fmt("almost_all_sets_d%d", d), almost_all_sets_means(d), sigma, make_almost_all_sets(d, 0),
                std::move(answers));
}

Dag read_graph(std::istream& in) {
  Dag dag;
  bool has_source = false, has_sink = false;
  int max_node = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    auto fail = [&] { throw Error(Errc::invalid_graph, "malformed graph line " + std::to_string(line_no)); };
    if (first == "source" || first == "sink") {
      int v;
      if (!(ls >> v)) fail();
      (first == "source" ? dag.source : dag.sink) = v;
      (first == "source" ? has_source : has_sink) = true;
      max_node = std::max(max_node, v);
      continue;
    }
    DagEdge e{};
    try {
      e.from = std::stoi(first);
    } catch (const std::exception&) {
      fail();
    }
    if (!(ls >> e.to >> e.arm)) fail();
    dag.edges.push_back(e);
    max_node = std::max({max_node, e.from, e.to});
  }
  if (!has_source || !has_sink) throw Error(Errc::invalid_graph, "graph needs source and sink lines");
  dag.num_nodes = max_node + 1;
  return dag;
}

Dag read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open graph file '" + path + "'");
  return read_graph(in);
}

// ---------------------------------------------------------------------------

Rng run_rng(std::uint64_t seed, std::int64_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  return Rng(seq);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(Errc::invalid_parameter, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BatchSummary run_batch(const Scenario& scenario, const GameConfig& config, std::int64_t runs, std::uint64_t seed,
                       int workers) {
  if (runs < 1) throw Error(Errc::invalid_parameter, "runs must be positive");
  config.validate();
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::int64_t>(workers, runs));

  // expensive lazily-computed geometry is shared; build it before fanning out
  if (!uses_full_initialization(config.learner)) scenario.actions->covering();
  if (config.learner == LearnerKind::ofw || config.learner == LearnerKind::lloo) scenario.actions->polytope();

  std::vector<RunResult> results(static_cast<std::size_t>(runs));
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int worker) {
    try {
      for (std::int64_t i = next++; i < runs; i = next++) {
        Rng rng = run_rng(seed, i);
        results[static_cast<std::size_t>(i)] =
            run_combgame(config, scenario.instance, *scenario.actions, *scenario.answers, rng);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(worker)] = std::current_exception();
      next = runs;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BatchSummary s;
  s.scenario = scenario.name;
  s.learner = to_string(config.learner);
  s.tracking = to_string(config.tracking);
  s.threshold_mode = to_string(config.threshold_mode);
  s.d = scenario.dimension();
  s.runs = runs;
  s.delta = config.delta;
  std::vector<double> taus;
  double nanos = 0.0, support = 0.0;
  for (const auto& r : results) {
    s.taus.push_back(r.stopping_time);
    taus.push_back(static_cast<double>(r.stopping_time));
    s.error_count += !r.correct;
    s.budget_exceeded += r.budget_exceeded;
    s.tracking_violations += r.tracking_violations;
    s.tracking_checks += r.tracking_checks;
    s.max_weight_drift = std::max(s.max_weight_drift, r.max_weight_drift);
    nanos += r.mean_round_nanos;
    support += r.mean_support_size;
  }
  const auto n = static_cast<double>(runs);
  s.mean_tau = std::accumulate(taus.begin(), taus.end(), 0.0) / n;
  s.q1_tau = quantile(taus, 0.25);
  s.q3_tau = quantile(taus, 0.75);
  s.mean_round_nanos = nanos / n;
  s.mean_support_size = support / n;
  return s;
}

// ---------------------------------------------------------------------------

const char* const kCsvHeader =
    "scenario,learner,tracking,threshold_mode,d,runs,delta,mean_tau,q1_tau,q3_tau,error_count,mean_round_nanos,"
    "mean_support_size";

namespace {

std::string real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(const std::vector<BatchSummary>& summaries, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& s : summaries) {
    out << s.scenario << ',' << s.learner << ',' << s.tracking << ',' << s.threshold_mode << ',' << s.d << ','
        << s.runs << ',' << real(s.delta) << ',' << real(s.mean_tau) << ',' << real(s.q1_tau) << ','
        << real(s.q3_tau) << ',' << s.error_count << ',' << real(s.mean_round_nanos) << ','
        << real(s.mean_support_size) << '\n';
  }
}

void emit_csv(const std::vector<BatchSummary>& summaries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  write_csv(summaries, out);
  if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

std::vector<BatchSummary> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(Errc::io, "unexpected CSV header");
  std::vector<BatchSummary> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw Error(Errc::io, "CSV row has " + std::to_string(f.size()) + " fields");
    BatchSummary s;
    s.scenario = f[0];
    s.learner = f[1];
    s.tracking = f[2];
    s.threshold_mode = f[3];
    s.d = std::stoi(f[4]);
    s.runs = std::stoll(f[5]);
    s.delta = std::stod(f[6]);
    s.mean_tau = std::stod(f[7]);
    s.q1_tau = std::stod(f[8]);
    s.q3_tau = std::stod(f[9]);
    s.error_count = std::stoll(f[10]);
    s.mean_round_nanos = std::stod(f[11]);
    s.mean_support_size = std::stod(f[12]);
    out.push_back(std::move(s));
  }
  return out;
}

void write_run_trace(const RunResult& result, std::ostream& out) {
  out << "t,action,statistic,beta,candidate,support_size\n";
  for (const auto& r : result.trace) {
    out << r.t << ',' << format_arm_set(r.action) << ',' << real(r.statistic) << ',' << real(r.beta) << ','
        << format_arm_set(r.candidate) << ',' << r.support_size << '\n';
  }
}

void emit_run_trace(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  write_run_trace(result, out);
  if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

}  // namespace combgame

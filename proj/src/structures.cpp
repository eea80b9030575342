#include "combgame/structures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace combgame {

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::top_k: return "top_k";
    case SpaceKind::dag_paths: return "dag_paths";
    case SpaceKind::explicit_list: return "explicit_list";
    case SpaceKind::almost_all_sets: return "almost_all_sets";
  }
  return "unknown";
}

namespace {

std::uint64_t binomial_saturating(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t add_saturating(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

InequalitySystem nonnegativity_rows(int d, const std::vector<int>& arms) {
  InequalitySystem sys{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(arms.size()), d),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arms.size()))};
  for (std::size_t r = 0; r < arms.size(); ++r) sys.a(static_cast<Eigen::Index>(r), arms[r]) = -1.0;
  return sys;
}

int set_symmetric_difference_size(const ArmSet& x, const ArmSet& y) {
  std::size_t i = 0, j = 0;
  int common = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) {
      ++common;
      ++i;
      ++j;
    } else if (x[i] < y[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<int>(x.size() + y.size()) - 2 * common;
}

// ---------------------------------------------------------------------------

class TopKSpace final : public ActionSpace {
 public:
  TopKSpace(int d, int k) : ActionSpace(SpaceKind::top_k, d, k), k_(k) {
    if (k < 1 || k > d) throw Error(Errc::invalid_parameter, "k out of range");
    if (count() <= kEnumerationLimit) {
      std::vector<ArmSet> all;
      ArmSet cur(static_cast<std::size_t>(k));
      std::iota(cur.begin(), cur.end(), 0);
      while (true) {
        all.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == d - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
      }
      set_enumeration(std::move(all));
    }
  }

  ArmSet argmax(std::span<const double> cost) const override { return linmax_topk(cost, k_); }
  std::uint64_t count() const override { return binomial_saturating(dimension(), k_); }

  std::optional<InequalitySystem> inequality_description() const override {
    const int d = dimension();
    InequalitySystem sys{Eigen::MatrixXd::Zero(2 * d, d), Eigen::VectorXd::Zero(2 * d)};
    for (int i = 0; i < d; ++i) {
      sys.a(i, i) = -1.0;
      sys.a(d + i, i) = 1.0;
      sys.b(d + i) = 1.0;
    }
    return sys;
  }
  std::optional<double> diameter_closed_form() const override {
    return std::sqrt(2.0 * std::min(k_, dimension() - k_));
  }
  std::optional<double> phi_closed_form() const override { return 1.0; }

 private:
  int k_;
};

class DagPathSpace final : public ActionSpace {
 public:
  explicit DagPathSpace(PathOracle oracle)
      : ActionSpace(SpaceKind::dag_paths, oracle.num_arms(), oracle.longest_path_edges()),
        oracle_(std::move(oracle)) {
    if (oracle_.path_count() <= kEnumerationLimit) set_enumeration(oracle_.enumerate_paths());
  }

  ArmSet argmax(std::span<const double> cost) const override { return oracle_.solve(cost).arms; }
  std::uint64_t count() const override { return oracle_.path_count(); }

  std::optional<InequalitySystem> inequality_description() const override {
    std::vector<int> arms(static_cast<std::size_t>(dimension()));
    std::iota(arms.begin(), arms.end(), 0);
    return nonnegativity_rows(dimension(), arms);
  }
  // Attained when two edge-disjoint longest paths exist; an upper bound otherwise.
  std::optional<double> diameter_closed_form() const override {
    return std::sqrt(2.0 * oracle_.longest_path_edges());
  }
  std::optional<double> phi_closed_form() const override { return 1.0; }

  const PathOracle& oracle() const { return oracle_; }

 private:
  PathOracle oracle_;
};

class ExplicitSpace final : public ActionSpace {
 public:
  ExplicitSpace(int d, std::vector<ArmSet> actions)
      : ActionSpace(SpaceKind::explicit_list, d, max_size(actions)) {
    if (actions.empty()) throw Error(Errc::invalid_parameter, "empty action list");
    for (auto& a : actions) {
      std::sort(a.begin(), a.end());
      if (a.empty()) throw Error(Errc::invalid_action, "empty action");
      if (std::adjacent_find(a.begin(), a.end()) != a.end()) throw Error(Errc::invalid_action, "repeated arm");
      if (a.front() < 0 || a.back() >= d) throw Error(Errc::invalid_action, "arm index out of range");
    }
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    all_singletons_ = std::all_of(actions.begin(), actions.end(), [](const ArmSet& a) { return a.size() == 1; });
    set_enumeration(std::move(actions));
  }

  ArmSet argmax(std::span<const double> cost) const override {
    const auto& all = actions();
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double v = set_sum(all[i], cost);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    return all[best];
  }
  std::uint64_t count() const override { return actions().size(); }

  // Only faces of the probability simplex have a known description.
  std::optional<InequalitySystem> inequality_description() const override {
    if (!all_singletons_) return std::nullopt;
    std::vector<int> arms;
    for (const auto& a : actions()) arms.push_back(a[0]);
    return nonnegativity_rows(dimension(), arms);
  }
  std::optional<double> phi_closed_form() const override {
    if (all_singletons_) return 1.0;
    return std::nullopt;
  }

 private:
  static int max_size(const std::vector<ArmSet>& actions) {
    std::size_t m = 0;
    for (const auto& a : actions) m = std::max(m, a.size());
    return static_cast<int>(m);
  }
  bool all_singletons_ = false;
};

class AlmostAllSetsSpace final : public ActionSpace {
 public:
  AlmostAllSetsSpace(int d, int best) : ActionSpace(SpaceKind::almost_all_sets, d, d - 1), best_(best) {
    if (d < 2 || d > 62) throw Error(Errc::invalid_parameter, "almost-all-sets dimension out of range");
    if (best < 0 || best >= d) throw Error(Errc::invalid_parameter, "best arm out of range");
    if (count() <= kEnumerationLimit) {
      std::vector<ArmSet> all;
      all.push_back({best});
      for (std::uint64_t mask = 1; mask < (1ull << d); ++mask) {
        if (mask & (1ull << best)) continue;
        ArmSet s;
        for (int a = 0; a < d; ++a) {
          if (mask & (1ull << a)) s.push_back(a);
        }
        all.push_back(std::move(s));
      }
      set_enumeration(std::move(all));
    }
  }

  ArmSet argmax(std::span<const double> cost) const override {
    const int d = dimension();
    ArmSet others;
    double others_value = 0.0;
    for (int a = 0; a < d; ++a) {
      if (a != best_ && cost[static_cast<std::size_t>(a)] > 0.0) {
        others.push_back(a);
        others_value += cost[static_cast<std::size_t>(a)];
      }
    }
    if (others.empty()) {
      int arg = -1;
      for (int a = 0; a < d; ++a) {
        if (a == best_) continue;
        if (arg < 0 || cost[static_cast<std::size_t>(a)] > cost[static_cast<std::size_t>(arg)]) arg = a;
      }
      others = {arg};
      others_value = cost[static_cast<std::size_t>(arg)];
    }
    const double best_value = cost[static_cast<std::size_t>(best_)];
    ArmSet single{best_};
    if (best_value > others_value) return single;
    if (others_value > best_value) return others;
    return std::min(single, others);
  }

  std::uint64_t count() const override {
    const int d = dimension();
    return d >= 65 ? std::numeric_limits<std::uint64_t>::max() : (1ull << (d - 1));
  }

  // conv = {x : x_b >= 0, x_i + x_b <= 1, x_i >= 0, sum x >= 1} (i != b).
  std::optional<InequalitySystem> inequality_description() const override {
    const int d = dimension();
    const int rows = 1 + 2 * (d - 1) + 1;
    InequalitySystem sys{Eigen::MatrixXd::Zero(rows, d), Eigen::VectorXd::Zero(rows)};
    int r = 0;
    sys.a(r++, best_) = -1.0;
    for (int i = 0; i < d; ++i) {
      if (i == best_) continue;
      sys.a(r, i) = 1.0;
      sys.a(r, best_) = 1.0;
      sys.b(r) = 1.0;
      ++r;
    }
    for (int i = 0; i < d; ++i) {
      if (i == best_) continue;
      sys.a(r++, i) = -1.0;
    }
    sys.a.row(r).setConstant(-1.0);
    sys.b(r) = -1.0;
    return sys;
  }
  std::optional<double> diameter_closed_form() const override { return std::sqrt(static_cast<double>(dimension())); }
  std::optional<double> phi_closed_form() const override { return 1.0; }

 private:
  int best_;
};

// Exact minimum set cover by depth-first branch and bound, bounded by a node budget.
class CoverSearch {
 public:
  CoverSearch(int d, const std::vector<ArmSet>& sets, std::size_t node_budget)
      : d_(d), sets_(sets), budget_(node_budget), containing_(static_cast<std::size_t>(d)) {
    for (std::size_t s = 0; s < sets.size(); ++s) {
      for (int a : sets[s]) containing_[static_cast<std::size_t>(a)].push_back(static_cast<int>(s));
    }
    co_occur_.assign(static_cast<std::size_t>(d), std::vector<char>(static_cast<std::size_t>(d), 0));
    for (const auto& s : sets) {
      for (int a : s) {
        for (int b : s) co_occur_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
      }
    }
    for (const auto& s : sets) max_size_ = std::max(max_size_, static_cast<int>(s.size()));
  }

  // Improves `best` in place; returns true when the search finished within budget.
  bool run(std::vector<int>& best) {
    best_ = best;
    std::vector<int> cover_count(static_cast<std::size_t>(d_), 0);
    std::vector<int> chosen;
    dfs(cover_count, chosen);
    best = best_;
    return nodes_ <= budget_;
  }

 private:
  int lower_bound(const std::vector<int>& cover_count) const {
    std::vector<int> uncovered;
    for (int a = 0; a < d_; ++a) {
      if (cover_count[static_cast<std::size_t>(a)] == 0) uncovered.push_back(a);
    }
    if (uncovered.empty()) return 0;
    int bound = static_cast<int>((uncovered.size() + static_cast<std::size_t>(max_size_) - 1) /
                                 static_cast<std::size_t>(max_size_));
    // arms pairwise never pulled together need distinct actions
    std::sort(uncovered.begin(), uncovered.end(), [&](int x, int y) {
      const auto cx = containing_[static_cast<std::size_t>(x)].size();
      const auto cy = containing_[static_cast<std::size_t>(y)].size();
      return cx != cy ? cx < cy : x < y;
    });
    std::vector<int> packed;
    for (int a : uncovered) {
      bool ok = true;
      for (int p : packed) {
        if (co_occur_[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]) {
          ok = false;
          break;
        }
      }
      if (ok) packed.push_back(a);
    }
    return std::max(bound, static_cast<int>(packed.size()));
  }

  void dfs(std::vector<int>& cover_count, std::vector<int>& chosen) {
    if (++nodes_ > budget_) return;
    int pick = -1;
    for (int a = 0; a < d_; ++a) {
      if (cover_count[static_cast<std::size_t>(a)] != 0) continue;
      if (pick < 0 || containing_[static_cast<std::size_t>(a)].size() < containing_[static_cast<std::size_t>(pick)].size()) {
        pick = a;
      }
    }
    if (pick < 0) {
      if (chosen.size() < best_.size()) best_ = chosen;
      return;
    }
    if (chosen.size() + static_cast<std::size_t>(lower_bound(cover_count)) >= best_.size()) return;
    std::vector<int> candidates = containing_[static_cast<std::size_t>(pick)];
    auto gain = [&](int s) {
      int g = 0;
      for (int a : sets_[static_cast<std::size_t>(s)]) g += cover_count[static_cast<std::size_t>(a)] == 0;
      return g;
    };
    std::stable_sort(candidates.begin(), candidates.end(), [&](int x, int y) { return gain(x) > gain(y); });
    for (int s : candidates) {
      for (int a : sets_[static_cast<std::size_t>(s)]) ++cover_count[static_cast<std::size_t>(a)];
      chosen.push_back(s);
      dfs(cover_count, chosen);
      chosen.pop_back();
      for (int a : sets_[static_cast<std::size_t>(s)]) --cover_count[static_cast<std::size_t>(a)];
      if (nodes_ > budget_) return;
    }
  }

  int d_;
  const std::vector<ArmSet>& sets_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  int max_size_ = 1;
  std::vector<std::vector<int>> containing_;
  std::vector<std::vector<char>> co_occur_;
  std::vector<int> best_;
};

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

int matrix_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const std::vector<int>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
  return m;
}

bool signed_unit_rows(const Eigen::MatrixXd& a) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    int nonzero = 0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double v = a(r, c);
      if (v == 0.0) continue;
      if (std::abs(v) != 1.0) return false;
      ++nonzero;
    }
    if (nonzero != 1) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

ActionSpace::ActionSpace(SpaceKind kind, int d, int max_size) : kind_(kind), d_(d), max_size_(max_size) {
  if (d < 1) throw Error(Errc::invalid_parameter, "dimension must be positive");
}

void ActionSpace::set_enumeration(std::vector<ArmSet> actions) {
  std::sort(actions.begin(), actions.end());
  enumeration_ = std::move(actions);
}

const std::vector<ArmSet>& ActionSpace::actions() const {
  if (!enumeration_) throw Error(Errc::invalid_parameter, "action space is too large to enumerate");
  return *enumeration_;
}

const PolytopeParams& ActionSpace::polytope() const {
  std::call_once(polytope_once_, [this] { polytope_ = polytope_params(*this); });
  return polytope_;
}

const std::vector<ArmSet>& ActionSpace::covering() const {
  std::call_once(covering_once_, [this] { covering_ = covering_initialization(*this); });
  return covering_;
}

ArmSet linmax_topk(std::span<const double> cost, int k) {
  const int d = static_cast<int>(cost.size());
  if (k < 1 || k > d) throw Error(Errc::invalid_parameter, "k out of range");
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](int x, int y) {
    const double cx = cost[static_cast<std::size_t>(x)];
    const double cy = cost[static_cast<std::size_t>(y)];
    return cx != cy ? cx > cy : x < y;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
  ArmSet out(idx.begin(), idx.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

PathOracle::PathOracle(Dag dag) : dag_(std::move(dag)) {
  const int n = dag_.num_nodes;
  if (n < 2) throw Error(Errc::invalid_graph, "graph needs at least two nodes");
  if (dag_.source < 0 || dag_.source >= n || dag_.sink < 0 || dag_.sink >= n || dag_.source == dag_.sink) {
    throw Error(Errc::invalid_graph, "bad source or sink");
  }
  const auto m = dag_.edges.size();
  if (m == 0) throw Error(Errc::no_path, "graph has no edges");
  std::vector<char> arm_seen(m, 0);
  for (const auto& e : dag_.edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) throw Error(Errc::invalid_graph, "edge endpoint out of range");
    if (e.arm < 0 || static_cast<std::size_t>(e.arm) >= m || arm_seen[static_cast<std::size_t>(e.arm)]) {
      throw Error(Errc::invalid_graph, "edge arms must be a permutation of 0..E-1");
    }
    arm_seen[static_cast<std::size_t>(e.arm)] = 1;
  }
  num_arms_ = static_cast<int>(m);
  in_edges_.assign(static_cast<std::size_t>(n), {});
  out_edges_.assign(static_cast<std::size_t>(n), {});
  for (std::size_t i = 0; i < m; ++i) {
    out_edges_[static_cast<std::size_t>(dag_.edges[i].from)].push_back(static_cast<int>(i));
    in_edges_[static_cast<std::size_t>(dag_.edges[i].to)].push_back(static_cast<int>(i));
  }
  auto by_arm = [&](int x, int y) { return dag_.edges[static_cast<std::size_t>(x)].arm < dag_.edges[static_cast<std::size_t>(y)].arm; };
  for (auto& v : out_edges_) std::sort(v.begin(), v.end(), by_arm);
  for (auto& v : in_edges_) std::sort(v.begin(), v.end(), by_arm);

  // Kahn's algorithm, smallest node first
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (const auto& e : dag_.edges) ++indeg[static_cast<std::size_t>(e.to)];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (int e : out_edges_[static_cast<std::size_t>(v)]) {
      const int w = dag_.edges[static_cast<std::size_t>(e)].to;
      if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(topo_.size()) != n) throw Error(Errc::invalid_graph, "cycle detected");

  std::vector<char> fwd(static_cast<std::size_t>(n), 0), bwd(static_cast<std::size_t>(n), 0);
  fwd[static_cast<std::size_t>(dag_.source)] = 1;
  for (int v : topo_) {
    if (!fwd[static_cast<std::size_t>(v)]) continue;
    for (int e : out_edges_[static_cast<std::size_t>(v)]) fwd[static_cast<std::size_t>(dag_.edges[static_cast<std::size_t>(e)].to)] = 1;
  }
  bwd[static_cast<std::size_t>(dag_.sink)] = 1;
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    if (!bwd[static_cast<std::size_t>(*it)]) continue;
    for (int e : in_edges_[static_cast<std::size_t>(*it)]) bwd[static_cast<std::size_t>(dag_.edges[static_cast<std::size_t>(e)].from)] = 1;
  }
  if (!fwd[static_cast<std::size_t>(dag_.sink)]) throw Error(Errc::no_path, "sink unreachable from source");
  useful_.assign(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) useful_[static_cast<std::size_t>(v)] = fwd[static_cast<std::size_t>(v)] && bwd[static_cast<std::size_t>(v)];

  std::vector<double> ones(m, 1.0);
  longest_edges_ = static_cast<int>(std::lround(solve(ones).value));
}

PathResult PathOracle::solve(std::span<const double> arm_cost) const {
  const auto n = static_cast<std::size_t>(dag_.num_nodes);
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  std::vector<int> pred(n, -1);
  best[static_cast<std::size_t>(dag_.source)] = 0.0;
  for (int v : topo_) {
    const auto vi = static_cast<std::size_t>(v);
    if (!useful_[vi] || best[vi] == -std::numeric_limits<double>::infinity()) continue;
    for (int e : out_edges_[vi]) {
      const auto& edge = dag_.edges[static_cast<std::size_t>(e)];
      const auto wi = static_cast<std::size_t>(edge.to);
      if (!useful_[wi]) continue;
      const double cand = best[vi] + arm_cost[static_cast<std::size_t>(edge.arm)];
      if (cand > best[wi]) {
        best[wi] = cand;
        pred[wi] = e;
      }
    }
  }
  PathResult out;
  out.value = best[static_cast<std::size_t>(dag_.sink)];
  for (int v = dag_.sink; v != dag_.source;) {
    const int e = pred[static_cast<std::size_t>(v)];
    out.arms.push_back(dag_.edges[static_cast<std::size_t>(e)].arm);
    v = dag_.edges[static_cast<std::size_t>(e)].from;
  }
  std::sort(out.arms.begin(), out.arms.end());
  return out;
}

std::uint64_t PathOracle::path_count() const {
  std::vector<std::uint64_t> cnt(static_cast<std::size_t>(dag_.num_nodes), 0);
  cnt[static_cast<std::size_t>(dag_.source)] = 1;
  for (int v : topo_) {
    if (!useful_[static_cast<std::size_t>(v)]) continue;
    for (int e : out_edges_[static_cast<std::size_t>(v)]) {
      const auto w = static_cast<std::size_t>(dag_.edges[static_cast<std::size_t>(e)].to);
      if (useful_[w]) cnt[w] = add_saturating(cnt[w], cnt[static_cast<std::size_t>(v)]);
    }
  }
  return cnt[static_cast<std::size_t>(dag_.sink)];
}

std::vector<ArmSet> PathOracle::enumerate_paths() const {
  std::vector<ArmSet> out;
  ArmSet cur;
  auto rec = [&](auto&& self, int v) -> void {
    if (v == dag_.sink) {
      ArmSet s = cur;
      std::sort(s.begin(), s.end());
      out.push_back(std::move(s));
      return;
    }
    for (int e : out_edges_[static_cast<std::size_t>(v)]) {
      const auto& edge = dag_.edges[static_cast<std::size_t>(e)];
      if (!useful_[static_cast<std::size_t>(edge.to)]) continue;
      cur.push_back(edge.arm);
      self(self, edge.to);
      cur.pop_back();
    }
  };
  rec(rec, dag_.source);
  return out;
}

PathResult linmax_dag_path(const Dag& dag, std::span<const double> arm_cost) {
  return PathOracle(dag).solve(arm_cost);
}

std::shared_ptr<ActionSpace> make_top_k(int d, int k) { return std::make_shared<TopKSpace>(d, k); }

std::shared_ptr<ActionSpace> make_dag_paths(Dag dag) {
  return std::make_shared<DagPathSpace>(PathOracle(std::move(dag)));
}

std::shared_ptr<ActionSpace> make_explicit(int d, std::vector<ArmSet> actions) {
  return std::make_shared<ExplicitSpace>(d, std::move(actions));
}

std::shared_ptr<ActionSpace> make_almost_all_sets(int d, int best_arm) {
  return std::make_shared<AlmostAllSetsSpace>(d, best_arm);
}

std::shared_ptr<ActionSpace> make_singletons(int d) {
  std::vector<ArmSet> s;
  for (int a = 0; a < d; ++a) s.push_back({a});
  return make_explicit(d, std::move(s));
}

// ---------------------------------------------------------------------------

double exact_psi(const InequalitySystem& system) {
  const auto& a = system.a;
  const int rows = static_cast<int>(a.rows());
  const int r = matrix_rank(a);
  double best = 0.0;
  std::vector<int> pick(static_cast<std::size_t>(r));
  // enumerate r-subsets of rows
  std::iota(pick.begin(), pick.end(), 0);
  if (r == 0) return 0.0;
  while (true) {
    const Eigen::MatrixXd m = select_rows(a, pick);
    if (matrix_rank(m) == r) best = std::max(best, spectral_norm(m));
    int i = r - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == rows - r + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

double greedy_psi(const InequalitySystem& system) {
  const auto& a = system.a;
  // independent subsets of signed unit rows have orthonormal rows
  if (signed_unit_rows(a)) return a.rows() > 0 ? 1.0 : 0.0;
  const int r = matrix_rank(a);
  std::vector<int> chosen;
  std::vector<char> used(static_cast<std::size_t>(a.rows()), 0);
  double norm = 0.0;
  while (static_cast<int>(chosen.size()) < r) {
    int best_row = -1;
    double best_norm = -1.0;
    for (int row = 0; row < a.rows(); ++row) {
      if (used[static_cast<std::size_t>(row)]) continue;
      chosen.push_back(row);
      const Eigen::MatrixXd m = select_rows(a, chosen);
      if (matrix_rank(m) == static_cast<int>(chosen.size())) {
        const double nm = spectral_norm(m);
        if (nm > best_norm) {
          best_norm = nm;
          best_row = row;
        }
      }
      chosen.pop_back();
    }
    if (best_row < 0) break;
    chosen.push_back(best_row);
    used[static_cast<std::size_t>(best_row)] = 1;
    norm = best_norm;
  }
  return norm;
}

PolytopeParams compute_polytope_params(const std::vector<std::vector<double>>& vertices,
                                       const InequalitySystem& system) {
  if (vertices.empty()) throw Error(Errc::unsupported_geometry, "no vertices");
  PolytopeParams p;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < vertices[i].size(); ++c) {
        const double diff = vertices[i][c] - vertices[j][c];
        s += diff * diff;
      }
      p.diameter = std::max(p.diameter, std::sqrt(s));
    }
  }
  p.phi = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) {
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::VectorXd slack = system.b - system.a * x;
    for (Eigen::Index r = 0; r < slack.size(); ++r) {
      if (slack(r) > 1e-12) p.phi = std::min(p.phi, slack(r));
    }
  }
  p.psi = system.a.rows() <= 12 ? exact_psi(system) : greedy_psi(system);
  if (!std::isfinite(p.phi) || p.diameter <= 0.0 || p.psi <= 0.0) {
    throw Error(Errc::unsupported_geometry, "degenerate polytope");
  }
  p.mu_poly = p.psi * p.diameter / p.phi;
  return p;
}

PolytopeParams polytope_params(const ActionSpace& space) {
  const auto system = space.inequality_description();
  if (!system) throw Error(Errc::unsupported_geometry, "no inequality description for this action space");
  const int d = space.dimension();
  constexpr std::uint64_t kExactVertexLimit = 3000;
  if (space.enumerable() && space.count() <= kExactVertexLimit) {
    std::vector<std::vector<double>> vertices;
    for (const auto& a : space.actions()) vertices.push_back(incidence(a, d));
    return compute_polytope_params(vertices, *system);
  }
  const auto diam = space.diameter_closed_form();
  const auto phi = space.phi_closed_form();
  if (!diam || !phi) throw Error(Errc::unsupported_geometry, "no closed-form geometry for this action space");
  PolytopeParams p;
  p.diameter = *diam;
  p.phi = *phi;
  p.psi = system->a.rows() <= 12 ? exact_psi(*system) : greedy_psi(*system);
  p.mu_poly = p.psi * p.diameter / p.phi;
  return p;
}

std::vector<ArmSet> covering_initialization(const ActionSpace& space) {
  const int d = space.dimension();
  std::vector<char> covered(static_cast<std::size_t>(d), 0);
  std::vector<double> cost(static_cast<std::size_t>(d));
  std::vector<ArmSet> greedy;
  int remaining = d;
  while (remaining > 0) {
    for (int a = 0; a < d; ++a) cost[static_cast<std::size_t>(a)] = covered[static_cast<std::size_t>(a)] ? 0.0 : 1.0;
    ArmSet pick = space.argmax(cost);
    int gain = 0;
    for (int a : pick) {
      if (!covered[static_cast<std::size_t>(a)]) {
        covered[static_cast<std::size_t>(a)] = 1;
        ++gain;
      }
    }
    if (gain == 0) throw Error(Errc::invalid_parameter, "some arm belongs to no action");
    remaining -= gain;
    greedy.push_back(std::move(pick));
  }
  constexpr std::uint64_t kExactCoverLimit = 20000;
  if (greedy.size() <= 1 || !space.enumerable() || space.count() > kExactCoverLimit) return greedy;

  const auto& all = space.actions();
  std::vector<int> best;
  for (const auto& g : greedy) {
    best.push_back(static_cast<int>(std::lower_bound(all.begin(), all.end(), g) - all.begin()));
  }
  CoverSearch search(d, all, 200000);
  search.run(best);
  if (best.size() >= greedy.size()) return greedy;
  std::sort(best.begin(), best.end());
  std::vector<ArmSet> out;
  for (int i : best) out.push_back(all[static_cast<std::size_t>(i)]);
  return out;
}

// ---------------------------------------------------------------------------

AnswerSpace::AnswerSpace(ActionSpacePtr answers) : space_(std::move(answers)) {
  if (!space_) throw Error(Errc::invalid_answer_space, "null answer space");
  if (space_->count() < 2) throw Error(Errc::invalid_answer_space, "need at least two answers");
  if (space_->enumerable()) {
    const auto& all = space_->actions();
    singletons_ = static_cast<int>(all.size()) == space_->dimension() &&
                  std::all_of(all.begin(), all.end(), [](const ArmSet& a) { return a.size() == 1; });
  }
  if (!singletons_ && !space_->enumerable()) {
    throw Error(Errc::invalid_answer_space, "answer space must be enumerable");
  }
}

AnswerSpace AnswerSpace::singletons(int d) { return AnswerSpace(make_singletons(d)); }

void AnswerSpace::best(std::span<const double> means, ArmSet& out) const {
  if (!singletons_) {
    out = space_->argmax(means);
    return;
  }
  // first strict maximum, as the explicit-list oracle
  std::size_t arg = 0;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < static_cast<std::size_t>(dimension()); ++a) {
    if (means[a] > top) {
      top = means[a];
      arg = a;
    }
  }
  out.assign(1, static_cast<int>(arg));
}

bool AnswerSpace::contains(const ArmSet& answer) const {
  if (singletons_) return answer.size() == 1 && answer[0] >= 0 && answer[0] < dimension();
  const auto& all = space_->actions();
  return std::binary_search(all.begin(), all.end(), answer);
}

std::vector<ArmSet> AnswerSpace::neighbors(const ArmSet& answer) const {
  std::vector<ArmSet> out;
  for_each_neighbor(answer, [&](const ArmSet& j) { out.push_back(j); });
  return out;
}

int AnswerSpace::max_symmetric_difference() const {
  if (singletons_) return 2;
  if (space_->kind() == SpaceKind::top_k) {
    return 2 * std::min(space_->max_action_size(), dimension() - space_->max_action_size());
  }
  const auto& all = space_->actions();
  int best = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) best = std::max(best, set_symmetric_difference_size(all[i], all[j]));
  }
  return best;
}

ActionId ActionRegistry::intern(const ArmSet& action) {
  auto [it, inserted] = index_.try_emplace(action, static_cast<ActionId>(sets_.size()));
  if (inserted) sets_.push_back(action);
  return it->second;
}

}  // namespace combgame

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "combgame/common.hpp"

namespace combgame {

enum class SpaceKind { top_k, dag_paths, explicit_list, almost_all_sets };

const char* to_string(SpaceKind kind);

// Geometry of the transformed simplex conv{1_A}, as used by LLOO.
struct PolytopeParams {
  double diameter = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  double mu_poly = 0.0;
};

// Inequality part A x <= b of a polytope description.
struct InequalitySystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

// Spaces with more actions than this are oracle-only.
inline constexpr std::uint64_t kEnumerationLimit = 250000;

// A combinatorial family of arm subsets exposed through a linear
// maximization oracle. Immutable after construction; derived quantities
// (polytope parameters, covering initialization) are computed once on
// first use and are safe to query from several threads.
class ActionSpace {
 public:
  virtual ~ActionSpace() = default;

  int dimension() const { return d_; }
  int max_action_size() const { return max_size_; }
  SpaceKind kind() const { return kind_; }

  // An action attaining max_A <1_A, cost>.
  virtual ArmSet argmax(std::span<const double> cost) const = 0;

  // Number of actions, saturating at UINT64_MAX.
  virtual std::uint64_t count() const = 0;

  bool enumerable() const { return enumeration_.has_value(); }
  // Lexicographically sorted list of all actions. Throws when not enumerable.
  const std::vector<ArmSet>& actions() const;

  virtual std::optional<InequalitySystem> inequality_description() const { return std::nullopt; }
  virtual std::optional<double> diameter_closed_form() const { return std::nullopt; }
  virtual std::optional<double> phi_closed_form() const { return std::nullopt; }

  const PolytopeParams& polytope() const;
  const std::vector<ArmSet>& covering() const;

 protected:
  ActionSpace(SpaceKind kind, int d, int max_size);
  // Call at the end of the derived constructor.
  void set_enumeration(std::vector<ArmSet> actions);

 private:
  SpaceKind kind_;
  int d_;
  int max_size_;
  std::optional<std::vector<ArmSet>> enumeration_;
  mutable std::once_flag polytope_once_;
  mutable PolytopeParams polytope_;
  mutable std::once_flag covering_once_;
  mutable std::vector<ArmSet> covering_;
};

using ActionSpacePtr = std::shared_ptr<const ActionSpace>;

// Indices of the k largest entries of `cost`, ties by lowest index; sorted.
ArmSet linmax_topk(std::span<const double> cost, int k);

struct DagEdge {
  int from;
  int to;
  int arm;
};

struct Dag {
  int num_nodes = 0;
  int source = 0;
  int sink = 0;
  std::vector<DagEdge> edges;
};

struct PathResult {
  ArmSet arms;
  double value = 0.0;
};

// Validated DAG with a cached topological order; the arm of every edge is distinct.
class PathOracle {
 public:
  explicit PathOracle(Dag dag);
  const Dag& dag() const { return dag_; }
  int num_arms() const { return num_arms_; }
  // Maximum-cost source-sink path by topological-order dynamic programming.
  PathResult solve(std::span<const double> arm_cost) const;
  int longest_path_edges() const { return longest_edges_; }
  std::uint64_t path_count() const;
  std::vector<ArmSet> enumerate_paths() const;

 private:
  Dag dag_;
  int num_arms_ = 0;
  std::vector<int> topo_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<char> useful_;  // on some source-sink path
  int longest_edges_ = 0;
};

PathResult linmax_dag_path(const Dag& dag, std::span<const double> arm_cost);

std::shared_ptr<ActionSpace> make_top_k(int d, int k);
std::shared_ptr<ActionSpace> make_dag_paths(Dag dag);
std::shared_ptr<ActionSpace> make_explicit(int d, std::vector<ArmSet> actions);
// ({best} ∪ {A : best ∉ A}) \ {∅}.
std::shared_ptr<ActionSpace> make_almost_all_sets(int d, int best_arm);
std::shared_ptr<ActionSpace> make_singletons(int d);

// Polytope parameters from vertices and an inequality description.
// psi is exact over all independent row subsets when the system has at
// most 12 rows and greedy otherwise.
PolytopeParams compute_polytope_params(const std::vector<std::vector<double>>& vertices,
                                       const InequalitySystem& system);
double greedy_psi(const InequalitySystem& system);
double exact_psi(const InequalitySystem& system);

PolytopeParams polytope_params(const ActionSpace& space);

// Small set of actions observing every arm at least once.
std::vector<ArmSet> covering_initialization(const ActionSpace& space);

// Answer family with the neighbor structure used by the stopping rule.
class AnswerSpace {
 public:
  explicit AnswerSpace(ActionSpacePtr answers);
  static AnswerSpace singletons(int d);

  int dimension() const { return space_->dimension(); }
  const ActionSpace& space() const { return *space_; }
  bool is_singletons() const { return singletons_; }
  std::uint64_t count() const { return space_->count(); }

  ArmSet best(std::span<const double> means) const { return space_->argmax(means); }
  // Same answer written into `out`, reusing its storage.
  void best(std::span<const double> means, ArmSet& out) const;

  // All other answers (a superset of the boundary neighbors).
  std::vector<ArmSet> neighbors(const ArmSet& answer) const;

  template <class Fn>
  void for_each_neighbor(const ArmSet& answer, Fn&& fn) const {
    if (singletons_) {
      if (answer.size() != 1 || answer[0] < 0 || answer[0] >= dimension()) {
        throw Error(Errc::invalid_answer, "unknown answer");
      }
      ArmSet j(1);
      for (int a = 0; a < dimension(); ++a) {
        if (a == answer[0]) continue;
        j[0] = a;
        fn(static_cast<const ArmSet&>(j));
      }
      return;
    }
    const auto& all = space_->actions();
    if (!contains(answer)) throw Error(Errc::invalid_answer, "unknown answer");
    for (const auto& j : all) {
      if (j != answer) fn(j);
    }
  }

  bool contains(const ArmSet& answer) const;
  // d0 = max |I Δ J| over distinct answers.
  int max_symmetric_difference() const;

 private:
  ActionSpacePtr space_;
  bool singletons_ = false;
};

// Interns arm sets as dense ids for one run.
class ActionRegistry {
 public:
  ActionId intern(const ArmSet& action);
  const ArmSet& arms(ActionId id) const { return sets_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return sets_.size(); }

 private:
  std::vector<ArmSet> sets_;
  std::unordered_map<ArmSet, ActionId, ArmSetHash> index_;
};

}  // namespace combgame

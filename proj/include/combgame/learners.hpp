#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "combgame/structures.hpp"

namespace combgame {

enum class LearnerKind { hedge, adahedge, ofw, lloo, uniform };

const char* to_string(LearnerKind kind);
LearnerKind parse_learner_kind(const char* name);
// Simplex learners need the full enumeration; the others start from a covering.
bool uses_full_initialization(LearnerKind kind);

using SparseWeights = std::vector<std::pair<ActionId, double>>;

// What the game engine reads from a learner at the start of a round.
struct WeightsView {
  SparseWeights support;      // w_t restricted to positive entries
  std::vector<double> point;  // w̃_t = sum_A w_{t,A} 1_A
};

// ⌊200 ((3 + √5)/2)^i⌋
std::int64_t doubling_schedule(int epoch);

// Tracks which doubling epoch a learner with `updates` past updates is in.
struct DoublingClock {
  int epoch = 0;
  std::int64_t horizon = doubling_schedule(0);
  // Returns true when the update count crosses into a new epoch.
  bool advance(std::int64_t updates);
};

// exp(-eta L) normalized; eta = +inf gives the uniform distribution on argmin L.
std::vector<double> exponential_weights(std::span<const double> cumulative_loss, double eta);
void exponential_weights(std::span<const double> cumulative_loss, double eta, std::vector<double>& out);

struct SimplexLearnerState {
  std::vector<double> cumulative_loss;
  double learning_rate = 0.0;
  double adahedge_gap = 0.0;
  std::vector<double> weights;
};

struct TransformedLearnerState {
  std::vector<double> point;
  SparseWeights sparse_weights;
  std::vector<double> cumulative_reward;
  std::vector<double> anchor;
  std::int64_t round = 0;
};

struct LLOOParams {
  double eta = 0.0;
  double gamma = 0.0;
  double mass = 0.0;
  double horizon = 0.0;
};

LLOOParams lloo_params(double horizon, const PolytopeParams& polytope, double max_reward_norm, int d);

struct ReduceResult {
  std::vector<double> point;  // w̃_-
  SparseWeights weights;      // w_-, total mass M
};

// Keeps mass `mass` of `weights` on the actions with the largest <1_A, cost>.
ReduceResult reduce(const SparseWeights& weights, const ActionRegistry& registry, double mass,
                    std::span<const double> cost, int d);

class Learner {
 public:
  virtual ~Learner() = default;
  virtual LearnerKind kind() const = 0;
  // Distribution for the current round.
  const WeightsView& weights() const { return view_; }
  // Arm-level reward r_t; simplex learners extend it to U_{t,A} = <1_A, r_t>.
  virtual void feed(std::span<const double> reward) = 0;
  std::size_t support_size() const { return view_.support.size(); }

 protected:
  WeightsView view_;
};

class UniformLearner final : public Learner {
 public:
  UniformLearner(const ActionSpace& space, ActionRegistry& registry);
  LearnerKind kind() const override { return LearnerKind::uniform; }
  void feed(std::span<const double>) override {}
};

// Exponential weights over the enumerated actions. The constant rate of each
// doubling epoch is sqrt(8 ln|A| / T) divided by the running maximum of the
// per-round loss range.
class HedgeLearner final : public Learner {
 public:
  HedgeLearner(const ActionSpace& space, ActionRegistry& registry);
  LearnerKind kind() const override { return LearnerKind::hedge; }
  void feed(std::span<const double> reward) override;
  const SimplexLearnerState& state() const { return state_; }

 private:
  void refresh_rate_numerator();
  void refresh();
  const ActionSpace& space_;
  std::vector<ActionId> ids_;
  SimplexLearnerState state_;
  std::vector<double> extended_;
  double scale_ = 0.0;
  double rate_numerator_ = 0.0;  // sqrt(8 ln |A| / horizon) for the current epoch
  std::int64_t updates_ = 0;
  DoublingClock clock_;
};

class AdaHedgeLearner final : public Learner {
 public:
  AdaHedgeLearner(const ActionSpace& space, ActionRegistry& registry);
  LearnerKind kind() const override { return LearnerKind::adahedge; }
  void feed(std::span<const double> reward) override;
  // Loss-level step, exposed for tests.
  void feed_losses(std::span<const double> losses);
  const SimplexLearnerState& state() const { return state_; }

 private:
  void refresh();
  const ActionSpace& space_;
  std::vector<ActionId> ids_;
  SimplexLearnerState state_;
  std::vector<double> loss_;
};

// Shared machinery for learners moving inside conv{1_A}.
class TransformedLearner : public Learner {
 public:
  const TransformedLearnerState& state() const { return state_; }
  // Re-derives the point from the sparse weights.
  void resync_point();

 protected:
  TransformedLearner(const ActionSpace& space, ActionRegistry& registry, const std::vector<ArmSet>& init,
                     std::int64_t start_round);
  void add_mass(ActionId id, double amount);
  void publish();

  const ActionSpace& space_;
  ActionRegistry& registry_;
  TransformedLearnerState state_;
  std::vector<std::int32_t> slot_;  // action id -> index in sparse_weights, -1 when absent
  std::vector<double> gradient_;
  std::vector<double> direction_;
};

class OfwLearner final : public TransformedLearner {
 public:
  // `init` is the initialization sequence; the anchor is its average.
  OfwLearner(const ActionSpace& space, ActionRegistry& registry, const std::vector<ArmSet>& init,
             std::int64_t start_round);
  LearnerKind kind() const override { return LearnerKind::ofw; }
  void feed(std::span<const double> reward) override;

 private:
  double diameter_;
  double regularizer_sum_ = 0.0;  // sum_{s<=t} 2 s^{-1/4} / diam
};

class LlooLearner final : public TransformedLearner {
 public:
  LlooLearner(const ActionSpace& space, ActionRegistry& registry, const std::vector<ArmSet>& init,
              std::int64_t start_round);
  LearnerKind kind() const override { return LearnerKind::lloo; }
  void feed(std::span<const double> reward) override;
  const LLOOParams& params() const { return params_; }

 private:
  PolytopeParams polytope_;
  LLOOParams params_;
  DoublingClock clock_;
  std::int64_t updates_ = 0;
  double epoch_max_norm_ = 0.0;
  bool started_ = false;
};

std::unique_ptr<Learner> make_learner(LearnerKind kind, const ActionSpace& space, ActionRegistry& registry,
                                      const std::vector<ArmSet>& init);

}  // namespace combgame

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "combgame/bandit.hpp"
#include "combgame/learners.hpp"
#include "combgame/structures.hpp"
#include "combgame/thresholds.hpp"

namespace combgame {

enum class TrackingKind { c_track, d_track, direct_sample };

const char* to_string(TrackingKind kind);
TrackingKind parse_tracking_kind(const char* name);

struct GameConfig {
  LearnerKind learner = LearnerKind::lloo;
  TrackingKind tracking = TrackingKind::d_track;
  ThresholdMode threshold_mode = ThresholdMode::stylized;
  BonusMode bonus_mode = BonusMode::stylized;
  double bonus_c = 1.0;
  double bonus_b = 1.0;
  bool per_answer_learners = false;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::int64_t max_rounds = 10'000'000;

  // Diagnostics. Timing is off for bit-reproducible batch summaries.
  bool measure_time = true;
  bool check_invariants = false;
  bool record_trace = false;
  bool record_regret = false;

  void validate() const;
};

struct TraceRecord {
  std::int64_t t = 0;
  ArmSet action;  // empty on the stopping round
  double statistic = 0.0;
  double beta = 0.0;
  ArmSet candidate;
  std::size_t support_size = 0;
};

struct RunResult {
  std::int64_t stopping_time = 0;  // τ_δ: the round at which the stopping rule fired
  std::int64_t samples = 0;        // observations collected, τ_δ - 1
  std::int64_t initialization_rounds = 0;
  ArmSet recommended;
  bool correct = false;
  bool budget_exceeded = false;
  double mean_round_nanos = 0.0;  // time between observations, excluding the simulated reward draw
  double max_round_nanos = 0.0;
  double mean_support_size = 0.0;
  std::vector<std::size_t> support_size_trace;
  std::vector<double> regret_trace;
  std::int64_t rounds_with_wrong_candidate = 0;
  double final_statistic = 0.0;
  double final_beta = 0.0;
  // runtime invariant audits (only filled when check_invariants is set)
  std::int64_t tracking_checks = 0;
  std::int64_t tracking_violations = 0;
  double max_weight_drift = 0.0;
  std::vector<TraceRecord> trace;
};

ArmSet recommend(std::span<const double> projected_mle, const AnswerSpace& answers);

// Closest point of the closed cell boundary between I and J in the
// weighted Gaussian KL. Zero-weight arms are free to move.
std::vector<double> best_response_gaussian(std::span<const double> phi, const ArmSet& i_set, const ArmSet& j_set,
                                           std::span<const double> weights, std::span<const double> sigmas);

// <w, d_KL(phi, best_response)> without materializing λ.
double best_response_value(std::span<const double> phi, const ArmSet& i_set, const ArmSet& j_set,
                           std::span<const double> weights, std::span<const double> sigmas);

struct LambdaResult {
  ArmSet j;
  std::vector<double> lambda;
  double value = 0.0;
};

LambdaResult lambda_player(std::span<const double> mle, const ArmSet& candidate, std::span<const double> weights,
                           const AnswerSpace& answers, std::span<const double> sigmas);
// Same result written into `out`, reusing its storage.
void lambda_player(std::span<const double> mle, const ArmSet& candidate, std::span<const double> weights,
                   const AnswerSpace& answers, std::span<const double> sigmas, LambdaResult& out);

// Gaussian closed form of the optimistic reward.
void optimistic_reward(std::span<const double> mle, std::span<const double> lambda, double f_value,
                       std::span<const std::int64_t> arm_counts, std::span<const double> sigmas,
                       std::vector<double>& out);
std::vector<double> optimistic_reward(std::span<const double> mle, std::span<const double> lambda, double f_value,
                                      std::span<const std::int64_t> arm_counts, std::span<const double> sigmas);

// max{f/Ñ_a, max over the box endpoints of d_KL(φ, λ_a)}.
std::vector<double> optimistic_reward_generic(const ConfidenceBox& box, std::span<const double> lambda,
                                              double f_value, std::span<const std::int64_t> arm_counts,
                                              std::span<const double> sigmas);

// argmin over `support` of N_A / S_A, ties by lexicographic arm set.
ActionId c_track(std::span<const ActionId> support, std::span<const double> cumulative_weights,
                 std::span<const std::int64_t> counts, const ActionRegistry& registry);

// argmin over positive entries of `current` of N_A / w_A, ties as c_track.
ActionId d_track(const SparseWeights& current, std::span<const std::int64_t> counts, const ActionRegistry& registry);

double glr_statistic(std::span<const double> mle, std::span<const double> arm_counts, const ArmSet& candidate,
                     const AnswerSpace& answers, std::span<const double> sigmas);

ThresholdContext make_threshold_context(const ActionSpace& actions, const AnswerSpace& answers, ThresholdMode mode);

RunResult run_combgame(const GameConfig& config, const BanditInstance& instance, const ActionSpace& actions,
                       const AnswerSpace& answers, Rng& rng);

}  // namespace combgame

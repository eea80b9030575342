#include "combgame/game.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>

namespace combgame {

const char* to_string(TrackingKind kind) {
  switch (kind) {
    case TrackingKind::c_track: return "c_track";
    case TrackingKind::d_track: return "d_track";
    case TrackingKind::direct_sample: return "direct_sample";
  }
  return "unknown";
}

TrackingKind parse_tracking_kind(const char* name) {
  for (auto k : {TrackingKind::c_track, TrackingKind::d_track, TrackingKind::direct_sample}) {
    if (std::strcmp(name, to_string(k)) == 0) return k;
  }
  throw Error(Errc::invalid_parameter, std::string("unknown tracking rule '") + name + "'");
}

void GameConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::invalid_parameter, "delta must lie in (0,1)");
  if (!(bonus_c > 0.0) || !(bonus_b > 0.0)) throw Error(Errc::invalid_parameter, "bonus constants must be positive");
  if (max_rounds < 1) throw Error(Errc::invalid_parameter, "max_rounds must be positive");
}

ArmSet recommend(std::span<const double> projected_mle, const AnswerSpace& answers) {
  return answers.best(projected_mle);
}

namespace {

// Weighted KL projection onto {<1_J - 1_I, λ> = 0} restricted to the
// symmetric difference. Returns the value; `zero_arm` receives the index in
// `diff` of a free arm (branch ii), `scale` the multiplier of branch iii.
struct Projection {
  double gap = 0.0;
  double value = 0.0;
  int zero_arm = -1;
  double scale = 0.0;
  bool inside = false;
};

Projection project(std::span<const double> phi, const std::vector<SignedArm>& diff, std::span<const double> w,
                   std::span<const double> sigmas) {
  Projection p;
  for (const auto& s : diff) p.gap += s.sign * phi[static_cast<std::size_t>(s.arm)];
  if (p.gap >= 0.0) {
    p.inside = true;
    return p;
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const auto a = static_cast<std::size_t>(diff[k].arm);
    if (w[a] <= 0.0) {
      p.zero_arm = static_cast<int>(k);
      return p;
    }
    denom += sigmas[a] * sigmas[a] / w[a];
  }
  p.scale = p.gap / denom;
  p.value = p.gap * p.gap / (2.0 * denom);
  return p;
}

void apply_projection(std::vector<double>& lambda, const Projection& p, const std::vector<SignedArm>& diff,
                      std::span<const double> w, std::span<const double> sigmas) {
  if (p.inside) return;
  if (p.zero_arm >= 0) {
    const auto& s = diff[static_cast<std::size_t>(p.zero_arm)];
    lambda[static_cast<std::size_t>(s.arm)] -= p.gap * s.sign;
    return;
  }
  for (const auto& s : diff) {
    const auto a = static_cast<std::size_t>(s.arm);
    lambda[a] -= p.scale * sigmas[a] * sigmas[a] / w[a] * s.sign;
  }
}

thread_local std::vector<SignedArm> tl_diff;

}  // namespace

std::vector<double> best_response_gaussian(std::span<const double> phi, const ArmSet& i_set, const ArmSet& j_set,
                                           std::span<const double> weights, std::span<const double> sigmas) {
  symmetric_difference(i_set, j_set, tl_diff);
  if (tl_diff.empty()) throw Error(Errc::invalid_pair, "I and J coincide");
  std::vector<double> lambda(phi.begin(), phi.end());
  const auto& diff = tl_diff;
  apply_projection(lambda, project(phi, diff, weights, sigmas), diff, weights, sigmas);
  return lambda;
}

double best_response_value(std::span<const double> phi, const ArmSet& i_set, const ArmSet& j_set,
                           std::span<const double> weights, std::span<const double> sigmas) {
  symmetric_difference(i_set, j_set, tl_diff);
  if (tl_diff.empty()) throw Error(Errc::invalid_pair, "I and J coincide");
  return project(phi, tl_diff, weights, sigmas).value;
}

namespace {

// Minimizing neighbor of the weighted transportation cost; ties keep the first.
template <class OnBest>
double min_over_neighbors(std::span<const double> phi, const ArmSet& candidate, std::span<const double> weights,
                          const AnswerSpace& answers, std::span<const double> sigmas, OnBest&& on_best) {
  double best = std::numeric_limits<double>::infinity();
  if (answers.is_singletons()) {
    // I = {i}, J = {j}: the difference holds two arms, no set algebra needed
    if (candidate.size() != 1 || candidate[0] < 0 || candidate[0] >= answers.dimension()) {
      throw Error(Errc::invalid_answer, "unknown answer");
    }
    const auto i = static_cast<std::size_t>(candidate[0]);
    const auto d = static_cast<std::size_t>(answers.dimension());
    thread_local ArmSet j_set(1);
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i) continue;
      const double gap = phi[j] - phi[i];
      double value = 0.0;
      if (gap < 0.0 && weights[i] > 0.0 && weights[j] > 0.0) {
        const std::size_t lo = std::min(i, j), hi = std::max(i, j);
        const double denom = sigmas[lo] * sigmas[lo] / weights[lo] + sigmas[hi] * sigmas[hi] / weights[hi];
        value = gap * gap / (2.0 * denom);
      }
      if (value < best) {
        best = value;
        j_set[0] = static_cast<int>(j);
      }
    }
    if (d < 2) throw Error(Errc::invalid_answer_space, "empty neighbor list");
    on_best(static_cast<const ArmSet&>(j_set));
    return best;
  }
  bool any = false;
  answers.for_each_neighbor(candidate, [&](const ArmSet& j) {
    any = true;
    symmetric_difference(candidate, j, tl_diff);
    const Projection p = project(phi, tl_diff, weights, sigmas);
    if (p.value < best) {
      best = p.value;
      on_best(j);
    }
  });
  if (!any) throw Error(Errc::invalid_answer_space, "empty neighbor list");
  return best;
}

}  // namespace

LambdaResult lambda_player(std::span<const double> mle, const ArmSet& candidate, std::span<const double> weights,
                           const AnswerSpace& answers, std::span<const double> sigmas) {
  LambdaResult out;
  lambda_player(mle, candidate, weights, answers, sigmas, out);
  return out;
}

void lambda_player(std::span<const double> mle, const ArmSet& candidate, std::span<const double> weights,
                   const AnswerSpace& answers, std::span<const double> sigmas, LambdaResult& out) {
  out.value = min_over_neighbors(mle, candidate, weights, answers, sigmas, [&](const ArmSet& j) { out.j = j; });
  out.lambda.assign(mle.begin(), mle.end());
  if (answers.is_singletons()) {
    // two-arm difference {i (sign -1), j (sign +1)} in arm order
    const auto i = static_cast<std::size_t>(candidate[0]);
    const auto j = static_cast<std::size_t>(out.j[0]);
    const double gap = mle[j] - mle[i];
    if (gap >= 0.0) return;
    const std::size_t lo = std::min(i, j), hi = std::max(i, j);
    const double sign_lo = lo == j ? 1.0 : -1.0;
    if (weights[lo] <= 0.0 || weights[hi] <= 0.0) {
      const std::size_t free_arm = weights[lo] <= 0.0 ? lo : hi;
      out.lambda[free_arm] -= gap * (free_arm == lo ? sign_lo : -sign_lo);
      return;
    }
    const double scale = gap / (sigmas[lo] * sigmas[lo] / weights[lo] + sigmas[hi] * sigmas[hi] / weights[hi]);
    out.lambda[lo] -= scale * sigmas[lo] * sigmas[lo] / weights[lo] * sign_lo;
    out.lambda[hi] -= scale * sigmas[hi] * sigmas[hi] / weights[hi] * -sign_lo;
    return;
  }
  symmetric_difference(candidate, out.j, tl_diff);
  if (tl_diff.empty()) throw Error(Errc::invalid_pair, "I and J coincide");
  apply_projection(out.lambda, project(mle, tl_diff, weights, sigmas), tl_diff, weights, sigmas);
}

double glr_statistic(std::span<const double> mle, std::span<const double> arm_counts, const ArmSet& candidate,
                     const AnswerSpace& answers, std::span<const double> sigmas) {
  return min_over_neighbors(mle, candidate, arm_counts, answers, sigmas, [](const ArmSet&) {});
}

std::vector<double> optimistic_reward(std::span<const double> mle, std::span<const double> lambda, double f_value,
                                      std::span<const std::int64_t> arm_counts, std::span<const double> sigmas) {
  std::vector<double> r;
  optimistic_reward(mle, lambda, f_value, arm_counts, sigmas, r);
  return r;
}

void optimistic_reward(std::span<const double> mle, std::span<const double> lambda, double f_value,
                       std::span<const std::int64_t> arm_counts, std::span<const double> sigmas,
                       std::vector<double>& r) {
  r.resize(mle.size());
  for (std::size_t a = 0; a < mle.size(); ++a) {
    if (arm_counts[a] <= 0) throw Error(Errc::uninitialized_arm, "arm has no observation");
    const double n = static_cast<double>(arm_counts[a]);
    const double s2 = sigmas[a] * sigmas[a];
    const double gap = std::abs(mle[a] - lambda[a]);
    r[a] = gap * gap / (2.0 * s2) + f_value / n + std::sqrt(2.0 * f_value / (s2 * n)) * gap;
  }
}

std::vector<double> optimistic_reward_generic(const ConfidenceBox& box, std::span<const double> lambda,
                                              double f_value, std::span<const std::int64_t> arm_counts,
                                              std::span<const double> sigmas) {
  std::vector<double> r(lambda.size());
  for (std::size_t a = 0; a < lambda.size(); ++a) {
    if (arm_counts[a] <= 0) throw Error(Errc::uninitialized_arm, "arm has no observation");
    const double bonus = f_value / static_cast<double>(arm_counts[a]);
    r[a] = std::max({bonus, kl_gaussian(box.lower[a], lambda[a], sigmas[a]), kl_gaussian(box.upper[a], lambda[a], sigmas[a])});
  }
  return r;
}

namespace {

// a/b < c/d for nonnegative numerators and positive denominators
bool ratio_less(double a, double b, double c, double d) { return a * d < c * b; }

}  // namespace

ActionId c_track(std::span<const ActionId> support, std::span<const double> cumulative_weights,
                 std::span<const std::int64_t> counts, const ActionRegistry& registry) {
  ActionId best = -1;
  for (ActionId id : support) {
    const auto i = static_cast<std::size_t>(id);
    if (!(cumulative_weights[i] > 0.0)) continue;
    if (best < 0) {
      best = id;
      continue;
    }
    const auto b = static_cast<std::size_t>(best);
    const double n_i = static_cast<double>(counts[i]), n_b = static_cast<double>(counts[b]);
    if (ratio_less(n_i, cumulative_weights[i], n_b, cumulative_weights[b]) ||
        (!ratio_less(n_b, cumulative_weights[b], n_i, cumulative_weights[i]) && registry.arms(id) < registry.arms(best))) {
      best = id;
    }
  }
  if (best < 0) throw Error(Errc::tracking, "empty support");
  return best;
}

ActionId d_track(const SparseWeights& current, std::span<const std::int64_t> counts, const ActionRegistry& registry) {
  ActionId best = -1;
  double best_w = 0.0;
  for (const auto& [id, w] : current) {
    if (!(w > 0.0)) continue;
    if (best < 0) {
      best = id;
      best_w = w;
      continue;
    }
    const double n_i = static_cast<double>(counts[static_cast<std::size_t>(id)]);
    const double n_b = static_cast<double>(counts[static_cast<std::size_t>(best)]);
    if (ratio_less(n_i, w, n_b, best_w) || (!ratio_less(n_b, best_w, n_i, w) && registry.arms(id) < registry.arms(best))) {
      best = id;
      best_w = w;
    }
  }
  if (best < 0) throw Error(Errc::tracking, "empty support");
  return best;
}

ThresholdContext make_threshold_context(const ActionSpace& actions, const AnswerSpace& answers, ThresholdMode mode) {
  ThresholdContext ctx;
  ctx.d0 = answers.max_symmetric_difference();
  ctx.max_action_size = actions.max_action_size();
  ctx.answer_count = static_cast<double>(answers.count());
  ctx.mode = mode;
  return ctx;
}

// ---------------------------------------------------------------------------

namespace {

class RunState {
 public:
  RunState(const GameConfig& config, const BanditInstance& instance, const ActionSpace& actions,
           const AnswerSpace& answers, Rng& rng)
      : config_(config),
        instance_(instance),
        actions_(actions),
        answers_(answers),
        rng_(rng),
        d_(instance.dimension()),
        est_(d_),
        ctx_(make_threshold_context(actions, answers, config.threshold_mode)) {}

  RunResult run();

 private:
  void pull(ActionId id);
  void record(ActionId id);
  Learner& learner_for(const ArmSet& candidate);
  void grow_tables();
  void audit_weights(const WeightsView& view);
  void audit_tracking();
  ActionId choose(const WeightsView& view);

  const GameConfig& config_;
  const BanditInstance& instance_;
  const ActionSpace& actions_;
  const AnswerSpace& answers_;
  Rng& rng_;
  int d_;
  EstimatorState est_;
  Observation observation_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  std::vector<double> reward_;
  LambdaResult lambda_;
  ArmSet candidate_;
  ThresholdContext ctx_;
  ActionRegistry registry_;
  std::vector<std::int64_t> counts_;       // N_{t,A} by action id
  std::vector<double> cumulative_weight_;  // sum_s w_{s,A} by action id
  std::vector<ActionId> touched_;          // ids with positive cumulative weight
  std::vector<ArmSet> init_;
  std::unique_ptr<Learner> single_;
  std::map<ArmSet, std::unique_ptr<Learner>> per_answer_;
  RunResult result_;
};

void RunState::grow_tables() {
  if (counts_.size() < registry_.size()) {
    counts_.resize(registry_.size(), 0);
    cumulative_weight_.resize(registry_.size(), 0.0);
  }
}

void RunState::pull(ActionId id) {
  sample_feedback(instance_, registry_.arms(id), rng_, noise_, observation_);
  record(id);
}

void RunState::record(ActionId id) {
  update_estimator(est_, registry_.arms(id), observation_);
  grow_tables();
  ++counts_[static_cast<std::size_t>(id)];
}

Learner& RunState::learner_for(const ArmSet& candidate) {
  if (!config_.per_answer_learners) return *single_;
  auto& slot = per_answer_[candidate];
  if (!slot) slot = make_learner(config_.learner, actions_, registry_, init_);
  return *slot;
}

ActionId RunState::choose(const WeightsView& view) {
  switch (config_.tracking) {
    case TrackingKind::c_track: {
      thread_local std::vector<ActionId> support;
      support.clear();
      for (const auto& e : view.support) support.push_back(e.first);
      return c_track(support, cumulative_weight_, counts_, registry_);
    }
    case TrackingKind::d_track: return d_track(view.support, counts_, registry_);
    case TrackingKind::direct_sample: {
      thread_local std::vector<double> w;
      w.clear();
      for (const auto& e : view.support) w.push_back(e.second);
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      return view.support[pick(rng_)].first;
    }
  }
  throw Error(Errc::tracking, "unknown tracking rule");
}

void RunState::audit_weights(const WeightsView& view) {
  // weight propagation: w̃_t = sum_A w_{t,A} 1_A
  std::vector<double> point(static_cast<std::size_t>(d_), 0.0);
  for (const auto& [id, w] : view.support) {
    for (int a : registry_.arms(id)) point[static_cast<std::size_t>(a)] += w;
  }
  for (int a = 0; a < d_; ++a) {
    const auto i = static_cast<std::size_t>(a);
    result_.max_weight_drift = std::max(result_.max_weight_drift, std::abs(point[i] - view.point[i]));
  }
}

// 1 - |A| <= N_{t,A} - sum_{s<=t} w_{s,A} <= 1 for every action seen so far
void RunState::audit_tracking() {
  const double lower = 1.0 - static_cast<double>(actions_.count());
  for (ActionId id : touched_) {
    const auto i = static_cast<std::size_t>(id);
    const double gap = static_cast<double>(counts_[i]) - cumulative_weight_[i];
    ++result_.tracking_checks;
    if (gap > 1.0 + 1e-9 || gap < lower - 1e-9) ++result_.tracking_violations;
  }
}

RunResult RunState::run() {
  config_.validate();
  instance_.validate();
  if (actions_.dimension() != d_ || answers_.dimension() != d_) {
    throw Error(Errc::invalid_parameter, "spaces and instance disagree on the dimension");
  }
  const ArmSet truth = answers_.best(instance_.means);
  const std::span<const double> sigmas(instance_.stddevs);

  init_ = uses_full_initialization(config_.learner) ? actions_.actions() : actions_.covering();
  if (!config_.per_answer_learners) single_ = make_learner(config_.learner, actions_, registry_, init_);
  for (const auto& a : init_) registry_.intern(a);
  grow_tables();
  // each initial pull counts as one unit of cumulative weight
  for (const auto& a : init_) {
    const ActionId id = registry_.intern(a);
    pull(id);
    if (cumulative_weight_[static_cast<std::size_t>(id)] == 0.0) touched_.push_back(id);
    cumulative_weight_[static_cast<std::size_t>(id)] += 1.0;
  }
  const auto n0 = static_cast<std::int64_t>(init_.size());
  result_.initialization_rounds = n0;
  if (!est_.all_arms_observed()) throw Error(Errc::uninitialized_arm, "initialization leaves an arm unobserved");

  std::vector<double> counts_real(static_cast<std::size_t>(d_));
  double total_nanos = 0.0;
  double support_total = 0.0;
  std::int64_t loop_rounds = 0;
  std::vector<double> regret_sum(static_cast<std::size_t>(d_), 0.0);
  double played_reward = 0.0;
  // the round clock covers the algorithm's work between two observations; the
  // simulated environment drawing rewards is not timed
  std::chrono::steady_clock::time_point start;
  if (config_.measure_time) start = std::chrono::steady_clock::now();

  for (std::int64_t t = n0 + 1;; ++t) {
    if (t - 1 >= config_.max_rounds) {
      result_.budget_exceeded = true;
      result_.stopping_time = t;
      result_.samples = t - 1;
      result_.recommended = answers_.best(est_.mle);
      result_.correct = false;
      break;
    }

    const double f = exploration_bonus(static_cast<double>(t - 1), config_.bonus_mode, config_.bonus_c, config_.bonus_b);
    // without a parameter box update_estimator keeps projected_mle equal to mle
    if (instance_.parameter_box) {
      est_.projected_mle = project_to_box(est_.mle, instance_.parameter_box, confidence_box(est_, sigmas, f));
    }
    answers_.best(est_.projected_mle, candidate_);
    const ArmSet& candidate = candidate_;
    if (candidate != truth) ++result_.rounds_with_wrong_candidate;

    for (int a = 0; a < d_; ++a) counts_real[static_cast<std::size_t>(a)] = static_cast<double>(est_.arm_counts[static_cast<std::size_t>(a)]);
    const double statistic = glr_statistic(est_.mle, counts_real, candidate, answers_, sigmas);
    const double beta = stopping_threshold(static_cast<double>(t - 1), config_.delta, ctx_);
    if (statistic > beta) {
      result_.stopping_time = t;
      result_.samples = t - 1;
      result_.recommended = candidate;
      result_.correct = candidate == truth;
      result_.final_statistic = statistic;
      result_.final_beta = beta;
      if (config_.record_trace) result_.trace.push_back({t, {}, statistic, beta, candidate, 0});
      break;
    }

    Learner& learner = learner_for(candidate);
    const WeightsView& view = learner.weights();
    grow_tables();
    // only C-tracking reads the cumulative weights
    if (config_.tracking == TrackingKind::c_track) {
      for (const auto& [id, w] : view.support) {
        auto& s = cumulative_weight_[static_cast<std::size_t>(id)];
        if (s == 0.0 && w > 0.0) touched_.push_back(id);
        s += w;
      }
    }
    const ActionId chosen = choose(view);
    const std::size_t support = view.support.size();
    if (config_.check_invariants) audit_weights(view);

    if (learner.kind() != LearnerKind::uniform) {
      lambda_player(est_.mle, candidate, view.point, answers_, sigmas, lambda_);
      const LambdaResult& lr = lambda_;
      optimistic_reward(est_.mle, lr.lambda, f, est_.arm_counts, sigmas, reward_);
      const std::vector<double>& reward = reward_;
      if (config_.record_regret) {
        for (int a = 0; a < d_; ++a) regret_sum[static_cast<std::size_t>(a)] += reward[static_cast<std::size_t>(a)];
        for (int a = 0; a < d_; ++a) played_reward += view.point[static_cast<std::size_t>(a)] * reward[static_cast<std::size_t>(a)];
        const double best = set_sum(actions_.argmax(regret_sum), regret_sum);
        result_.regret_trace.push_back(best - played_reward);
      }
      learner.feed(reward);
    }
    if (config_.measure_time) {
      const double ns = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start).count();
      total_nanos += ns;
      result_.max_round_nanos = std::max(result_.max_round_nanos, ns);
    }
    sample_feedback(instance_, registry_.arms(chosen), rng_, noise_, observation_);
    if (config_.measure_time) start = std::chrono::steady_clock::now();
    record(chosen);

    if (config_.check_invariants && config_.tracking == TrackingKind::c_track) audit_tracking();
    if (config_.record_trace) {
      result_.trace.push_back({t, registry_.arms(chosen), statistic, beta, candidate, support});
      result_.support_size_trace.push_back(support);
    }
    support_total += static_cast<double>(support);
    ++loop_rounds;
  }
  if (loop_rounds > 0) {
    result_.mean_round_nanos = total_nanos / static_cast<double>(loop_rounds);
    result_.mean_support_size = support_total / static_cast<double>(loop_rounds);
  }
  return std::move(result_);
}

}  // namespace

RunResult run_combgame(const GameConfig& config, const BanditInstance& instance, const ActionSpace& actions,
                       const AnswerSpace& answers, Rng& rng) {
  RunState state(config, instance, actions, answers, rng);
  return state.run();
}

}  // namespace combgame

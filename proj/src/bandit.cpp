#include "combgame/bandit.hpp"

#include <algorithm>
#include <cmath>

namespace combgame {

void BanditInstance::validate() const {
  const std::size_t d = means.size();
  if (d < 2) throw Error(Errc::invalid_parameter, "bandit needs at least two arms");
  if (stddevs.size() != d) throw Error(Errc::invalid_parameter, "stddevs size mismatch");
  for (double s : stddevs) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(Errc::invalid_parameter, "stddevs must be positive");
  }
  if (sampling_stddevs) {
    if (sampling_stddevs->size() != d) throw Error(Errc::invalid_parameter, "sampling stddevs size mismatch");
    for (double s : *sampling_stddevs) {
      if (!(s >= 0.0)) throw Error(Errc::invalid_parameter, "sampling stddevs must be nonnegative");
    }
  }
  if (parameter_box) {
    if (parameter_box->size() != d) throw Error(Errc::invalid_parameter, "parameter box size mismatch");
    for (std::size_t a = 0; a < d; ++a) {
      const auto& iv = (*parameter_box)[a];
      if (iv.lo > iv.hi) throw Error(Errc::invalid_parameter, "empty parameter interval");
      if (means[a] < iv.lo || means[a] > iv.hi) throw Error(Errc::invalid_parameter, "mean outside parameter box");
    }
  }
}

BanditInstance make_gaussian(std::vector<double> means, double sigma) {
  BanditInstance inst;
  inst.stddevs.assign(means.size(), sigma);
  inst.means = std::move(means);
  inst.validate();
  return inst;
}

Observation sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng) {
  Observation obs;
  sample_feedback(instance, action, rng, obs);
  return obs;
}

void sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng, Observation& obs) {
  std::normal_distribution<double> standard(0.0, 1.0);
  sample_feedback(instance, action, rng, standard, obs);
}

void sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng,
                     std::normal_distribution<double>& standard, Observation& obs) {
  const int d = instance.dimension();
  if (action.empty()) throw Error(Errc::invalid_action, "empty action");
  obs.assign(static_cast<std::size_t>(d), std::nullopt);
  const auto& noise = instance.sampling_stddevs ? *instance.sampling_stddevs : instance.stddevs;
  for (int a : action) {
    if (a < 0 || a >= d) throw Error(Errc::invalid_action, "arm index out of range");
    const auto i = static_cast<std::size_t>(a);
    const double z = standard(rng);
    obs[i] = instance.means[i] + noise[i] * z;
  }
}

EstimatorState::EstimatorState(int d)
    : arm_counts(static_cast<std::size_t>(d), 0),
      reward_sums(static_cast<std::size_t>(d), 0.0),
      mle(static_cast<std::size_t>(d), 0.0),
      projected_mle(static_cast<std::size_t>(d), 0.0) {}

bool EstimatorState::all_arms_observed() const {
  return std::all_of(arm_counts.begin(), arm_counts.end(), [](std::int64_t n) { return n > 0; });
}

void update_estimator(EstimatorState& state, const ArmSet& action, const Observation& observation) {
  const auto d = state.mle.size();
  if (observation.size() != d) throw Error(Errc::inconsistency, "observation dimension mismatch");
  std::size_t present = 0;
  for (const auto& v : observation) present += v.has_value();
  if (present != action.size()) throw Error(Errc::inconsistency, "observation mask does not match action");
  for (int a : action) {
    if (a < 0 || static_cast<std::size_t>(a) >= d || !observation[static_cast<std::size_t>(a)]) {
      throw Error(Errc::inconsistency, "observation mask does not match action");
    }
  }
  for (int a : action) {
    const auto i = static_cast<std::size_t>(a);
    state.arm_counts[i] += 1;
    state.reward_sums[i] += *observation[i];
    state.mle[i] = state.reward_sums[i] / static_cast<double>(state.arm_counts[i]);
    state.projected_mle[i] = state.mle[i];
  }
  state.action_counts[action] += 1;
  state.round += 1;
}

double confidence_half_width(double f_value, double sigma, std::int64_t count) {
  return std::sqrt(2.0 * f_value * sigma * sigma / static_cast<double>(count));
}

ConfidenceBox confidence_box(const EstimatorState& state, std::span<const double> sigmas, double f_value) {
  const auto d = state.mle.size();
  ConfidenceBox box{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t a = 0; a < d; ++a) {
    if (state.arm_counts[a] <= 0) throw Error(Errc::uninitialized_arm, "arm has no observation");
    const double hw = confidence_half_width(f_value, sigmas[a], state.arm_counts[a]);
    box.lower[a] = state.mle[a] - hw;
    box.upper[a] = state.mle[a] + hw;
  }
  return box;
}

std::vector<double> project_to_box(std::span<const double> mle,
                                   const std::optional<std::vector<Interval>>& parameter_box,
                                   const ConfidenceBox& confidence) {
  std::vector<double> out(mle.begin(), mle.end());
  if (!parameter_box) return out;
  for (std::size_t a = 0; a < out.size(); ++a) {
    const auto& m = (*parameter_box)[a];
    const double lo = std::max(m.lo, confidence.lower[a]);
    const double hi = std::min(m.hi, confidence.upper[a]);
    if (lo <= hi) {
      out[a] = std::clamp(out[a], lo, hi);
    } else {
      // empty intersection: parameter-box point nearest the confidence interval
      out[a] = confidence.lower[a] > m.hi ? m.hi : m.lo;
    }
  }
  return out;
}

}  // namespace combgame

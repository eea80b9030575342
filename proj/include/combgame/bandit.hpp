#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "combgame/common.hpp"

namespace combgame {

enum class Family { gaussian };

struct Interval {
  double lo;
  double hi;
};

// Ground truth of a simulated Gaussian bandit.
//
// `stddevs` are the known noise levels the algorithm uses in its KL
// divergences and must be strictly positive. `sampling_stddevs`, when set,
// overrides the noise actually drawn by the environment (zero allowed),
// which gives the noiseless environments used in tests.
struct BanditInstance {
  std::vector<double> means;
  std::vector<double> stddevs;
  Family family = Family::gaussian;
  std::optional<std::vector<Interval>> parameter_box;
  std::optional<std::vector<double>> sampling_stddevs;

  int dimension() const { return static_cast<int>(means.size()); }
  void validate() const;
};

BanditInstance make_gaussian(std::vector<double> means, double sigma);

// Per-arm observation; arms outside the pulled action hold no value.
using Observation = std::vector<std::optional<double>>;

using Rng = std::mt19937_64;

Observation sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng);
// Same draw written into `out`, reusing its storage.
void sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng, Observation& out);
// Draws from a caller-owned standard normal, which keeps its spare variate between calls.
void sample_feedback(const BanditInstance& instance, const ArmSet& action, Rng& rng,
                     std::normal_distribution<double>& standard, Observation& out);

struct EstimatorState {
  std::vector<std::int64_t> arm_counts;
  std::map<ArmSet, std::int64_t> action_counts;
  std::vector<double> reward_sums;
  std::vector<double> mle;
  std::vector<double> projected_mle;
  std::int64_t round = 0;

  explicit EstimatorState(int d = 0);
  int dimension() const { return static_cast<int>(mle.size()); }
  bool all_arms_observed() const;
};

// Accumulates one semi-bandit observation in place.
void update_estimator(EstimatorState& state, const ArmSet& action, const Observation& observation);

inline double kl_gaussian(double x, double y, double sigma) {
  const double diff = x - y;
  return diff * diff / (2.0 * sigma * sigma);
}

struct ConfidenceBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

ConfidenceBox confidence_box(const EstimatorState& state, std::span<const double> sigmas, double f_value);

// Half-width sqrt(2 f sigma^2 / n) of the Gaussian confidence interval.
double confidence_half_width(double f_value, double sigma, std::int64_t count);

// Projection of the MLE onto parameter_box ∩ confidence box; identity when
// the parameter set is unbounded.
std::vector<double> project_to_box(std::span<const double> mle,
                                   const std::optional<std::vector<Interval>>& parameter_box,
                                   const ConfidenceBox& confidence);

}  // namespace combgame

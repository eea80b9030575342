#pragma once

#include <cstdint>

namespace combgame {

enum class ThresholdMode { theoretical_subgaussian, theoretical_gaussian, stylized };
enum class BonusMode { theoretical, stylized };

const char* to_string(ThresholdMode mode);
const char* to_string(BonusMode mode);
ThresholdMode parse_threshold_mode(const char* name);
BonusMode parse_bonus_mode(const char* name);

struct ThresholdContext {
  int d0 = 2;                 // max |I Δ J| over distinct answers
  int max_action_size = 1;    // K
  double answer_count = 2.0;  // |I|, as a real since it may overflow integers
  ThresholdMode mode = ThresholdMode::stylized;

  void validate() const;
};

// Unique u >= 1 with u - ln u = x, i.e. -W_{-1}(-e^{-x}).
double lambert_wbar(double x);

// f(t); the theoretical mode clamps its argument to W̄'s domain.
double exploration_bonus(double t, BonusMode mode, double c, double b);

// Riemann zeta for s > 1 by Euler-Maclaurin corrected partial sums.
double riemann_zeta(double s);

// Deviation function of the sub-Gaussian time-uniform bound.
double tee(double x);

double g_gaussian(double y);

// min over y in (1/2, 1] of (g_gaussian(y) + x) / y.
double cgg(double x);

double stopping_threshold(double t, double delta, const ThresholdContext& ctx);

}  // namespace combgame

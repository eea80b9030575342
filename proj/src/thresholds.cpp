#include "combgame/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "combgame/common.hpp"

namespace combgame {

const char* to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::theoretical_subgaussian: return "theoretical_subgaussian";
    case ThresholdMode::theoretical_gaussian: return "theoretical_gaussian";
    case ThresholdMode::stylized: return "stylized";
  }
  return "unknown";
}

const char* to_string(BonusMode mode) {
  return mode == BonusMode::theoretical ? "theoretical" : "stylized";
}

ThresholdMode parse_threshold_mode(const char* name) {
  for (auto m : {ThresholdMode::theoretical_subgaussian, ThresholdMode::theoretical_gaussian, ThresholdMode::stylized}) {
    if (std::strcmp(name, to_string(m)) == 0) return m;
  }
  throw Error(Errc::invalid_parameter, std::string("unknown threshold mode '") + name + "'");
}

BonusMode parse_bonus_mode(const char* name) {
  for (auto m : {BonusMode::theoretical, BonusMode::stylized}) {
    if (std::strcmp(name, to_string(m)) == 0) return m;
  }
  throw Error(Errc::invalid_parameter, std::string("unknown bonus mode '") + name + "'");
}

void ThresholdContext::validate() const {
  if (d0 < 1) throw Error(Errc::invalid_parameter, "d0 must be at least 1");
  if (max_action_size < 1) throw Error(Errc::invalid_parameter, "K must be at least 1");
  if (!(answer_count >= 2.0)) throw Error(Errc::invalid_parameter, "need at least two answers");
}

double lambert_wbar(double x) {
  if (!(x >= 1.0)) throw Error(Errc::domain, "lambert_wbar needs x >= 1");
  if (x == 1.0) return 1.0;
  if (std::isinf(x)) return x;
  auto residual = [x](double u) { return u - std::log(u) - x; };
  // residual is increasing on [1, inf); keep a bracket and fall back to bisection
  double lo = 1.0;
  double hi = x + std::log(x) + 2.0;
  double u = std::min(x + std::log(x) + 0.5, hi);
  for (int it = 0; it < 200; ++it) {
    const double r = residual(u);
    if (std::abs(r) <= 1e-13 * std::max(1.0, x)) break;
    if (r > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    double next = u - r / (1.0 - 1.0 / u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == u) break;
    u = next;
  }
  return u;
}

double exploration_bonus(double t, BonusMode mode, double c, double b) {
  if (!(t >= 1.0)) throw Error(Errc::domain, "exploration bonus needs t >= 1");
  const double lt = std::log(t);
  if (mode == BonusMode::stylized) return std::max(lt, 0.0);
  const double arg = (1.0 + c) * (1.0 + b) * lt;
  return arg < 1.0 ? 1.0 : lambert_wbar(arg);
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw Error(Errc::domain, "zeta needs s > 1");
  constexpr int n = 1000;
  double sum = 0.0;
  for (int k = n - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double nn = n;
  sum += std::pow(nn, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(nn, -s);
  // Bernoulli numbers B2..B8 over (2k)!
  constexpr double coef[] = {1.0 / 6.0 / 2.0, -1.0 / 30.0 / 24.0, 1.0 / 42.0 / 720.0, -1.0 / 30.0 / 40320.0};
  double rising = s;  // s (s+1) ... (s+2k-2)
  for (int k = 1; k <= 4; ++k) {
    sum += coef[k - 1] * rising * std::pow(nn, -s - 2.0 * k + 1.0);
    rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
  }
  return sum;
}

namespace {

double h_of(double u) { return u - std::log(u); }

double h_tilde(double z, double x) {
  const double lz = std::log(z);
  if (x >= h_of(1.0 / lz)) {
    const double u = lambert_wbar(x);
    return std::exp(1.0 / u) * u;
  }
  return z * (x - std::log(lz));
}

}  // namespace

double tee(double x) {
  if (!(x >= 0.0)) throw Error(Errc::domain, "T needs x >= 0");
  const double inner = (lambert_wbar(1.0 + x) + std::log(std::numbers::pi * std::numbers::pi / 3.0)) / 2.0;
  return 2.0 * h_tilde(1.5, inner);
}

double g_gaussian(double y) {
  if (!(y > 0.5 && y <= 1.0)) throw Error(Errc::domain, "g_G needs y in (1/2, 1]");
  if (y == 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * y - 2.0 * y * std::log(4.0 * y) + std::log(riemann_zeta(2.0 * y)) - 0.5 * std::log(1.0 - y);
}

double cgg(double x) {
  if (!(x >= 0.0)) throw Error(Errc::domain, "C^gG needs x >= 0");
  constexpr double lo = 0.5 + 1e-6;
  constexpr double hi = 1.0 - 1e-9;
  auto obj = [x](double y) { return (g_gaussian(y) + x) / y; };
  // coarse grid to bracket the minimizer, then golden-section search
  constexpr int grid = 200;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double y = lo + (hi - lo) * i / grid;
    const double v = obj(y);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / grid;
  double b = lo + (hi - lo) * std::min(best + 1, grid) / grid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = obj(c), fd = obj(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = obj(d);
    }
  }
  return std::min({best_v, fc, fd});
}

double stopping_threshold(double t, double delta, const ThresholdContext& ctx) {
  if (!(t >= 1.0)) throw Error(Errc::domain, "threshold needs t >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::invalid_parameter, "delta must lie in (0,1)");
  if (ctx.mode == ThresholdMode::stylized) return std::log((1.0 + std::log(t)) / delta);
  ctx.validate();
  const double d0 = ctx.d0;
  // ln(tK/d0) is negative only for t < d0/K; clamped so the bound stays finite
  const double lt = std::max(std::log(t * ctx.max_action_size / d0), 0.0);
  const double x = std::log((ctx.answer_count - 1.0) / delta) / d0;
  // T(x) and C^gG(x) are numerical minimizations that do not depend on t; a run
  // asks for the same x every round, so the last value is kept
  thread_local ThresholdMode last_mode = ThresholdMode::stylized;
  thread_local double last_x = std::numeric_limits<double>::quiet_NaN();
  thread_local double last_tail = 0.0;
  if (ctx.mode != last_mode || x != last_x) {
    last_tail = ctx.mode == ThresholdMode::theoretical_subgaussian ? tee(x) : cgg(x);
    last_mode = ctx.mode;
    last_x = x;
  }
  if (ctx.mode == ThresholdMode::theoretical_subgaussian) {
    return 3.0 * d0 * std::log(1.0 + lt) + d0 * last_tail;
  }
  return 2.0 * d0 * std::log(4.0 + lt) + d0 * last_tail;
}

}  // namespace combgame

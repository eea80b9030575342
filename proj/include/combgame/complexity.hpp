#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "combgame/bandit.hpp"
#include "combgame/structures.hpp"

namespace combgame {

struct ComplexityResult {
  double value = 0.0;              // D_ν
  std::vector<double> allocation;  // maximizing w̃ in conv{1_A}
  std::vector<std::pair<ArmSet, double>> decomposition;  // convex weights of actions giving `allocation`
  std::int64_t iterations = 0;
  double residual = 0.0;    // certified upper bound minus value
  // smallest max_A <1_A, E_λ d_KL(μ, λ)> seen, over single best responses and
  // their running average
  double dual_value = 0.0;
};

// g(w̃) = min over alternatives J of the weighted KL to the closest λ in the
// cell of J, with I* the best answer of `means`.
double complexity_objective(std::span<const double> means, std::span<const double> sigmas,
                            std::span<const double> allocation, const AnswerSpace& answers);

// Frank-Wolfe ascent on g with step 2/(k+2); stops once the certified gap
// (dual bound or FW gap) falls below tol.
ComplexityResult compute_complexity(const BanditInstance& instance, const ActionSpace& actions,
                                    const AnswerSpace& answers, double tol = 1e-6, std::int64_t max_iter = 100000);

struct LowerBound {
  double value = 0.0;
  bool vacuous = false;
};

// ln(1/(2.4 δ)) / D_ν, the expected-stopping-time floor of δ-PAC strategies.
LowerBound lower_bound(double delta, double complexity_value);

}  // namespace combgame

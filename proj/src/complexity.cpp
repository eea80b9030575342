#include "combgame/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "combgame/game.hpp"

namespace combgame {

namespace {

ArmSet unique_best(std::span<const double> means, const AnswerSpace& answers) {
  const ArmSet best = answers.best(means);
  const double top = set_sum(best, means);
  answers.for_each_neighbor(best, [&](const ArmSet& j) {
    if (set_sum(j, means) >= top) throw Error(Errc::degenerate_instance, "best answer is not unique");
  });
  return best;
}

}  // namespace

double complexity_objective(std::span<const double> means, std::span<const double> sigmas,
                            std::span<const double> allocation, const AnswerSpace& answers) {
  const ArmSet best = answers.best(means);
  double value = std::numeric_limits<double>::infinity();
  answers.for_each_neighbor(best, [&](const ArmSet& j) {
    value = std::min(value, best_response_value(means, best, j, allocation, sigmas));
  });
  return value;
}

ComplexityResult compute_complexity(const BanditInstance& instance, const ActionSpace& actions,
                                    const AnswerSpace& answers, double tol, std::int64_t max_iter) {
  instance.validate();
  if (!(tol > 0.0) || max_iter < 1) throw Error(Errc::invalid_parameter, "tol and max_iter must be positive");
  const int d = instance.dimension();
  const auto ud = static_cast<std::size_t>(d);
  const std::span<const double> mu(instance.means);
  const std::span<const double> sigmas(instance.stddevs);
  const ArmSet best = unique_best(mu, answers);

  // start from the uniform mixture of a covering so that every arm has weight
  std::map<ArmSet, double> mix;
  const auto& cover = actions.covering();
  for (const auto& a : cover) mix[a] += 1.0 / static_cast<double>(cover.size());
  std::vector<double> w(ud, 0.0);
  for (const auto& [a, p] : mix) {
    for (int arm : a) w[static_cast<std::size_t>(arm)] += p;
  }

  ComplexityResult out;
  out.value = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::vector<double> kl(ud), avg_kl(ud, 0.0);
  double avg_mass = 0.0;

  for (std::int64_t k = 0; k < max_iter; ++k) {
    const LambdaResult br = lambda_player(mu, best, w, answers, sigmas);
    const double g = br.value;
    if (g > out.value) {
      out.value = g;
      out.allocation = w;
      out.decomposition.assign(mix.begin(), mix.end());
    }
    for (std::size_t a = 0; a < ud; ++a) kl[a] = kl_gaussian(mu[a], br.lambda[a], sigmas[a]);
    const ArmSet vertex = actions.argmax(kl);
    double gap = set_sum(vertex, kl);
    for (std::size_t a = 0; a < ud; ++a) gap -= w[a] * kl[a];
    upper = std::min(upper, g + gap);

    const double rho = static_cast<double>(k + 1);
    avg_mass += rho;
    for (std::size_t a = 0; a < ud; ++a) avg_kl[a] += rho / avg_mass * (kl[a] - avg_kl[a]);
    upper = std::min(upper, set_sum(actions.argmax(avg_kl), avg_kl));
    out.dual_value = upper;

    out.iterations = k + 1;
    out.residual = upper - out.value;
    if (gap <= tol || out.residual <= tol) break;

    const double step = 2.0 / static_cast<double>(k + 2);
    for (auto& x : w) x *= 1.0 - step;
    for (int a : vertex) w[static_cast<std::size_t>(a)] += step;
    for (auto& [a, p] : mix) p *= 1.0 - step;
    mix[vertex] += step;
  }
  std::erase_if(out.decomposition, [](const auto& e) { return e.second <= 0.0; });
  return out;
}

LowerBound lower_bound(double delta, double complexity_value) {
  if (!(complexity_value > 0.0)) throw Error(Errc::invalid_parameter, "complexity must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::invalid_parameter, "delta must lie in (0,1)");
  const double log_term = std::log(1.0 / (2.4 * delta));
  if (log_term <= 0.0) return {0.0, true};
  return {log_term / complexity_value, false};
}

}  // namespace combgame

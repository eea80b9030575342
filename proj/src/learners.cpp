#include "combgame/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace combgame {

const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::hedge: return "hedge";
    case LearnerKind::adahedge: return "adahedge";
    case LearnerKind::ofw: return "ofw";
    case LearnerKind::lloo: return "lloo";
    case LearnerKind::uniform: return "uniform";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(const char* name) {
  for (auto k : {LearnerKind::hedge, LearnerKind::adahedge, LearnerKind::ofw, LearnerKind::lloo, LearnerKind::uniform}) {
    if (std::strcmp(name, to_string(k)) == 0) return k;
  }
  throw Error(Errc::invalid_parameter, std::string("unknown learner '") + name + "'");
}

bool uses_full_initialization(LearnerKind kind) {
  return kind == LearnerKind::hedge || kind == LearnerKind::adahedge;
}

std::int64_t doubling_schedule(int epoch) {
  if (epoch < 0) throw Error(Errc::invalid_parameter, "negative epoch");
  const double base = (3.0 + std::sqrt(5.0)) / 2.0;
  return static_cast<std::int64_t>(std::floor(200.0 * std::pow(base, epoch)));
}

bool DoublingClock::advance(std::int64_t updates) {
  bool moved = false;
  while (updates > horizon) {
    ++epoch;
    horizon = doubling_schedule(epoch);
    moved = true;
  }
  return moved;
}

std::vector<double> exponential_weights(std::span<const double> cumulative_loss, double eta) {
  std::vector<double> w;
  exponential_weights(cumulative_loss, eta, w);
  return w;
}

void exponential_weights(std::span<const double> cumulative_loss, double eta, std::vector<double>& w) {
  const std::size_t n = cumulative_loss.size();
  if (n == 0) throw Error(Errc::invalid_parameter, "no actions");
  w.resize(n);
  const double lo = *std::min_element(cumulative_loss.begin(), cumulative_loss.end());
  if (std::isinf(eta)) {
    const double tol = 1e-12 * (1.0 + std::abs(lo));
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) ties += cumulative_loss[i] <= lo + tol;
    for (std::size_t i = 0; i < n; ++i) w[i] = cumulative_loss[i] <= lo + tol ? 1.0 / static_cast<double>(ties) : 0.0;
    return;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-eta * (cumulative_loss[i] - lo));
    total += w[i];
  }
  for (auto& x : w) x /= total;
}

LLOOParams lloo_params(double horizon, const PolytopeParams& polytope, double max_reward_norm, int d) {
  if (!(horizon > 0.0) || !(max_reward_norm > 0.0) || d < 1 || !(polytope.mu_poly > 0.0)) {
    throw Error(Errc::invalid_parameter, "LLOO parameters need positive inputs");
  }
  const double mu = polytope.mu_poly;
  const double dd = d;
  LLOOParams p;
  p.horizon = horizon;
  p.gamma = 1.0 / (3.0 * dd * mu * mu);
  p.eta = polytope.diameter / (18.0 * mu * std::sqrt(dd * horizon) * max_reward_norm);
  p.mass = std::min(mu * mu * dd / std::sqrt(horizon) * (1.0 + 1.0 / (18.0 * dd * mu * mu)), 1.0);
  return p;
}

ReduceResult reduce(const SparseWeights& weights, const ActionRegistry& registry, double mass,
                    std::span<const double> cost, int d) {
  if (weights.empty()) throw Error(Errc::invalid_mass, "empty support");
  double total = 0.0;
  for (const auto& [id, w] : weights) total += w;
  if (mass < 0.0 || mass > total * (1.0 + 1e-12) + 1e-15) throw Error(Errc::invalid_mass, "mass exceeds the available weight");
  struct Entry {
    double value;
    ActionId id;
    double weight;
  };
  thread_local std::vector<Entry> order;
  order.clear();
  for (const auto& [id, w] : weights) {
    if (w > 0.0) order.push_back({set_sum(registry.arms(id), cost), id, w});
  }
  // a heap pops entries in descending value (ties by id) and stops once `mass` is covered
  const auto after = [](const Entry& x, const Entry& y) { return x.value != y.value ? x.value < y.value : x.id > y.id; };
  std::make_heap(order.begin(), order.end(), after);
  ReduceResult out;
  out.point.assign(static_cast<std::size_t>(d), 0.0);
  double taken = 0.0;
  for (auto end = order.end(); end != order.begin(); --end) {
    if (taken >= mass) break;
    std::pop_heap(order.begin(), end, after);
    const Entry& e = *(end - 1);
    const double part = std::min(e.weight, mass - taken);
    out.weights.emplace_back(e.id, part);
    for (int a : registry.arms(e.id)) out.point[static_cast<std::size_t>(a)] += part;
    taken += part;
  }
  return out;
}

namespace {

void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(Errc::numeric, "non-finite reward");
  }
}

std::vector<ActionId> intern_all(const ActionSpace& space, ActionRegistry& registry) {
  if (!space.enumerable()) throw Error(Errc::invalid_parameter, "learner needs an enumerable action space");
  std::vector<ActionId> ids;
  ids.reserve(space.actions().size());
  for (const auto& a : space.actions()) ids.push_back(registry.intern(a));
  return ids;
}

void dense_view(WeightsView& view, const std::vector<ActionId>& ids, const std::vector<double>& w,
                const std::vector<ArmSet>& actions, int d) {
  view.support.clear();
  view.point.assign(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (w[i] <= 0.0) continue;
    view.support.emplace_back(ids[i], w[i]);
    for (int a : actions[i]) view.point[static_cast<std::size_t>(a)] += w[i];
  }
}

}  // namespace

UniformLearner::UniformLearner(const ActionSpace& space, ActionRegistry& registry) {
  const auto ids = intern_all(space, registry);
  dense_view(view_, ids, std::vector<double>(ids.size(), 1.0 / static_cast<double>(ids.size())), space.actions(),
             space.dimension());
}

// ---------------------------------------------------------------------------

HedgeLearner::HedgeLearner(const ActionSpace& space, ActionRegistry& registry)
    : space_(space), ids_(intern_all(space, registry)) {
  state_.cumulative_loss.assign(ids_.size(), 0.0);
  extended_.resize(ids_.size());
  refresh_rate_numerator();
  refresh();
  dense_view(view_, ids_, state_.weights, space_.actions(), space_.dimension());
}

void HedgeLearner::refresh_rate_numerator() {
  const double n = static_cast<double>(ids_.size());
  rate_numerator_ = std::sqrt(8.0 * std::log(n) / static_cast<double>(clock_.horizon));
}

void HedgeLearner::refresh() {
  state_.learning_rate = scale_ > 0.0 ? rate_numerator_ / scale_ : 0.0;
  exponential_weights(state_.cumulative_loss, state_.learning_rate, state_.weights);
}

void HedgeLearner::feed(std::span<const double> reward) {
  check_finite(reward);
  const auto& all = space_.actions();
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < all.size(); ++i) {
    extended_[i] = set_sum(all[i], reward);
    hi = std::max(hi, extended_[i]);
    lo = std::min(lo, extended_[i]);
  }
  scale_ = std::max(scale_, hi - lo);
  for (std::size_t i = 0; i < all.size(); ++i) state_.cumulative_loss[i] -= extended_[i];
  ++updates_;
  if (clock_.advance(updates_)) refresh_rate_numerator();
  refresh();
  dense_view(view_, ids_, state_.weights, space_.actions(), space_.dimension());
}

// ---------------------------------------------------------------------------

AdaHedgeLearner::AdaHedgeLearner(const ActionSpace& space, ActionRegistry& registry)
    : space_(space), ids_(intern_all(space, registry)) {
  state_.cumulative_loss.assign(ids_.size(), 0.0);
  state_.learning_rate = std::numeric_limits<double>::infinity();
  loss_.resize(ids_.size());
  refresh();
}

void AdaHedgeLearner::refresh() {
  exponential_weights(state_.cumulative_loss, state_.learning_rate, state_.weights);
  dense_view(view_, ids_, state_.weights, space_.actions(), space_.dimension());
}

void AdaHedgeLearner::feed(std::span<const double> reward) {
  check_finite(reward);
  const auto& all = space_.actions();
  for (std::size_t i = 0; i < all.size(); ++i) loss_[i] = -set_sum(all[i], reward);
  feed_losses(loss_);
}

void AdaHedgeLearner::feed_losses(std::span<const double> losses) {
  check_finite(losses);
  if (losses.size() != state_.weights.size()) throw Error(Errc::invalid_parameter, "loss vector size mismatch");
  const auto& w = state_.weights;
  const double eta = state_.learning_rate;
  double h = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    h += w[i] * losses[i];
    lo = std::min(lo, losses[i]);
  }
  // mix loss -(1/eta) ln sum_A w_A exp(-eta l_A); its eta -> inf limit is the support minimum
  double m = lo;
  if (std::isfinite(eta) && eta > 0.0) {
    double z = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) z += w[i] * std::exp(-eta * (losses[i] - lo));
    }
    m = lo - std::log(z) / eta;
  } else if (eta == 0.0) {
    m = h;
  }
  state_.adahedge_gap += std::max(h - m, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) state_.cumulative_loss[i] += losses[i];
  const double log_n = std::log(static_cast<double>(w.size()));
  state_.learning_rate = state_.adahedge_gap > 0.0 ? log_n / state_.adahedge_gap : std::numeric_limits<double>::infinity();
  refresh();
}

// ---------------------------------------------------------------------------

TransformedLearner::TransformedLearner(const ActionSpace& space, ActionRegistry& registry,
                                       const std::vector<ArmSet>& init, std::int64_t start_round)
    : space_(space), registry_(registry) {
  if (init.empty()) throw Error(Errc::invalid_parameter, "empty initialization");
  const int d = space.dimension();
  state_.point.assign(static_cast<std::size_t>(d), 0.0);
  state_.cumulative_reward.assign(static_cast<std::size_t>(d), 0.0);
  state_.round = start_round;
  const double share = 1.0 / static_cast<double>(init.size());
  for (const auto& a : init) add_mass(registry_.intern(a), share);
  resync_point();
  state_.anchor = state_.point;
  gradient_.resize(static_cast<std::size_t>(d));
  direction_.resize(static_cast<std::size_t>(d));
  publish();
}

void TransformedLearner::add_mass(ActionId id, double amount) {
  const auto i = static_cast<std::size_t>(id);
  if (i >= slot_.size()) slot_.resize(registry_.size(), -1);
  if (slot_[i] < 0) {
    slot_[i] = static_cast<std::int32_t>(state_.sparse_weights.size());
    state_.sparse_weights.emplace_back(id, 0.0);
  }
  auto& w = state_.sparse_weights[static_cast<std::size_t>(slot_[i])].second;
  w = std::max(w + amount, 0.0);
}

void TransformedLearner::resync_point() {
  std::fill(state_.point.begin(), state_.point.end(), 0.0);
  for (const auto& [id, w] : state_.sparse_weights) {
    for (int a : registry_.arms(id)) state_.point[static_cast<std::size_t>(a)] += w;
  }
}

void TransformedLearner::publish() {
  view_.support.clear();
  for (const auto& e : state_.sparse_weights) {
    if (e.second > 0.0) view_.support.push_back(e);
  }
  view_.point = state_.point;
}

OfwLearner::OfwLearner(const ActionSpace& space, ActionRegistry& registry, const std::vector<ArmSet>& init,
                       std::int64_t start_round)
    : TransformedLearner(space, registry, init, start_round), diameter_(space.polytope().diameter) {
  for (std::int64_t s = 1; s <= start_round; ++s) regularizer_sum_ += 2.0 * std::pow(static_cast<double>(s), -0.25) / diameter_;
}

void OfwLearner::feed(std::span<const double> reward) {
  check_finite(reward);
  const auto t = static_cast<double>(++state_.round);
  regularizer_sum_ += 2.0 * std::pow(t, -0.25) / diameter_;
  const std::size_t d = state_.point.size();
  for (std::size_t a = 0; a < d; ++a) {
    state_.cumulative_reward[a] += reward[a];
    gradient_[a] = (regularizer_sum_ * (state_.point[a] - state_.anchor[a]) - state_.cumulative_reward[a]) / t;
    direction_[a] = -gradient_[a];
  }
  const ArmSet target = space_.argmax(direction_);
  const ActionId id = registry_.intern(target);
  const double step = std::pow(t, -0.25);
  for (auto& e : state_.sparse_weights) e.second *= 1.0 - step;
  add_mass(id, step);
  for (auto& x : state_.point) x *= 1.0 - step;
  for (int a : target) state_.point[static_cast<std::size_t>(a)] += step;
  if (state_.round % 64 == 0) resync_point();
  publish();
}

LlooLearner::LlooLearner(const ActionSpace& space, ActionRegistry& registry, const std::vector<ArmSet>& init,
                         std::int64_t start_round)
    : TransformedLearner(space, registry, init, start_round), polytope_(space.polytope()) {}

void LlooLearner::feed(std::span<const double> reward) {
  check_finite(reward);
  const int d = space_.dimension();
  double norm = 0.0;
  for (double r : reward) norm += r * r;
  norm = std::sqrt(norm);
  if (!started_) {
    // first epoch: the only reward seen so far sets the scale
    epoch_max_norm_ = norm;
    params_ = lloo_params(static_cast<double>(clock_.horizon), polytope_, std::max(norm, 1e-300), d);
    started_ = true;
  }
  ++updates_;
  if (clock_.advance(updates_)) {
    params_ = lloo_params(static_cast<double>(clock_.horizon), polytope_, std::max(epoch_max_norm_, 1e-300), d);
    epoch_max_norm_ = 0.0;
  }
  epoch_max_norm_ = std::max(epoch_max_norm_, norm);
  ++state_.round;

  const auto ud = static_cast<std::size_t>(d);
  for (std::size_t a = 0; a < ud; ++a) {
    state_.cumulative_reward[a] += reward[a];
    gradient_[a] = 2.0 * (state_.point[a] - state_.anchor[a]) - params_.eta * state_.cumulative_reward[a];
    direction_[a] = -gradient_[a];
  }
  const ArmSet target = space_.argmax(direction_);
  const ActionId id = registry_.intern(target);
  const double g = params_.gamma;
  double total = 0.0;
  for (const auto& e : state_.sparse_weights) total += e.second;
  if (params_.mass >= total * (1.0 - 1e-12)) {
    // reduce keeps everything: (w̃_-, w_-) = (w̃, w), no ordering needed
    for (auto& e : state_.sparse_weights) e.second *= 1.0 - g;
    for (auto& x : state_.point) x *= 1.0 - g;
  } else {
    const ReduceResult away = reduce(state_.sparse_weights, registry_, params_.mass, gradient_, d);
    for (const auto& [aid, m] : away.weights) add_mass(aid, -g * m);
    for (std::size_t a = 0; a < ud; ++a) state_.point[a] -= g * away.point[a];
  }
  add_mass(id, g * params_.mass);
  for (int a : target) state_.point[static_cast<std::size_t>(a)] += g * params_.mass;
  if (state_.round % 64 == 0) resync_point();
  publish();
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, const ActionSpace& space, ActionRegistry& registry,
                                      const std::vector<ArmSet>& init) {
  const auto start = static_cast<std::int64_t>(init.size());
  switch (kind) {
    case LearnerKind::hedge: return std::make_unique<HedgeLearner>(space, registry);
    case LearnerKind::adahedge: return std::make_unique<AdaHedgeLearner>(space, registry);
    case LearnerKind::ofw: return std::make_unique<OfwLearner>(space, registry, init, start);
    case LearnerKind::lloo: return std::make_unique<LlooLearner>(space, registry, init, start);
    case LearnerKind::uniform: return std::make_unique<UniformLearner>(space, registry);
  }
  throw Error(Errc::invalid_parameter, "unknown learner kind");
}

}  // namespace combgame

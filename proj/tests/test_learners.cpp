#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "combgame/bandit.hpp"
#include "combgame/learners.hpp"

using namespace combgame;

namespace {

double total_mass(const SparseWeights& w) {
  double s = 0.0;
  for (const auto& e : w) s += e.second;
  return s;
}

std::vector<double> stacked_point(const SparseWeights& w, const ActionRegistry& reg, int d) {
  std::vector<double> p(static_cast<std::size_t>(d), 0.0);
  for (const auto& [id, m] : w) {
    for (int a : reg.arms(id)) p[static_cast<std::size_t>(a)] += m;
  }
  return p;
}

std::vector<double> random_reward(Rng& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> r(static_cast<std::size_t>(d));
  for (auto& x : r) x = u(rng);
  return r;
}

}  // namespace

TEST_CASE("exponential weights") {
  const std::vector<double> flat(4, 3.0);
  for (double w : exponential_weights(flat, 0.7)) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));

  const std::vector<double> l{0.0, 1.0};
  const auto w = exponential_weights(l, 1.0);
  CHECK(w[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(std::exp(-1.0) / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(0.7311).epsilon(1e-4));

  const std::vector<double> distinct{2.0, 0.5, 1.0};
  CHECK(exponential_weights(distinct, INFINITY) == std::vector<double>{0.0, 1.0, 0.0});

  Rng rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> loss(20);
    for (auto& x : loss) x = n(rng);
    const auto a = exponential_weights(loss, 0.3);
    double s = 0.0;
    for (double x : a) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    auto shifted = loss;
    for (auto& x : shifted) x += 4.2;
    const auto b = exponential_weights(shifted, 0.3);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-10);
  }
}

TEST_CASE("hedge learner") {
  const auto space = make_top_k(5, 2);
  ActionRegistry reg;
  HedgeLearner h(*space, reg);
  for (const auto& e : h.weights().support) CHECK(e.second == doctest::Approx(0.1));
  CHECK_THROWS_AS(h.feed(std::vector<double>{1.0, NAN, 0.0, 0.0, 0.0}), Error);

  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const auto r = random_reward(rng, 5);
    h.feed(r);
    CHECK(std::abs(total_mass(h.weights().support) - 1.0) <= 1e-12);
  }
  // adding a constant to every arm shifts every action reward equally
  ActionRegistry r1, r2;
  HedgeLearner a(*space, r1), b(*space, r2);
  for (int t = 0; t < 50; ++t) {
    auto r = random_reward(rng, 5);
    a.feed(r);
    for (auto& x : r) x += 0.75;
    b.feed(r);
  }
  // rewards differ by a constant per round, and so does the loss range: weights agree
  for (std::size_t k = 0; k < a.state().weights.size(); ++k) {
    CHECK(std::abs(a.state().weights[k] - b.state().weights[k]) <= 1e-10);
  }
}

TEST_CASE("adahedge learner") {
  const auto space = make_singletons(4);
  SUBCASE("identical losses keep uniform weights") {
    ActionRegistry reg;
    AdaHedgeLearner ada(*space, reg);
    for (int t = 0; t < 20; ++t) ada.feed_losses(std::vector<double>(4, 0.4));
    CHECK(ada.state().adahedge_gap == 0.0);
    for (double w : ada.state().weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("first round is follow-the-leader") {
    ActionRegistry reg;
    AdaHedgeLearner ada(*space, reg);
    CHECK(std::isinf(ada.state().learning_rate));
  }
  SUBCASE("rate is nonincreasing") {
    Rng rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ActionRegistry reg;
    AdaHedgeLearner ada(*space, reg);
    double prev = ada.state().learning_rate;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> loss(4);
      for (auto& x : loss) x = u(rng);
      ada.feed_losses(loss);
      CHECK(ada.state().learning_rate <= prev);
      CHECK(ada.state().adahedge_gap >= 0.0);
      prev = ada.state().learning_rate;
      CHECK(std::abs(total_mass(ada.weights().support) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("doubling schedule") {
  CHECK(doubling_schedule(0) == 200);
  CHECK(doubling_schedule(1) == 523);
  CHECK(doubling_schedule(2) == 1370);
}

TEST_CASE("reduce") {
  const auto space = make_top_k(4, 2);
  ActionRegistry reg;
  const ActionId a1 = reg.intern({0, 1});
  const ActionId a2 = reg.intern({2, 3});
  const std::vector<double> c{1.0, 1.0, 0.0, 0.0};

  const SparseWeights w{{a1, 0.7}, {a2, 0.3}};
  const ReduceResult full = reduce(w, reg, 1.0, c, 4);
  CHECK(std::abs(total_mass(full.weights) - 1.0) <= 1e-15);
  for (const auto& [id, m] : w) {
    const auto it = std::find_if(full.weights.begin(), full.weights.end(), [&](const auto& e) { return e.first == id; });
    REQUIRE(it != full.weights.end());
    CHECK(it->second == m);
  }

  const ReduceResult half = reduce(w, reg, 0.5, c, 4);
  REQUIRE(half.weights.size() == 1u);
  CHECK(half.weights[0].first == a1);
  CHECK(half.weights[0].second == doctest::Approx(0.5));
  CHECK(half.point == std::vector<double>{0.5, 0.5, 0.0, 0.0});

  CHECK_THROWS_AS(reduce(w, reg, 1.5, c, 4), Error);

  // a zero-weight action with the largest value does not stop the reduction
  const ActionId a3 = reg.intern({0, 2});
  const SparseWeights with_zero{{a1, 0.0}, {a2, 0.3}, {a3, 0.7}};
  const ReduceResult skip = reduce(with_zero, reg, 0.5, c, 4);
  REQUIRE(skip.weights.size() == 1u);
  CHECK(skip.weights[0].first == a3);
  CHECK(skip.weights[0].second == doctest::Approx(0.5));

  Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ActionRegistry big;
  SparseWeights rw;
  const auto seven = make_top_k(7, 3);
  for (const auto& a : seven->actions()) rw.emplace_back(big.intern(a), u(rng));
  const double total = total_mass(rw);
  for (auto& e : rw) e.second /= total;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> cost(7);
    for (auto& x : cost) x = u(rng) - 0.5;
    const double m = u(rng);
    const ReduceResult r = reduce(rw, big, m, cost, 7);
    CHECK(std::abs(total_mass(r.weights) - m) <= 1e-12);
    // taken actions are a prefix of the support sorted by descending <1_A, cost>
    auto sorted = rw;
    std::sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) {
      const double vx = set_sum(big.arms(x.first), cost), vy = set_sum(big.arms(y.first), cost);
      return vx != vy ? vx > vy : x.first < y.first;
    });
    REQUIRE(r.weights.size() <= sorted.size());
    for (std::size_t j = 0; j < r.weights.size(); ++j) {
      CHECK(r.weights[j].first == sorted[j].first);
      if (j + 1 < r.weights.size()) CHECK(r.weights[j].second == sorted[j].second);
    }
    const auto stacked = stacked_point(r.weights, big, 7);
    for (std::size_t a = 0; a < 7; ++a) CHECK(r.point[a] == stacked[a]);
  }
}

TEST_CASE("lloo parameters") {
  PolytopeParams p;
  p.diameter = std::sqrt(2.0);
  p.phi = 1.0;
  p.psi = 1.0;
  p.mu_poly = std::sqrt(2.0);
  const LLOOParams a = lloo_params(1000.0, p, 1.0, 3);
  CHECK(a.gamma == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
  CHECK(lloo_params(10.0, p, 1.0, 3).mass == 1.0);
  double prev_mass = 2.0, prev_eta = INFINITY;
  for (double t : {1e2, 1e4, 1e6, 1e8, 1e10}) {
    const LLOOParams q = lloo_params(t, p, 1.0, 3);
    CHECK(q.mass <= prev_mass);
    CHECK(q.eta < prev_eta);
    CHECK(q.mass <= 1.0);
    prev_mass = q.mass;
    prev_eta = q.eta;
  }
  CHECK(prev_mass < 1e-3);
  CHECK(prev_eta < 1e-5);
}

TEST_CASE("ofw learner") {
  const auto space = make_top_k(5, 2);
  SUBCASE("full step at the first round") {
    ActionRegistry reg;
    OfwLearner ofw(*space, reg, space->covering(), 0);
    const std::vector<double> r{0.1, 0.9, 0.2, 0.8, 0.3};
    ofw.feed(r);
    const auto target = incidence(space->argmax(r), 5);
    for (std::size_t a = 0; a < 5; ++a) CHECK(ofw.weights().point[a] == doctest::Approx(target[a]).epsilon(1e-15));
  }
  SUBCASE("the point stays in the hull") {
    ActionRegistry reg;
    OfwLearner ofw(*space, reg, space->covering(), static_cast<std::int64_t>(space->covering().size()));
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
      ofw.feed(random_reward(rng, 5));
      double s = 0.0;
      for (double x : ofw.weights().point) {
        CHECK(x >= -1e-12);
        CHECK(x <= 1.0 + 1e-12);
        s += x;
      }
      CHECK(std::abs(s - 2.0) <= 1e-9);
    }
  }
}

TEST_CASE("transformed learners keep a consistent sparse representation") {
  const auto space = make_top_k(6, 3);
  for (auto kind : {LearnerKind::ofw, LearnerKind::lloo}) {
    CAPTURE(to_string(kind));
    ActionRegistry reg;
    auto learner = make_learner(kind, *space, reg, space->covering());
    auto& tl = dynamic_cast<TransformedLearner&>(*learner);
    Rng rng(kind == LearnerKind::ofw ? 1 : 2);
    double max_drift = 0.0;
    for (int t = 1; t <= 1000; ++t) {
      std::set<ActionId> before;
      for (const auto& e : tl.state().sparse_weights) before.insert(e.first);
      learner->feed(random_reward(rng, 6));
      int added = 0;
      for (const auto& e : tl.state().sparse_weights) added += before.count(e.first) == 0;
      CHECK(added <= 1);
      CHECK(std::abs(total_mass(tl.state().sparse_weights) - 1.0) <= 1e-9);
      if (t % 100 == 0) {
        const auto stacked = stacked_point(tl.state().sparse_weights, reg, 6);
        for (std::size_t a = 0; a < 6; ++a) max_drift = std::max(max_drift, std::abs(stacked[a] - tl.state().point[a]));
      }
    }
    CHECK(max_drift < 1e-8);
  }
}

TEST_CASE("average regret shrinks over the second half of a fixed stream") {
  const auto space = make_top_k(6, 2);
  const std::vector<double> mean{1.0, 0.8, 0.6, 0.5, 0.4, 0.2};
  const int horizon = 10000;
  for (auto kind : {LearnerKind::hedge, LearnerKind::adahedge, LearnerKind::lloo}) {
    CAPTURE(to_string(kind));
    ActionRegistry reg;
    const auto& init = uses_full_initialization(kind) ? space->actions() : space->covering();
    auto learner = make_learner(kind, *space, reg, init);
    Rng rng(5);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<double> cumulative(6, 0.0);
    double played = 0.0;
    double mid = 0.0;
    for (int t = 1; t <= horizon; ++t) {
      std::vector<double> r(6);
      for (std::size_t a = 0; a < 6; ++a) r[a] = mean[a] + noise(rng);
      const auto& p = learner->weights().point;
      for (std::size_t a = 0; a < 6; ++a) {
        played += p[a] * r[a];
        cumulative[a] += r[a];
      }
      learner->feed(r);
      if (t == horizon / 2 || t == horizon) {
        const double avg = (set_sum(space->argmax(cumulative), cumulative) - played) / t;
        if (t == horizon / 2) {
          mid = avg;
        } else {
          CHECK(avg < mid);
        }
      }
    }
  }
}

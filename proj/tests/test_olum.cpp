#include <stdexcept>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "fairalloc/olum.hpp"
#include "fairalloc/rng.hpp"
#include "oracles.hpp"

using namespace fairalloc;

namespace {

std::vector<double> zeros(std::size_t k) { return std::vector<double>(k, 0.0); }

OlumParams fixed_cap(double V, double cap) {
  OlumParams p;
  p.V = V;
  p.cap.mode = GammaCap::Mode::Fixed;
  p.cap.value = cap;
  return p;
}

}  // namespace

TEST_CASE("initial state") {
  OlumState s(3, DeadlineSet({1, 2}), 1);
  CHECK(s.stage() == 1);
  for (double q : s.queues()) CHECK(q == 1.0);
  CHECK(s.sample_count() == 0);
  CHECK_THROWS_AS(OlumState(0, DeadlineSet({1}), 1), std::invalid_argument);
  CHECK_THROWS_AS(OlumState(2, DeadlineSet({1}), 0), std::invalid_argument);
  CHECK(default_v(4000.0) == doctest::Approx(std::sqrt(4000.0 / std::log(4000.0))));
}

TEST_CASE("queue update") {
  OlumState s(2, DeadlineSet({1}), 1);
  s.set_queue(0, 1.0);
  s.set_queue(1, 1.0);
  s.update_queues(1, 2.0, 3.0, std::vector<double>{0.5, 0.5});
  CHECK(s.queues()[0] == doctest::Approx(2.0));
  CHECK(s.queues()[1] == 0.0);
  s.set_queue(0, 0.0);
  s.update_queues(1, 5.0, 0.0, std::vector<double>{0.0, 0.0});
  CHECK(s.queues()[0] == 0.0);
  CHECK(s.stage() == 3);
  CHECK_THROWS(s.update_queues(2, 1.0, 0.0, std::vector<double>{0.0, 0.0}));
  CHECK_THROWS(s.set_queue(0, -1.0));
}

TEST_CASE("auxiliary variable") {
  OlumState s(1, DeadlineSet({1}), 1);
  const auto inf = std::numeric_limits<double>::max();
  s.set_queue(0, 2.0);
  CHECK(auxiliary(s, std::vector{UtilitySpec(1.0, 1.0)}, fixed_cap(20, inf), 0) == doctest::Approx(10.0));
  s.set_queue(0, 5.0);
  CHECK(auxiliary(s, std::vector{UtilitySpec(2.0, 1.0)}, fixed_cap(20, inf), 0) == doctest::Approx(2.0));
  s.set_queue(0, 0.0);
  CHECK(auxiliary(s, std::vector{UtilitySpec(1.0, 1.0)}, fixed_cap(20, 0.6), 0) == 0.6);
  s.set_queue(0, 1.0);
  CHECK(auxiliary(s, std::vector{UtilitySpec(1.0, 1.0)}, fixed_cap(20, 0.6), 0) == 0.6);
  SUBCASE("linear utility switches on the price") {
    s.set_queue(0, 10.0);
    CHECK(auxiliary(s, std::vector{UtilitySpec(0.0, 1.0)}, fixed_cap(20, 0.6), 0) == 0.6);
    s.set_queue(0, 30.0);
    CHECK(auxiliary(s, std::vector{UtilitySpec(0.0, 1.0)}, fixed_cap(20, 0.6), 0) == 0.0);
  }
  SUBCASE("empirical cap uses the best empirical rate") {
    OlumState e(1, DeadlineSet({1, 3}), 1);
    e.ingest_feedback(1, std::vector<TaskSample>{{2.0, 1.0}});
    e.update_queues(0, 1.0, 0.0, std::vector<double>{0.0});
    e.set_queue(0, 0.0);
    OlumParams p;
    p.V = 20;
    // t=1: 0/1, t=3: 1/2
    CHECK(e.best_empirical_rate(0) == doctest::Approx(0.5));
    CHECK(auxiliary(e, std::vector{UtilitySpec(1.0, 1.0)}, p, 0) == doctest::Approx(0.5));
    CHECK(auxiliary(e, std::vector{UtilitySpec(0.0, 1.0)}, p, 0) == doctest::Approx(p.cap.linear_headroom * 0.5));
  }
}

TEST_CASE("delayed feedback buffer") {
  SUBCASE("tau 1: task n visible when deciding task n+1") {
    OlumState s(2, DeadlineSet({1, 5}), 1);
    s.ingest_feedback(1, std::vector<TaskSample>{{2, 1}, {3, 1}});
    CHECK(s.sample_count() == 0);
    s.update_queues(0, 2.0, 0.0, zeros(2));
    CHECK(s.sample_count() == 1);
    CHECK(s.samples(1)[0].completion == 3.0);
  }
  SUBCASE("tau 3: cold start while nothing is released") {
    OlumState s(2, DeadlineSet({1, 5}), 3);
    for (std::size_t n = 1; n <= 6; ++n) {
      CHECK(s.sample_count() == (n > 3 ? n - 3 : 0));
      if (n == 2) {
        auto d = decide(s);
        CHECK(d.group == 1);
        CHECK(d.deadline == 5.0);
      }
      s.ingest_feedback(n, std::vector<TaskSample>{{1, 1}, {1, 1}});
      s.update_queues(0, 1.0, 0.0, zeros(2));
    }
  }
  SUBCASE("ordering is enforced") {
    OlumState s(1, DeadlineSet({1}), 1);
    CHECK_THROWS(s.ingest_feedback(2, std::vector<TaskSample>{{1, 1}}));
    CHECK_THROWS(s.ingest_feedback(1, std::vector<TaskSample>{{1, 1}, {1, 1}}));
    CHECK_THROWS(s.ingest_feedback(1, std::vector<TaskSample>{{0, 1}}));
    s.ingest_feedback(1, std::vector<TaskSample>{{1, 1}});
    CHECK_THROWS(s.ingest_feedback(2, std::vector<TaskSample>{{1, 1}}));
  }
}

TEST_CASE("cold start round robin at the largest deadline") {
  OlumState s(3, DeadlineSet({1, 2, 9}), 1);
  for (std::size_t n = 1; n <= 3; ++n) {
    auto d = decide(s);
    CHECK(d.group == n - 1);
    CHECK(d.deadline == 9.0);
    CHECK(d.deadline_index == 2);
    s.ingest_feedback(n, std::vector<TaskSample>{{1, 1}, {1, 1}, {1, 1}});
    s.update_queues(d.group, 1.0, 1.0, zeros(3));
  }
}

TEST_CASE("weighted rate argmax") {
  const DeadlineSet d({1, 2});
  std::vector<std::vector<double>> theta{{0.9, 1.5}, {0.5, 0.6}}, mu{{1.0, 1.5}, {1.0, 1.5}};
  auto a = weighted_rate_argmax(std::vector<double>{1, 1}, theta, mu, d);
  CHECK(a.group == 0);
  CHECK(a.deadline == 2.0);
  auto b = weighted_rate_argmax(std::vector<double>{1, 10}, theta, mu, d);
  CHECK(b.group == 1);
  CHECK(b.deadline_index == 0);
  auto tie = weighted_rate_argmax(std::vector<double>{1, 1}, {{1, 2}, {1, 2}}, {{1, 2}, {1, 2}}, d);
  CHECK(tie.group == 0);
  CHECK(tie.deadline_index == 0);

  SUBCASE("scale free in one group's estimates") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    const DeadlineSet d4({1, 2, 3, 4});
    for (int i = 0; i < 500; ++i) {
      std::vector<std::vector<double>> th(3, std::vector<double>(4)), m(3, std::vector<double>(4));
      for (auto& r : th) for (auto& v : r) v = u(gen);
      for (auto& r : m) for (auto& v : r) v = u(gen);
      std::vector<double> q{u(gen), u(gen), u(gen)};
      auto before = weighted_rate_argmax(q, th, m, d4);
      const double c = u(gen) * 10.0;
      const std::size_t k = static_cast<std::size_t>(i % 3);
      for (std::size_t l = 0; l < 4; ++l) th[k][l] *= c, m[k][l] *= c;
      auto after = weighted_rate_argmax(q, th, m, d4);
      REQUIRE(before.group == after.group);
      REQUIRE(before.deadline_index == after.deadline_index);
    }
  }
}

TEST_CASE("empirical estimators") {
  const DeadlineSet d({1.5, 2, 3, 4, 5, 7, 10, 15, 20});
  OlumState s(1, d, 1);
  const GroupModel g(Pareto(1.0, 1.2), PowerOfTime(0.6));
  std::vector<double> clipped;
  for (std::size_t n = 1; n <= 10000; ++n) {
    CounterRng rng(stream_key(17, n));
    auto x = sample_task(g, rng);
    clipped.push_back(std::min(x.completion, 5.0));
    s.ingest_feedback(n, std::vector<TaskSample>{x});
    s.update_queues(0, 1.0, 0.0, zeros(1));
  }
  CHECK(s.sample_count() == 10000);
  auto e = oracle::estimate(clipped);
  const double exact = 6.0 - 5.0 * std::pow(5.0, -0.2);
  CHECK(std::abs(s.mu_hat(0, 5.0) - exact) < 3.0 * e.se);
  for (std::size_t l = 0; l < d.size(); ++l) {
    CHECK(s.mu_hat_at(0, l) == doctest::Approx(s.mu_hat(0, d[l])).epsilon(1e-12));
    CHECK(s.theta_hat_at(0, l) == doctest::Approx(s.theta_hat(0, d[l])).epsilon(1e-12));
  }
}

TEST_CASE("single arm: always chosen, queue is a reflected walk") {
  const DeadlineSet d({3.0});
  OlumState s(1, d, 1);
  const GroupModel g(Pareto(1.0, 1.4), PowerOfTime(0.2));
  const std::vector<UtilitySpec> u{UtilitySpec(1.0, 1.0)};
  OlumParams p;
  p.V = 20;
  for (std::size_t n = 1; n <= 5000; ++n) {
    auto dec = decide(s);
    REQUIRE(dec.group == 0);
    REQUIRE(dec.deadline == 3.0);
    CounterRng rng(stream_key(1, n));
    auto x = sample_task(g, rng);
    const double elapsed = std::min(x.completion, 3.0);
    const double reward = x.completion <= 3.0 ? x.base_reward : 0.0;
    const std::vector<double> gm{auxiliary(s, u, p, 0)};
    const double before = s.queues()[0];
    s.ingest_feedback(n, std::vector<TaskSample>{x});
    s.update_queues(0, elapsed, reward, gm);
    REQUIRE(s.queues()[0] >= 0.0);
    REQUIRE(s.queues()[0] == doctest::Approx(std::max(0.0, before + gm[0] * elapsed - reward)));
  }
}

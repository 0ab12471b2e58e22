#include <stdexcept>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fairalloc/environment.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/offline.hpp"

using namespace fairalloc;

namespace {

const std::vector<double> kGrid{1.5, 2, 3, 4, 5, 7, 10, 15, 20};

std::vector<GroupModel> pareto_pair_groups() {
  return {GroupModel(Pareto(1.0, 1.2), PowerOfTime(0.6), "g1"), GroupModel(Pareto(1.0, 1.4), PowerOfTime(0.2), "g2")};
}

Environment pareto_pair(double alpha, std::vector<double> w = {1.0, 1.0}) {
  return Environment(pareto_pair_groups(), {UtilitySpec(alpha, w[0]), UtilitySpec(alpha, w[1])}, DeadlineSet(kGrid));
}

std::vector<GroupStats> stats_of(std::vector<double> r, std::vector<double> mu) {
  std::vector<GroupStats> out;
  for (std::size_t k = 0; k < r.size(); ++k) out.push_back({k, 1.0, r[k], mu[k], r[k] * mu[k]});
  return out;
}

std::vector<UtilitySpec> utils(double alpha, std::vector<double> w) {
  std::vector<UtilitySpec> out;
  for (double x : w) out.emplace_back(alpha, x);
  return out;
}

double grid_rate(const GroupModel& g, double t) {
  // independent of the library's ratio helper: closed forms typed out here
  const auto& p = std::get<Pareto>(g.completion());
  const double b = std::get<PowerOfTime>(g.reward()).exponent;
  const double mu = 1.0 + (1.0 - std::pow(t, 1.0 - p.shape)) / (p.shape - 1.0);
  const double th = p.shape / (p.shape - b) * (1.0 - std::pow(t, b - p.shape));
  return th / mu;
}

}  // namespace

TEST_CASE("optimal_deadline") {
  auto s = optimal_deadline(GroupModel(Deterministic(2.0), ConstantReward(1.0)), DeadlineSet({1, 2, 3}));
  CHECK(s.t_star == 2.0);
  CHECK(s.r_star == 0.5);
  CHECK(s.r_star == s.theta_star / s.mu_star);

  const auto gs = pareto_pair_groups();
  auto a = optimal_deadline(gs[0], DeadlineSet(kGrid));
  auto b = optimal_deadline(gs[1], DeadlineSet(kGrid));
  CHECK(a.t_star == 7.0);
  CHECK(a.r_star == doctest::Approx(0.528).epsilon(1e-3));
  CHECK(b.t_star == 4.0);
  CHECK(b.r_star == doctest::Approx(0.458).epsilon(1e-3));
  CHECK(a.r_star > b.r_star);
  for (std::size_t k = 0; k < 2; ++k) {
    double best = 0.0, arg = 0.0;
    for (double t : kGrid) {
      if (grid_rate(gs[k], t) > best) best = grid_rate(gs[k], t), arg = t;
    }
    CHECK((k == 0 ? a : b).t_star == arg);
    CHECK((k == 0 ? a : b).r_star == doctest::Approx(best).epsilon(1e-12));
  }

  SUBCASE("ties go to the smaller deadline") {
    auto t = optimal_deadline(GroupModel(Deterministic(1.0), ConstantReward(1.0)), DeadlineSet({1, 2}));
    CHECK(t.t_star == 1.0);
    auto e = optimal_deadline(GroupModel(Empirical({1.0}), ConstantReward(1.0)), DeadlineSet({2, 3, 4}));
    CHECK(e.t_star == 2.0);
  }
  CHECK_THROWS_AS(optimal_deadline(GroupModel(Deterministic(5.0), ConstantReward(1.0)), DeadlineSet({1, 2})),
                  NoRewardError);
}

TEST_CASE("closed form and bisection fractions") {
  SUBCASE("proportional fairness splits by weight") {
    auto st = stats_of({0.528, 0.458}, {2.6, 2.1});
    auto u = utils(1.0, {1, 1});
    auto sol = alpha_fair_closed_form(1.0, u, st);
    CHECK(sol.phi[0] == doctest::Approx(0.5));
    CHECK(sol.phi[1] == doctest::Approx(0.5));
    CHECK(sol.lambda == doctest::Approx(2.0));
    auto w = alpha_fair_closed_form(1.0, utils(1.0, {3, 1}), st);
    CHECK(w.phi[0] == doctest::Approx(0.75));
    CHECK(w.phi[1] == doctest::Approx(0.25));
    // selection proportional to w / mu
    CHECK(sol.selection[0] / sol.selection[1] == doctest::Approx(2.1 / 2.6));
  }
  SUBCASE("alpha 0.5 weights by rate") {
    auto sol = alpha_fair_closed_form(0.5, utils(0.5, {1, 1}), stats_of({0.528, 0.458}, {1, 1}));
    CHECK(sol.phi[0] == doctest::Approx(0.528 / 0.986));
    CHECK(sol.phi[0] == doctest::Approx(0.5355).epsilon(1e-3));
    auto bis = solve_fractions(utils(0.5, {1, 1}), stats_of({0.528, 0.458}, {1, 1}));
    const double total = bis.phi[0] + bis.phi[1];
    CHECK(bis.phi[0] / total == doctest::Approx(sol.phi[0]).epsilon(1e-9));
  }
  SUBCASE("alpha 0 takes the best weighted rate") {
    auto sol = alpha_fair_closed_form(0.0, utils(0.0, {1, 1}), stats_of({0.528, 0.458}, {2, 1}));
    CHECK(sol.phi == std::vector<double>{1.0, 0.0});
    CHECK(sol.selection == std::vector<double>{1.0, 0.0});
    CHECK(sol.utility_rate == doctest::Approx(0.528));
    auto w = alpha_fair_closed_form(0.0, utils(0.0, {1, 2}), stats_of({0.528, 0.458}, {2, 1}));
    CHECK(w.phi == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(solve_fractions(utils(0.0, {1, 1}), stats_of({0.5, 0.4}, {1, 1})), std::invalid_argument);
  }
  SUBCASE("symmetric alpha 2") {
    auto sol = alpha_fair_closed_form(2.0, utils(2.0, {1, 1}), stats_of({0.5, 0.5}, {1, 1}));
    CHECK(sol.phi[0] == doctest::Approx(0.5));
    CHECK(sol.selection[1] == doctest::Approx(0.5));
  }
  SUBCASE("utility rate definition") {
    auto st = stats_of({0.3, 0.9, 0.5}, {1.5, 2.0, 0.7});
    for (double a : {0.3, 1.0, 2.5}) {
      auto u = utils(a, {1.0, 2.0, 0.5});
      auto sol = alpha_fair_closed_form(a, u, st);
      double v = 0.0;
      for (std::size_t k = 0; k < 3; ++k) v += u[k].value(st[k].r_star * sol.phi[k]);
      CHECK(sol.utility_rate == doctest::Approx(v).epsilon(1e-12));
      CHECK(std::accumulate(sol.phi.begin(), sol.phi.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::accumulate(sol.selection.begin(), sol.selection.end(), 0.0) ==
            doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(sol.phi[k] > 0.0);
        CHECK(sol.phi[k] / (sol.selection[k] * st[k].mu_star) ==
              doctest::Approx(sol.phi[0] / (sol.selection[0] * st[0].mu_star)));
      }
    }
  }
  SUBCASE("zero-rate group is excluded and flagged") {
    auto bis = solve_fractions(utils(1.0, {1, 1}), stats_of({0.5, 0.0}, {1, 1}));
    CHECK(bis.floored);
    CHECK(bis.phi[1] == 0.0);
  }
}

TEST_CASE("solver equivalence on randomized instances") {
  std::mt19937_64 gen(1234);
  std::uniform_int_distribution<int> uk(2, 5);
  std::uniform_real_distribution<double> ur(0.05, 3.0), um(0.2, 5.0), uw(0.2, 5.0);
  const double alphas[] = {0.3, 0.5, 1.0, 2.0, 4.0};
  for (int i = 0; i < 100; ++i) {
    const int K = uk(gen);
    const double a = alphas[i % 5];
    std::vector<double> r, mu, w;
    for (int k = 0; k < K; ++k) r.push_back(ur(gen)), mu.push_back(um(gen)), w.push_back(uw(gen));
    auto st = stats_of(r, mu);
    auto u = utils(a, w);
    auto cf = alpha_fair_closed_form(a, u, st);
    auto bis = solve_fractions(u, st);
    const double total = std::accumulate(bis.phi.begin(), bis.phi.end(), 0.0);
    REQUIRE(std::abs(total - 1.0) <= 1e-9);
    for (int k = 0; k < K; ++k) REQUIRE(std::abs(cf.phi[k] - bis.phi[k]) <= 1e-9);
  }
}

TEST_CASE("mixed alphas go through bisection") {
  auto gs = pareto_pair_groups();
  Environment env(gs, {UtilitySpec(0.5, 1.0), UtilitySpec(2.0, 1.0)}, DeadlineSet(kGrid));
  auto sol = solve_offline(env);
  CHECK(sol.phi[0] + sol.phi[1] == doctest::Approx(1.0).epsilon(1e-9));
  // KKT: U_k'(r_k phi_k) r_k equal across groups
  const double g0 = env.utilities[0].marginal(sol.stats[0].r_star * sol.phi[0]) * sol.stats[0].r_star;
  const double g1 = env.utilities[1].marginal(sol.stats[1].r_star * sol.phi[1]) * sol.stats[1].r_star;
  CHECK(g0 == doctest::Approx(g1).epsilon(1e-8));
}

TEST_CASE("selection_from_fractions") {
  auto st = stats_of({1, 1}, {2, 1});
  auto s = selection_from_fractions(std::vector<double>{0.5, 0.5}, st);
  CHECK(s[0] == doctest::Approx(1.0 / 3.0));
  CHECK(s[1] == doctest::Approx(2.0 / 3.0));
  CHECK(selection_from_fractions(std::vector<double>{1.0, 0.0}, st) == std::vector<double>{1.0, 0.0});
  auto e = selection_from_fractions(std::vector<double>{0.5, 0.5}, stats_of({1, 1}, {1, 1}));
  CHECK(e[0] == doctest::Approx(0.5));
}

TEST_CASE("SRP utility rate") {
  const auto env = pareto_pair(1.0);
  const auto sol = solve_offline(env);
  const auto table = moment_table(env.groups, env.deadlines);
  const auto star = SrpDistribution::from_solution(sol, env.deadlines);
  CHECK(utility_rate_of_srp(star, table, env.utilities).utility == doctest::Approx(sol.utility_rate).epsilon(1e-12));

  SUBCASE("single group, single deadline") {
    Environment one({GroupModel(Pareto(1.0, 1.4), PowerOfTime(0.2))}, {UtilitySpec(1.0, 1.0)}, DeadlineSet({4.0}));
    auto ev = utility_rate_of_srp(SrpDistribution(std::vector<std::vector<double>>{{1.0}}), one);
    CHECK(ev.utility == doctest::Approx(std::log(expected_reward(one.groups[0], 4.0) /
                                                 truncated_mean_time(one.groups[0].completion(), 4.0))));
  }
  SUBCASE("random SRPs never beat the optimum") {
    for (double a : {0.5, 1.0, 2.0}) {
      const auto e = pareto_pair(a, {1.0, 1.7});
      const auto s = solve_offline(e);
      const auto t = moment_table(e.groups, e.deadlines);
      std::mt19937_64 gen(42);
      std::exponential_distribution<double> ex(1.0);
      for (int i = 0; i < 10000; ++i) {
        std::vector<std::vector<double>> p(2, std::vector<double>(kGrid.size()));
        double total = 0.0;
        for (auto& row : p) for (auto& v : row) total += (v = ex(gen));
        for (auto& row : p) for (auto& v : row) v /= total;
        REQUIRE(utility_rate_of_srp(SrpDistribution(p), t, e.utilities).utility <= s.utility_rate + 1e-9);
      }
    }
  }
  CHECK_THROWS_AS(SrpDistribution(std::vector<std::vector<double>>{{0.5, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(SrpDistribution(std::vector<std::vector<double>>{{1.2, -0.2}}), std::invalid_argument);
}

TEST_CASE("bisection bracket is monotone in lambda") {
  // sum_k phi_k(lambda) from the KKT map, evaluated independently
  auto st = stats_of({0.4, 1.1, 0.7}, {1, 1, 1});
  auto u = std::vector<UtilitySpec>{UtilitySpec(0.5, 1.0), UtilitySpec(1.0, 2.0), UtilitySpec(3.0, 0.5)};
  double prev = std::numeric_limits<double>::infinity();
  for (double lam = 1e-6; lam < 1e6; lam *= 1.5) {
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) s += u[k].inverse_marginal(lam / st[k].r_star) / st[k].r_star;
    REQUIRE(s < prev);
    prev = s;
  }
}

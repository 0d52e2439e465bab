#include "cmdp/error.hpp"
#include "cmdp/sim.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmdp;

namespace {

SimulationOptions opts(Index n, std::uint64_t seed = 42, unsigned threads = 1) {
  SimulationOptions o;
  o.trajectories = n;
  o.seed = seed;
  o.threads = threads;
  return o;
}

bool same(const SimulationReport& a, const SimulationReport& b) {
  return a.trajectories == b.trajectories && a.occupation == b.occupation && a.occupation_se == b.occupation_se &&
         a.marginal == b.marginal && a.cost_mean == b.cost_mean && a.cost_se == b.cost_se &&
         a.absorption_times == b.absorption_times && a.capped == b.capped;
}

}  // namespace

TEST_CASE("geometric model") {
  auto g = fixtures::geometric(0.5);
  auto r = simulate(g, DeterministicStrategy{{0}}, opts(100000));
  CHECK(r.trajectories == 100000);
  CHECK(std::abs(r.marginal[0] - 2.0) <= 3 * r.marginal_se[0]);
  CHECK(r.capped == 0);
  Index total = 0;
  for (auto [t, c] : r.absorption_times) total += c;
  CHECK(total == 100000);

  // One entry doubled is far outside the error bars.
  OccupationMeasure wrong{Eigen::VectorXd::Constant(1, 4.0)};
  CHECK(compare_empirical(r, wrong) > 10.0);
  CHECK(compare_empirical(r, OccupationMeasure{Eigen::VectorXd::Constant(1, 2.0)}) < 4.0);
}

TEST_CASE("immediate absorption is exact") {
  auto t = fixtures::twoact();
  auto r = simulate(t, DeterministicStrategy{{1}}, opts(1000));
  CHECK(r.marginal[0] == 1.0);
  CHECK(r.marginal_se[0] == 0.0);
  CHECK(r.absorption_times.size() == 1);
  CHECK(r.absorption_times.at(1) == 1000);
  CHECK(compare_empirical(r, OccupationMeasure{Eigen::Vector2d(0.0, 1.0)}) == 0.0);
  CHECK(std::isinf(compare_empirical(r, OccupationMeasure{Eigen::Vector2d(0.0, 0.9)})));
}

TEST_CASE("non-absorbing strategy hits the cap") {
  auto l = fixtures::loop();
  SimulationOptions o = opts(50);
  o.step_cap = 100;
  auto r = simulate(l, DeterministicStrategy{{0}}, o);
  CHECK(r.capped == 50);
  CHECK(r.occupation[0] == 100.0);
}

TEST_CASE("degenerate report compares to zero") {
  auto t = fixtures::twoact();
  OccupationMeasure m{Eigen::Vector2d(0.5, 0.5)};
  CHECK(compare_empirical(report_from_measure(t, m), m) == 0.0);
  CHECK_THROWS_AS(compare_empirical(report_from_measure(t, m), OccupationMeasure{Eigen::VectorXd::Zero(3)}), cmdp::Error);
}

TEST_CASE("reports do not depend on the thread count") {
  testsupport::Rng rng(77);
  auto model = testsupport::random_model(rng, {});
  auto sigma = testsupport::random_stationary(rng, model);
  auto one = simulate(model, sigma, opts(5000, 9, 1));
  CHECK(same(one, simulate(model, sigma, opts(5000, 9, 3))));
  CHECK(same(one, simulate(model, sigma, opts(5000, 9, 8))));
  CHECK_FALSE(same(one, simulate(model, sigma, opts(5000, 10, 1))));
}

TEST_CASE("stationary and Markov strategies converge to their occupation") {
  testsupport::Rng rng(78);
  for (int i = 0; i < 5; ++i) {
    auto model = testsupport::random_model(rng, {});
    auto sigma = testsupport::random_stationary(rng, model);
    OccupationMeasure exact{oracle::power_series_occupation(model, sigma.probs)};
    CHECK(compare_empirical(simulate(model, sigma, opts(40000, 100 + i)), exact) < 4.5);
    MarkovStrategy m{{uniform_strategy(model)}, sigma};
    auto mo = occupation_of_markov(model, m).value();
    CHECK(compare_empirical(simulate(model, m, opts(40000, 200 + i)), mo) < 4.5);
  }
}

TEST_CASE("mixture semantics draw one selector per trajectory") {
  auto ls = fixtures::loop_or_stop();
  MixedStrategy half{{{0.5, {{0}}}, {0.5, {{1}}}}};
  auto r = simulate(ls, half, opts(100000));
  // Mixing on every step would give the stationary 0.5/0.5 kernel instead.
  CHECK(std::abs(r.occupation[0] - 1.0) <= 4 * r.occupation_se[0]);
  CHECK(std::abs(r.occupation[1] - 0.5) <= 4 * r.occupation_se[1]);

  auto a = simulate(ls, DeterministicStrategy{{0}}, opts(50000, 1));
  auto b = simulate(ls, DeterministicStrategy{{1}}, opts(50000, 2));
  double pooled = 0.5 * (a.occupation[0] + b.occupation[0]);
  double pooled_se = 0.5 * std::hypot(a.occupation_se[0], b.occupation_se[0]);
  CHECK(std::abs(r.occupation[0] - pooled) <= 4 * std::hypot(r.occupation_se[0], pooled_se));
}

TEST_CASE("invalid options") {
  auto t = fixtures::twoact();
  CHECK_THROWS_AS(simulate(t, DeterministicStrategy{{0}}, opts(0)), cmdp::Error);
  SimulationOptions o = opts(10);
  o.step_cap = 0;
  CHECK_THROWS_AS(simulate(t, DeterministicStrategy{{0}}, o), cmdp::Error);
}

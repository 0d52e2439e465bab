// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// time limit is a constant below. Run from the source tree (the worked
// examples read models/ and tests/golden/).

#include "cmdp/cli.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/mixture.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/sim.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace cmdp;
using testsupport::Rng;

namespace {

// Pinned tolerances.
constexpr double kFlowTol = 1e-9;
constexpr double kRoundTripTol = 1e-8;
constexpr double kVertexTol = 1e-8;
constexpr double kObjectiveTol = 1e-6;
constexpr double kConstraintTol = 1e-8;
constexpr double kSpectralMargin = 1e-10;
constexpr double kPerturbation = 1e-4;
constexpr double kUniquenessMargin = 1e-6;
constexpr double kMarginalTol = 1e-10;
constexpr double kMarkovOccupationTol = 1e-8;
constexpr double kZGate = 4.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

testsupport::ModelShape absorbing_shape(Index max_states, Index max_actions) {
  testsupport::ModelShape s;
  s.max_states = max_states;
  s.max_actions = max_actions;
  s.min_absorb = 0.1;
  s.max_absorb = 0.6;
  return s;
}

bool near_any(const std::vector<Eigen::VectorXd>& set, const Eigen::VectorXd& v, double tol) {
  for (const auto& w : set)
    if ((w - v).cwiseAbs().maxCoeff() <= tol) return true;
  return false;
}

/// Seeded corpus shared by the first two criteria.
struct FlowInstance {
  FiniteMdpModel model;
  StationaryStrategy sigma;
};

std::vector<FlowInstance> flow_corpus() {
  std::vector<FlowInstance> out;
  Rng rng(20240101);
  for (int i = 0; i < 200; ++i) {
    auto model = testsupport::random_model(rng, absorbing_shape(6, 4));
    auto sigma = testsupport::random_stationary(rng, model);
    out.push_back({std::move(model), std::move(sigma)});
  }
  return out;
}

Outcome flow_balance() {
  Outcome o;
  double worst = 0.0, worst_oracle = 0.0;
  for (const auto& inst : flow_corpus()) {
    auto m = occupation_of_stationary(inst.model, inst.sigma).value();
    worst = std::max(worst, flow_residual(inst.model, m));
    auto series = oracle::power_series_occupation(inst.model, inst.sigma.probs);
    worst_oracle = std::max(worst_oracle, (m.values - series).cwiseAbs().maxCoeff());
  }
  o.require(worst <= kFlowTol, "flow residual " + fmt("%.3g", worst));
  o.require(worst_oracle <= kFlowTol, "power-series mismatch " + fmt("%.3g", worst_oracle));
  o.detail = o.pass ? "200 models, max residual " + fmt("%.2e", worst) + ", max power-series gap " + fmt("%.2e", worst_oracle)
                    : o.detail;
  return o;
}

Outcome induced_round_trip() {
  Outcome o;
  double worst = 0.0;
  for (const auto& inst : flow_corpus()) {
    auto m = occupation_of_stationary(inst.model, inst.sigma).value();
    auto induced = induced_strategy(inst.model, m, lowest_index_selector(inst.model));
    auto again = occupation_of_stationary(inst.model, induced).value();
    worst = std::max(worst, (again.values - m.values).cwiseAbs().maxCoeff());
  }
  o.require(worst <= kRoundTripTol, "round-trip gap " + fmt("%.3g", worst));
  if (o.pass) o.detail = "200 models, max sup-norm gap " + fmt("%.2e", worst);
  return o;
}

Outcome vertices_are_deterministic() {
  Outcome o;
  Rng rng(20240303);
  int combos = 0, models = 0;
  Index vertices_total = 0;
  while (models < 50) {
    auto shape = absorbing_shape(4, 3);
    shape.min_actions = 2;
    auto model = testsupport::random_model(rng, shape);
    ++models;
    auto flow = make_problem(model.with_costs(model.costs().topRows(1), {model.cost_name(0)}), Eigen::VectorXd(0));
    auto v = enumerate_vertices(build_occupation_lp(flow));
    o.require(!v.truncated, "vertex enumeration truncated");

    std::vector<Eigen::VectorXd> det;
    for (const auto& phi : testsupport::all_selectors(model)) {
      auto m = oracle::power_series_occupation(model, oracle::dirac(model, phi));
      if (!near_any(det, m, kVertexTol)) det.push_back(m);
      o.require(is_extreme(model, OccupationMeasure{occupation_of_stationary(model, as_stationary(model, phi)).value()}).extreme,
                "deterministic occupation judged non-extreme");
      o.require(near_any(v.vertices, m, kVertexTol), "deterministic occupation is not a vertex");
    }
    o.require(v.vertices.size() == det.size(), "vertex count differs from deterministic count");
    for (const auto& x : v.vertices) o.require(near_any(det, x, kVertexTol), "vertex without a deterministic strategy");
    vertices_total += static_cast<Index>(v.vertices.size());

    // Two proper convex combinations per model.
    if (det.size() < 2) continue;
    for (int c = 0; c < 2 && combos < 100; ++c, ++combos) {
      Index parts = std::min<Index>(static_cast<Index>(det.size()), testsupport::uniform_int(rng, 2, 3));
      std::vector<Index> pick;
      while (static_cast<Index>(pick.size()) < parts) {
        Index k = testsupport::uniform_int(rng, 0, static_cast<Index>(det.size()) - 1);
        if (std::find(pick.begin(), pick.end(), k) == pick.end()) pick.push_back(k);
      }
      Eigen::VectorXd w(parts);
      for (Index k = 0; k < parts; ++k) w[k] = testsupport::uniform(rng, 0.1, 1.0);
      w /= w.sum();
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(model.num_pairs());
      for (Index k = 0; k < parts; ++k) mix += w[k] * det[pick[k]];
      o.require(!is_extreme(model, OccupationMeasure{mix}).extreme, "convex combination judged extreme");
      o.require(!near_any(v.vertices, mix, kVertexTol), "convex combination coincides with a vertex");
    }
  }
  o.require(combos == 100, "only " + std::to_string(combos) + " convex combinations generated");
  if (o.pass)
    o.detail = "50 models, " + std::to_string(vertices_total) + " vertices, " + std::to_string(combos) +
               " combinations";
  return o;
}

/// Cost vectors of every absorbing selector, by the series oracle.
std::vector<Eigen::VectorXd> deterministic_points(const FiniteMdpModel& model) {
  std::vector<Eigen::VectorXd> pts;
  for (const auto& phi : testsupport::all_selectors(model)) {
    auto s = oracle::dirac(model, phi);
    if (oracle::reachable_spectral_radius(model, s) >= 1.0 - kSpectralMargin) continue;
    pts.push_back(model.costs() * oracle::power_series_occupation(model, s, 1000000));
  }
  return pts;
}

Outcome mixture_optimality() {
  Outcome o;
  Rng rng(20240404);
  int solved = 0, drawn = 0, binding = 0;
  double worst_gap = 0.0, worst_violation = 0.0;
  while (solved < 50) {
    ++drawn;
    auto shape = absorbing_shape(4, 3);
    shape.costs = testsupport::uniform_int(rng, 2, 3);
    shape.zero_leak = 0.3;
    auto model = testsupport::random_model(rng, shape);
    auto sigma = testsupport::random_stationary(rng, model);
    if (oracle::reachable_spectral_radius(model, sigma.probs) >= 1.0 - kSpectralMargin) continue;
    Eigen::VectorXd r = model.costs() * oracle::power_series_occupation(model, sigma.probs, 1000000);
    auto problem = make_problem(model, r.tail(shape.costs - 1));
    if (!check_penalization_assumption(problem).holds) continue;
    ++solved;

    auto sol = solve_constrained(problem);
    const auto& d = sol.decomposition;
    const Index jn = problem.num_constraints();
    o.require(!d.fallback, "fallback flag set");
    o.require(d.cardinality <= jn + 1, "cardinality " + std::to_string(d.cardinality));

    // Re-evaluate the mixture with the oracle.
    Eigen::VectorXd achieved = Eigen::VectorXd::Zero(model.num_costs());
    for (const auto& c : d.mixture.components)
      achieved += c.weight * (model.costs() * oracle::power_series_occupation(model, oracle::dirac(model, c.selector), 1000000));
    auto best = oracle::best_mixture_objective(deterministic_points(model), problem.bounds);
    o.require(best.has_value(), "oracle found no feasible weighting");
    if (!best) continue;
    double gap = std::abs(achieved[0] - *best);
    worst_gap = std::max(worst_gap, gap);
    o.require(gap <= kObjectiveTol, "objective gap " + fmt("%.3g", gap));
    for (Index j = 0; j < jn; ++j) {
      double excess = achieved[j + 1] - problem.bounds[j];
      worst_violation = std::max(worst_violation, excess);
      o.require(excess <= kConstraintTol, "constraint violated by " + fmt("%.3g", excess));
    }
    if (d.cardinality > 1) ++binding;
  }
  if (o.pass)
    o.detail = "50 instances (" + std::to_string(drawn) + " drawn, " + std::to_string(binding) +
               " randomized), max objective gap " + fmt("%.2e", worst_gap) + ", max violation " +
               fmt("%.2e", std::max(0.0, worst_violation));
  return o;
}

/// Random model with an optional all-zero-cost end component planted on
/// fresh states. `kind`: 0 none, 1 reachable, 2 unreachable, 3 reachable
/// but leaking.
FiniteMdpModel assumption_instance(Rng& rng, int kind) {
  testsupport::ModelShape shape = absorbing_shape(5, 3);
  shape.costs = testsupport::uniform_int(rng, 1, 2);
  shape.zero_leak = 0.3;
  shape.zero_cost = 0.3;
  auto base = testsupport::random_model(rng, shape);
  const Index n = base.num_states();
  const Index extra = kind == 0 ? 0 : testsupport::uniform_int(rng, 1, 2);
  const Index total = n + extra;

  std::vector<Index> counts;
  for (Index x = 0; x < n; ++x) counts.push_back(base.num_actions(x));
  for (Index z = 0; z < extra; ++z) counts.push_back(2);
  const Index pairs = base.num_pairs() + 2 * extra;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(pairs, total);
  Eigen::MatrixXd costs = Eigen::MatrixXd::Zero(base.num_costs(), pairs);
  kernel.topLeftCorner(base.num_pairs(), n) = base.kernel();
  costs.leftCols(base.num_pairs()) = base.costs();

  // Zero-cost pairs of the base model always leak, so the base itself has
  // no zero-cost end component.
  for (Index k = 0; k < base.num_pairs(); ++k) {
    if (!base.costs().col(k).isZero()) continue;
    double mass = kernel.row(k).sum();
    if (mass > 0.9) kernel.row(k) *= 0.9 / mass;
  }
  for (Index z = 0; z < extra; ++z) {
    const Index x = n + z;
    const Index stay = base.num_pairs() + 2 * z;
    const Index leave = stay + 1;
    const Index next = n + (z + 1) % extra;
    kernel(stay, next) = kind == 3 ? 0.999 : 1.0;  // cycle through the fresh states
    kernel(leave, testsupport::uniform_int(rng, 0, n - 1)) = 0.5;
    for (Index j = 0; j < base.num_costs(); ++j) costs(j, leave) = testsupport::uniform(rng, 0.1, 1.0);
    (void)x;
  }
  if (kind == 1 || kind == 3) {
    // Redirect part of the initial state's first action into the fresh states.
    kernel.row(0) *= 0.8;
    kernel(0, n) += 0.2;
  }
  return dense_model(counts, kernel, costs, 0);
}

Outcome assumption_checker() {
  Outcome o;
  Rng rng(20240505);
  int positives = 0, witnesses = 0;
  for (int i = 0; i < 100; ++i) {
    const bool planted = i % 2 == 0;
    const int kind = planted ? 1 : (i % 6 == 1 ? 0 : (i % 6 == 3 ? 2 : 3));
    auto model = assumption_instance(rng, kind);
    auto check = check_penalization_assumption(model);
    o.require(check.holds == !planted, "verdict differs from construction on instance " + std::to_string(i));
    positives += planted;
    if (check.holds) continue;
    ++witnesses;
    auto sigma = stay_forever_strategy(model, check.witness);
    o.require(!classify_finiteness(model, sigma).finite(), "stay-forever strategy classified finite");
    for (Index k : check.witness)
      o.require(model.costs().col(k).isZero() && model.absorption()[k] == 0.0, "witness pair is not zero-cost and closed");
    Eigen::VectorXd c1 = oracle::prefix_costs(model, sigma.probs, 5000);
    Eigen::VectorXd c2 = oracle::prefix_costs(model, sigma.probs, 10000);
    o.require(c2.allFinite() && (c2 - c1).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + c2.cwiseAbs().maxCoeff()),
              "accumulated costs do not settle under the stay-forever strategy");
  }
  if (o.pass)
    o.detail = "100 models, " + std::to_string(positives) + " planted, " + std::to_string(witnesses) + " witnesses checked";
  return o;
}

Outcome finiteness_vs_spectrum() {
  Outcome o;
  Rng rng(20240606);
  int finite = 0;
  for (int i = 0; i < 200; ++i) {
    testsupport::ModelShape shape;
    shape.max_states = 6;
    shape.max_actions = 3;
    shape.zero_leak = 0.6;
    shape.edge_density = 0.4;
    auto model = testsupport::random_model(rng, shape);
    auto sigma = testsupport::random_stationary(rng, model, 0.5);
    bool verdict = classify_finiteness(model, sigma).finite();
    bool spectral = oracle::reachable_spectral_radius(model, sigma.probs) < 1.0 - kSpectralMargin;
    o.require(verdict == spectral, "disagreement on strategy " + std::to_string(i));
    finite += verdict;
  }
  if (o.pass) o.detail = "200 strategies, " + std::to_string(finite) + " finite / " + std::to_string(200 - finite) + " infinite";
  return o;
}

Outcome value_equation() {
  Outcome o;
  Rng rng(20240707);
  constexpr Index kSteps = 300;
  double worst = 0.0, min_break = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    auto model = testsupport::random_model(rng, absorbing_shape(6, 4));
    auto sigma = testsupport::random_stationary(rng, model);
    Eigen::VectorXd f(model.num_states());
    for (Index x = 0; x < f.size(); ++x) f[x] = testsupport::uniform(rng);
    auto v = evaluate_value(model, sigma, f);
    Eigen::MatrixXd p = oracle::chain(model, sigma.probs);
    const double q = p.rowwise().sum().maxCoeff();
    const double bound = oracle::truncation_tail_bound(f.cwiseAbs().maxCoeff(), q, kSteps);
    auto truncated = oracle::truncated_value(model, sigma.probs, f, kSteps);
    for (Index x = 0; x < f.size(); ++x) {
      if (!v.defined[static_cast<std::size_t>(x)]) continue;
      double gap = std::abs(v.values[x] - truncated[x]);
      worst = std::max(worst, gap);
      o.require(gap <= bound + 1e-12, "value gap " + fmt("%.3g", gap) + " exceeds tail bound " + fmt("%.3g", bound));
    }
    o.require(value_equation_residual(model, sigma, f, v.values, v.defined) <= kFlowTol, "value residual too large");
    for (Index x = 0; x < f.size(); ++x) {
      if (!v.defined[static_cast<std::size_t>(x)]) continue;
      Eigen::VectorXd w = v.values;
      w[x] += kPerturbation;
      double r = value_equation_residual(model, sigma, f, w, v.defined);
      min_break = std::min(min_break, r);
      o.require(r > kUniquenessMargin, "perturbation not detected");
    }
  }
  if (o.pass)
    o.detail = "100 instances, max gap " + fmt("%.2e", worst) + ", smallest perturbed residual " + fmt("%.2e", min_break);
  return o;
}

/// P(X_{n-1} = x, A_n = a), n = 1..steps, for a sequence of kernels.
std::vector<Eigen::VectorXd> forward_marginals(const FiniteMdpModel& model,
                                               const std::function<const Eigen::VectorXd&(Index)>& kernel,
                                               Index steps) {
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(model.num_states());
  nu[model.initial()] = 1.0;
  for (Index n = 1; n <= steps; ++n) {
    const Eigen::VectorXd& s = kernel(n);
    Eigen::VectorXd pair(model.num_pairs());
    for (Index k = 0; k < model.num_pairs(); ++k) pair[k] = s[k] * nu[model.state_of(k)];
    out.push_back(pair);
    nu = oracle::chain(model, s).transpose() * nu;
  }
  return out;
}

Outcome markovization() {
  Outcome o;
  Rng rng(20240808);
  constexpr Index kHorizon = 20;
  double worst_marginal = 0.0, worst_occ = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto model = testsupport::random_model(rng, absorbing_shape(6, 4));
    MixedStrategy mix;
    const Index parts = testsupport::uniform_int(rng, 1, 3);
    double total = 0.0;
    for (Index l = 0; l < parts; ++l) {
      double w = testsupport::uniform(rng, 0.1, 1.0);
      mix.components.push_back({w, testsupport::random_selector(rng, model)});
      total += w;
    }
    for (auto& c : mix.components) c.weight /= total;
    validate_strategy(model, mix);

    auto markov = markovize_mixture(model, mix, kHorizon);
    auto got = forward_marginals(model, [&](Index n) -> const Eigen::VectorXd& { return markov.at_step(static_cast<std::size_t>(n)).probs; },
                                 kHorizon);
    std::vector<Eigen::VectorXd> expect(kHorizon, Eigen::VectorXd::Zero(model.num_pairs()));
    Eigen::VectorXd expect_occ = Eigen::VectorXd::Zero(model.num_pairs());
    for (const auto& c : mix.components) {
      Eigen::VectorXd s = oracle::dirac(model, c.selector);
      auto comp = forward_marginals(model, [&](Index) -> const Eigen::VectorXd& { return s; }, kHorizon);
      for (Index n = 0; n < kHorizon; ++n) expect[n] += c.weight * comp[n];
      expect_occ += c.weight * oracle::power_series_occupation(model, s);
    }
    for (Index n = 0; n < kHorizon; ++n)
      worst_marginal = std::max(worst_marginal, (got[n] - expect[n]).cwiseAbs().maxCoeff());
    auto occ = occupation_of_markov(model, markov).value();
    worst_occ = std::max(worst_occ, (occ.values - expect_occ).cwiseAbs().maxCoeff());
  }
  o.require(worst_marginal <= kMarginalTol, "marginal gap " + fmt("%.3g", worst_marginal));
  o.require(worst_occ <= kMarkovOccupationTol, "occupation gap " + fmt("%.3g", worst_occ));
  if (o.pass)
    o.detail = "20 mixtures, max marginal gap " + fmt("%.2e", worst_marginal) + ", max occupation gap " + fmt("%.2e", worst_occ);
  return o;
}

bool identical(const SimulationReport& a, const SimulationReport& b) {
  return a.occupation == b.occupation && a.occupation_se == b.occupation_se && a.marginal == b.marginal &&
         a.marginal_se == b.marginal_se && a.cost_mean == b.cost_mean && a.cost_se == b.cost_se &&
         a.absorption_times == b.absorption_times && a.capped == b.capped;
}

Outcome simulation_calibration() {
  Outcome o;
  SimulationOptions opt;
  opt.trajectories = 100000;
  opt.seed = 42;

  auto g = fixtures::geometric(0.5);
  auto rg = simulate(g, DeterministicStrategy{{0}}, opt);
  double zg = std::abs(rg.marginal[0] - 2.0) / rg.marginal_se[0];
  o.require(zg <= kZGate, "geometric z " + fmt("%.3g", zg));

  auto sol = solve_constrained(fixtures::twoact_problem(0.5));
  auto rt = simulate(fixtures::twoact(), sol.decomposition.mixture, opt);
  double z0 = std::abs(rt.cost_mean[0] - 0.5) / rt.cost_se[0];
  double z1 = std::abs(rt.cost_mean[1] - 0.5) / rt.cost_se[1];
  o.require(z0 <= kZGate && z1 <= kZGate, "two-action z " + fmt("%.3g", std::max(z0, z1)));

  for (unsigned threads : {2u, 8u}) {
    SimulationOptions t = opt;
    t.threads = threads;
    o.require(identical(rg, simulate(g, DeterministicStrategy{{0}}, t)), "geometric report depends on threads");
    o.require(identical(rt, simulate(fixtures::twoact(), sol.decomposition.mixture, t)),
              "two-action report depends on threads");
  }
  if (o.pass)
    o.detail = "z = " + fmt("%.2f", zg) + " (geometric), " + fmt("%.2f", z0) + " / " + fmt("%.2f", z1) +
               " (two-action); identical at 1, 2, 8 threads";
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome worked_examples() {
  Outcome o;
  auto run = [](std::vector<std::string> args, std::string* out) {
    std::ostringstream os, es;
    int code = run_cli(args, os, es);
    *out = os.str();
    return code;
  };
  std::string out;

  int code = run({"solve", "models/twoact.json"}, &out);
  o.require(code == 0, "two-action solve exit " + std::to_string(code));
  o.require(out == slurp("tests/golden/solve_twoact.out"), "two-action output differs from golden file");
  try {
    auto doc = nlohmann::json::parse(out);
    o.require(std::abs(doc["objective"]["value"].get<double>() - 0.5) <= 1e-12, "R_0 is not 0.5");
    const auto& comps = doc["mixture"]["components"];
    o.require(comps.size() == 2, "mixture does not have two components");
    if (comps.size() == 2) {
      o.require(std::abs(comps[0]["weight"].get<double>() - 0.5) <= 1e-12 &&
                    std::abs(comps[1]["weight"].get<double>() - 0.5) <= 1e-12,
                "weights are not 0.5 / 0.5");
      o.require(comps[0]["policy"]["s0"] != comps[1]["policy"]["s0"], "components are not distinct selectors");
    }
  } catch (const std::exception& e) {
    o.require(false, std::string("unreadable solve output: ") + e.what());
  }

  code = run({"check-assumption", "models/stopping.json"}, &out);
  o.require(code == 0, "stopping model fails the assumption check");
  code = run({"solve", "models/stopping.json"}, &out);
  o.require(code == 0, "stopping model does not solve");
  o.require(out == slurp("tests/golden/solve_stopping.out"), "stopping output differs from golden file");

  code = run({"check-assumption", "models/zeroloop.json"}, &out);
  o.require(code == 3, "zero-cost loop exit " + std::to_string(code));
  try {
    auto doc = nlohmann::json::parse(out);
    o.require(doc["witness"] == nlohmann::json::parse(R"([{"state": "s0", "action": "a"}])"), "wrong witness");
  } catch (const std::exception& e) {
    o.require(false, std::string("unreadable witness: ") + e.what());
  }
  code = run({"solve", "models/zeroloop.json"}, &out);
  o.require(code == 3, "zero-cost loop solve exit " + std::to_string(code));
  if (o.pass) o.detail = "R_0 = 0.5 with 0.5/0.5 mixture; stopping solved; loop exit 3 with witness (s0, a)";
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "flow balance of computed occupation measures", 10, flow_balance},
      {2, "induced-strategy round trip", 10, induced_round_trip},
      {3, "vertices are exactly the deterministic occupations", 60, vertices_are_deterministic},
      {4, "optimal mixtures of at most J+1 selectors", 120, mixture_optimality},
      {5, "penalization assumption checker", 10, assumption_checker},
      {6, "finiteness classifier vs spectral radius", 10, finiteness_vs_spectrum},
      {7, "value equation and uniqueness", 10, value_equation},
      {8, "markovization of mixtures", 10, markovization},
      {9, "simulation calibration and determinism", 60, simulation_calibration},
      {10, "worked examples", 5, worked_examples},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      o.pass = false;
      o.detail += " [over time limit of " + fmt("%.0f", c.limit_seconds) + " s]";
    }
    std::printf("AC%-2d %s  %s: %s (%.2f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs);
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}

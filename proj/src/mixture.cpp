#include "cmdp/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace cmdp {

ExtremalityVerdict is_extreme(const FiniteMdpModel& model, const OccupationMeasure& m, double tol) {
  const Eigen::VectorXd mu = marginal(model, m);
  for (Index x = 0; x < model.num_states(); ++x) {
    if (!(mu[x] > tol)) continue;
    double best = m.values.segment(model.pair_begin(x), model.num_actions(x)).maxCoeff();
    if (best / mu[x] < 1.0 - tol) return {false, x};
  }
  return {true, std::nullopt};
}

DeterministicStrategy argmax_selector(const FiniteMdpModel& model, const OccupationMeasure& m,
                                      double tol) {
  const Eigen::VectorXd mu = marginal(model, m);
  DeterministicStrategy phi = lowest_index_selector(model);
  for (Index x = 0; x < model.num_states(); ++x) {
    if (!(mu[x] > tol)) continue;
    Eigen::Index best = 0;
    m.values.segment(model.pair_begin(x), model.num_actions(x)).maxCoeff(&best);
    phi.choice[x] = best;
  }
  return phi;
}

double selector_count(const FiniteMdpModel& model) {
  double count = 1.0;
  for (Index x = 0; x < model.num_states(); ++x) {
    count *= static_cast<double>(model.num_actions(x));
    if (!std::isfinite(count)) return std::numeric_limits<double>::infinity();
  }
  return count;
}

namespace {

SelectorEvaluation evaluate_selector(const FiniteMdpModel& model, const DeterministicStrategy& phi,
                                     const Tolerances& tol) {
  SelectorEvaluation ev;
  ev.selector = phi;
  auto res = occupation_of_stationary(model, as_stationary(model, phi), tol);
  ev.finiteness = std::move(res.finiteness);
  if (res.measure) {
    ev.objective = cost_vector(model, *res.measure);
    ev.occupation = std::move(res.measure);
  }
  return ev;
}

/// Odometer over per-state option lists in lexicographic order.
template <typename Visit>
void for_each_product(const std::vector<std::vector<Index>>& options, Visit&& visit) {
  const std::size_t n = options.size();
  std::vector<std::size_t> digit(n, 0);
  DeterministicStrategy phi{std::vector<Index>(n)};
  for (;;) {
    for (std::size_t x = 0; x < n; ++x) phi.choice[x] = options[x][digit[x]];
    if (!visit(phi)) return;
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++digit[pos] < options[pos].size()) break;
      digit[pos] = 0;
      if (pos == 0) return;
    }
    if (n == 0) return;
  }
}

std::vector<std::vector<Index>> all_actions(const FiniteMdpModel& model) {
  std::vector<std::vector<Index>> options(static_cast<std::size_t>(model.num_states()));
  for (Index x = 0; x < model.num_states(); ++x) {
    options[x].resize(static_cast<std::size_t>(model.num_actions(x)));
    std::iota(options[x].begin(), options[x].end(), Index{0});
  }
  return options;
}

}  // namespace

void for_each_deterministic(const FiniteMdpModel& model,
                            const std::function<void(const SelectorEvaluation&)>& visit,
                            const Tolerances& tol) {
  if (selector_count(model) > kSelectorGuard)
    throw Error(ErrorCode::TooManySelectors, "more than 10^6 deterministic selectors");
  for_each_product(all_actions(model), [&](const DeterministicStrategy& phi) {
    visit(evaluate_selector(model, phi, tol));
    return true;
  });
}

std::vector<SelectorEvaluation> enumerate_deterministic(const FiniteMdpModel& model,
                                                        const Tolerances& tol) {
  std::vector<SelectorEvaluation> out;
  for_each_deterministic(model, [&](const SelectorEvaluation& ev) { out.push_back(ev); }, tol);
  return out;
}

DeterministicStrategy solve_unconstrained(const FiniteMdpModel& model,
                                          const Eigen::VectorXd& weights, const Tolerances& tol) {
  if (weights.size() != model.num_costs())
    throw Error(ErrorCode::ShapeMismatch, "one weight per cost table is required");
  if (weights.minCoeff() < 0.0) throw Error(ErrorCode::InvalidArgument, "weights must be >= 0");
  const Eigen::VectorXd cost = model.costs().transpose() * weights;
  const Index n_states = model.num_states();
  constexpr Index kMaxSweeps = 100000;

  auto q_values = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return cost + model.kernel() * v;
  };
  auto greedy = [&](const Eigen::VectorXd& q, const DeterministicStrategy* keep) {
    DeterministicStrategy phi = lowest_index_selector(model);
    for (Index x = 0; x < n_states; ++x) {
      auto row = q.segment(model.pair_begin(x), model.num_actions(x));
      double best = row.minCoeff();
      double slack = 1e-9 * std::max(1.0, std::abs(best));
      Index pick = -1;
      if (keep && row[(*keep)[x]] <= best + slack) pick = (*keep)[x];
      for (Index a = 0; pick < 0 && a < row.size(); ++a)
        if (row[a] <= best + slack) pick = a;
      phi.choice[x] = pick;
    }
    return phi;
  };

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_states);
  bool converged = false;
  for (Index sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Eigen::VectorXd q = q_values(v);
    Eigen::VectorXd next(n_states);
    for (Index x = 0; x < n_states; ++x)
      next[x] = q.segment(model.pair_begin(x), model.num_actions(x)).minCoeff();
    double change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (change <= tol.value_iteration) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorCode::NonConvergent, "value iteration hit the sweep cap");

  DeterministicStrategy phi = greedy(q_values(v), nullptr);

  // Policy-improvement polish when the selector is absorbing everywhere;
  // keeps the current action unless another is better by more than the slack.
  const Eigen::VectorXd everywhere = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  for (Index round = 0; round < 4 * n_states + 4; ++round) {
    auto sigma = as_stationary(model, phi);
    if (!classify_finiteness_from(model, sigma, everywhere, 0).finite()) break;
    Eigen::MatrixXd p = transition_matrix(model, sigma);
    Eigen::VectorXd c(n_states);
    for (Index x = 0; x < n_states; ++x) c[x] = cost[model.pair(x, phi[x])];
    Eigen::VectorXd exact =
        (Eigen::MatrixXd::Identity(n_states, n_states) - p).partialPivLu().solve(c);
    DeterministicStrategy improved = greedy(q_values(exact), &phi);
    if (improved == phi) break;
    phi = std::move(improved);
  }
  return phi;
}

Eigen::VectorXd caratheodory_reduce(const Eigen::MatrixXd& points, Eigen::VectorXd weights,
                                    double zero_tol) {
  const Index dim = points.rows();
  for (;;) {
    std::vector<Index> support;
    for (Index l = 0; l < weights.size(); ++l) {
      if (weights[l] <= zero_tol) weights[l] = 0.0;
      if (weights[l] > 0.0) support.push_back(l);
    }
    const Index k = static_cast<Index>(support.size());
    if (k <= dim + 1) return weights;

    // Affine dependence among the supported points: columns of [P; 1].
    Eigen::MatrixXd lifted(dim + 1, k);
    for (Index c = 0; c < k; ++c) {
      lifted.col(c).head(dim) = points.col(support[c]);
      lifted(dim, c) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lifted);
    Eigen::MatrixXd null = lu.kernel();
    Eigen::VectorXd beta = null.col(0);
    if (beta.maxCoeff() <= 0.0) beta = -beta;

    double step = std::numeric_limits<double>::infinity();
    Index hit = -1;
    for (Index c = 0; c < k; ++c)
      if (beta[c] > 0.0 && weights[support[c]] / beta[c] < step) {
        step = weights[support[c]] / beta[c];
        hit = c;
      }
    for (Index c = 0; c < k; ++c) weights[support[c]] -= step * beta[c];
    weights[support[hit]] = 0.0;
  }
}

namespace {

double halton(Index index, Index base) {
  double f = 1.0, r = 0.0;
  for (Index i = index; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

constexpr Index kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<Eigen::VectorXd> lagrangian_weight_grid(Index dimension, Index extra, Index offset) {
  std::vector<Eigen::VectorXd> grid;
  if (offset == 0 && dimension < 20) {
    for (Index mask = 0; mask < (Index{1} << dimension); ++mask) {
      Eigen::VectorXd w(dimension);
      for (Index j = 0; j < dimension; ++j) w[j] = (mask >> j) & 1 ? 1.0 : 0.0;
      grid.push_back(std::move(w));
    }
  }
  // Simplex points: normalised -log of Halton coordinates (uniform on the simplex).
  for (Index i = 1; i <= extra; ++i) {
    Eigen::VectorXd w(dimension);
    for (Index j = 0; j < dimension; ++j) {
      Index base = kPrimes[j % std::size(kPrimes)];
      double u = halton(i + offset, base);
      w[j] = -std::log(std::max(u, 1e-12));
    }
    grid.push_back(w / w.sum());
  }
  return grid;
}

namespace {

struct Candidate {
  DeterministicStrategy selector;
  ObjectiveVector objective;
};

constexpr Index kSupportSelectorCap = 4096;
constexpr double kSmallInstance = 4096;

void add_selector(const FiniteMdpModel& model, const DeterministicStrategy& phi,
                  std::map<DeterministicStrategy, std::optional<ObjectiveVector>>& seen,
                  const Tolerances& tol) {
  if (seen.count(phi)) return;
  auto res = occupation_of_stationary(model, as_stationary(model, phi), tol);
  if (res.finite())
    seen.emplace(phi, cost_vector(model, *res.measure));
  else
    seen.emplace(phi, std::nullopt);
}

std::vector<Candidate> finite_pool(
    const std::map<DeterministicStrategy, std::optional<ObjectiveVector>>& seen) {
  std::vector<Candidate> pool;
  for (const auto& [phi, obj] : seen)
    if (obj) pool.push_back({phi, *obj});
  return pool;
}

struct WeightSolve {
  bool feasible = false;
  Eigen::VectorXd weights;
  double objective = 0.0;
};

/// min sum a_l R_0(l)  s.t.  sum a_l R_j(l) <= target_j + slack (j = 0..J),
/// sum a_l R_0(l) >= target_0 - slack, sum a_l = 1, a >= 0, over the
/// candidates listed in `subset`.
WeightSolve solve_weights(const std::vector<Candidate>& pool, const std::vector<Index>& subset,
                          const ObjectiveVector& target, double slack, const Tolerances& tol) {
  const Index l = static_cast<Index>(subset.size());
  const Index dim = target.size();
  StandardFormLp lp;
  lp.objective.resize(l);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, l);
  lp.eq_rhs = Eigen::VectorXd::Ones(1);
  lp.ub_matrix.resize(dim + 1, l);
  lp.ub_rhs.resize(dim + 1);
  lp.ub_rhs.head(dim) = target.array() + slack;
  lp.ub_rhs[dim] = -(target[0] - slack);
  for (Index c = 0; c < l; ++c) {
    const auto& r = pool[subset[c]].objective;
    lp.objective[c] = r[0];
    lp.ub_matrix.col(c).head(dim) = r;
    lp.ub_matrix(dim, c) = -r[0];
  }
  SimplexOptions opt;
  opt.pivot_tolerance = tol.pivot;
  auto sol = simplex_solve(lp, opt);
  WeightSolve out;
  if (sol.status != LpStatus::Optimal) return out;
  out.feasible = true;
  out.weights = sol.values;
  double total = out.weights.sum();
  if (total > 0) out.weights /= total;
  out.objective = sol.objective;
  return out;
}

/// Exact targets first; the slack only absorbs rounding in the candidates.
WeightSolve solve_weights_staged(const std::vector<Candidate>& pool, const std::vector<Index>& subset,
                                 const ObjectiveVector& target, double slack, const Tolerances& tol) {
  auto exact = solve_weights(pool, subset, target, 0.0, tol);
  if (exact.feasible) return exact;
  return solve_weights(pool, subset, target, slack, tol);
}

DecompositionResult assemble(const std::vector<Candidate>& pool, const std::vector<Index>& subset,
                             const Eigen::VectorXd& weights, Index dim, double zero_tol) {
  DecompositionResult out;
  out.achieved = ObjectiveVector::Zero(dim);
  double total = 0.0;
  for (Index c = 0; c < static_cast<Index>(subset.size()); ++c)
    if (weights[c] > zero_tol) total += weights[c];
  for (Index c = 0; c < static_cast<Index>(subset.size()); ++c) {
    if (!(weights[c] > zero_tol)) continue;
    double w = weights[c] / total;
    const auto& cand = pool[subset[c]];
    out.mixture.components.push_back({w, cand.selector});
    out.component_objectives.push_back(cand.objective);
    out.achieved += w * cand.objective;
  }
  out.cardinality = static_cast<Index>(out.mixture.components.size());
  out.pool_size = static_cast<Index>(pool.size());
  return out;
}

}  // namespace

DecompositionResult decompose_to_mixture(const ConstrainedProblem& problem,
                                         const OccupationMeasure& mstar, const Tolerances& tol) {
  const auto& model = problem.model;
  const Index dim = model.num_costs();
  const Index max_card = problem.num_constraints() + 1;
  const ObjectiveVector target = cost_vector(model, mstar);
  const double zero_tol = 1e-12;

  // Extreme measures are generated by their argmax selector.
  if (is_extreme(model, mstar).extreme) {
    auto phi = argmax_selector(model, mstar);
    auto res = occupation_of_stationary(model, as_stationary(model, phi), tol);
    if (res.finite()) {
      ObjectiveVector r = cost_vector(model, *res.measure);
      if ((r - target).cwiseAbs().maxCoeff() <= tol.decomposition) {
        std::vector<Candidate> single{{phi, r}};
        auto out = assemble(single, {0}, Eigen::VectorXd::Ones(1), dim, zero_tol);
        return out;
      }
    }
  }

  std::map<DeterministicStrategy, std::optional<ObjectiveVector>> seen;

  // Selectors consistent with the support of Mstar.
  const Eigen::VectorXd mu = marginal(model, mstar);
  std::vector<std::vector<Index>> options(static_cast<std::size_t>(model.num_states()));
  double product = 1.0;
  for (Index x = 0; x < model.num_states(); ++x) {
    if (mu[x] > tol.support) {
      for (Index a = 0; a < model.num_actions(x); ++a)
        if (mstar.values[model.pair(x, a)] > 1e-9 * mu[x]) options[x].push_back(a);
    }
    if (options[x].empty()) options[x].push_back(0);
    product *= static_cast<double>(options[x].size());
  }
  {
    Index added = 0;
    for_each_product(options, [&](const DeterministicStrategy& phi) {
      add_selector(model, phi, seen, tol);
      return ++added < kSupportSelectorCap;
    });
  }

  auto add_lagrangian = [&](const std::vector<Eigen::VectorXd>& grid) {
    for (const auto& w : grid) {
      try {
        add_selector(model, solve_unconstrained(model, w, tol), seen, tol);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonConvergent) throw;
      }
    }
  };
  add_lagrangian(lagrangian_weight_grid(dim));
  if (selector_count(model) <= kSmallInstance)
    for_each_product(all_actions(model), [&](const DeterministicStrategy& phi) {
      add_selector(model, phi, seen, tol);
      return true;
    });

  const double slack = 0.1 * tol.decomposition;
  DecompositionResult best_fallback;
  bool have_fallback = false;

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) add_lagrangian(lagrangian_weight_grid(dim, 40, 1000));
    auto pool = finite_pool(seen);
    if (pool.empty())
      throw Error(ErrorCode::EmptyCandidatePool,
                  "no absorbing deterministic strategy found for the decomposition");

    std::vector<Index> all(pool.size());
    std::iota(all.begin(), all.end(), Index{0});
    auto full = solve_weights_staged(pool, all, target, slack, tol);
    if (!full.feasible) continue;

    // Caratheodory in objective space, then a search over (J+1)-subsets.
    Eigen::MatrixXd points(dim, static_cast<Index>(pool.size()));
    for (Index c = 0; c < points.cols(); ++c) points.col(c) = pool[c].objective;
    Eigen::VectorXd weights = caratheodory_reduce(points, full.weights, zero_tol);
    std::vector<Index> support;
    for (Index c = 0; c < weights.size(); ++c)
      if (weights[c] > zero_tol) support.push_back(c);

    if (static_cast<Index>(support.size()) <= max_card) {
      Eigen::VectorXd w(static_cast<Index>(support.size()));
      for (Index c = 0; c < w.size(); ++c) w[c] = weights[support[c]];
      return assemble(pool, support, w, dim, zero_tol);
    }

    // Drop one point at a time and re-solve the weight LP on the rest.
    for (std::size_t drop = 0; drop < support.size(); ++drop) {
      std::vector<Index> subset;
      for (std::size_t c = 0; c < support.size(); ++c)
        if (c != drop) subset.push_back(support[c]);
      auto sub = solve_weights_staged(pool, subset, target, slack, tol);
      if (sub.feasible && sub.objective <= full.objective + tol.decomposition) {
        auto out = assemble(pool, subset, sub.weights, dim, zero_tol);
        if (out.cardinality <= max_card) return out;
      }
    }
    Eigen::VectorXd w(static_cast<Index>(support.size()));
    for (Index c = 0; c < w.size(); ++c) w[c] = weights[support[c]];
    best_fallback = assemble(pool, support, w, dim, zero_tol);
    best_fallback.fallback = true;
    have_fallback = true;
  }
  if (have_fallback) return best_fallback;
  throw Error(ErrorCode::EmptyCandidatePool,
              "candidate pool cannot reproduce the objective vector of the given measure");
}

namespace {

OccupationMeasure clean_lp_values(const Eigen::VectorXd& values) {
  OccupationMeasure m{values};
  for (Index k = 0; k < m.values.size(); ++k)
    if (m.values[k] < 1e-11) m.values[k] = 0.0;
  return m;
}

}  // namespace

ConstrainedSolution solve_constrained(const ConstrainedProblem& problem,
                                      const SolveOptions& options) {
  const auto& model = problem.model;
  const auto& tol = options.tol;
  if (options.check_assumption) {
    auto check = check_penalization_assumption(model);
    if (!check.holds)
      throw AssumptionViolatedError(check.witness,
                                    "a reachable end component has zero cost in every criterion");
  }

  auto lp = build_occupation_lp(problem);
  SimplexOptions opt;
  opt.pivot_tolerance = tol.pivot;
  auto sol = simplex_solve(lp, opt);
  if (sol.status == LpStatus::Infeasible)
    throw Error(ErrorCode::InfeasibleProblem, "no strategy satisfies the constraints");
  if (sol.status == LpStatus::Unbounded)
    throw Error(ErrorCode::UnboundedObjective, "occupation LP reported an unbounded objective");

  ConstrainedSolution out;
  out.lp_iterations = sol.iterations;
  OccupationMeasure raw = clean_lp_values(sol.values);
  try {
    out.occupation = minimality_repair(model, raw, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RepairFailed || options.check_assumption) throw;
    out.occupation = raw;
  }
  out.objective = cost_vector(model, out.occupation);
  out.decomposition = decompose_to_mixture(problem, out.occupation, tol);
  return out;
}

ConstrainedSolution find_feasible(const ConstrainedProblem& problem, const SolveOptions& options) {
  const auto& model = problem.model;
  const Index j_count = problem.num_constraints();
  if (j_count < 1)
    throw Error(ErrorCode::InvalidArgument, "feasibility mode needs at least one constraint");

  std::vector<std::string> names(model.cost_names().begin() + 1, model.cost_names().end());
  auto reduced = make_problem(model.with_costs(model.costs().bottomRows(j_count), names),
                              problem.bounds.tail(j_count - 1));
  ConstrainedSolution out = solve_constrained(reduced, options);
  if (out.objective[0] > problem.bounds[0] + options.tol.decomposition)
    throw Error(ErrorCode::InfeasibleProblem, "minimal value of the first constraint exceeds its bound");

  out.objective = cost_vector(model, out.occupation);
  auto& dec = out.decomposition;
  dec.achieved = ObjectiveVector::Zero(model.num_costs());
  dec.component_objectives.clear();
  for (const auto& c : dec.mixture.components) {
    auto res = occupation_of_stationary(model, as_stationary(model, c.selector), options.tol);
    ObjectiveVector r = cost_vector(model, res.value());
    dec.component_objectives.push_back(r);
    dec.achieved += c.weight * r;
  }
  return out;
}

}  // namespace cmdp

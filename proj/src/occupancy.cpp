#include "cmdp/occupancy.hpp"

#include "cmdp/error.hpp"
#include "support_graph.hpp"

#include <algorithm>
#include <cmath>

namespace cmdp {

namespace {

std::vector<Index> reachable_indices(const std::vector<bool>& mask) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(static_cast<Index>(i));
  return idx;
}

/// Bottom strongly connected component of the closed set `bad`, choosing the
/// one that contains the lowest state index.
std::vector<Index> bottom_class(const detail::SupportGraph& g, const std::vector<bool>& bad) {
  Index count = 0;
  auto comp = detail::strongly_connected_components(g.successors, bad, &count);
  std::vector<bool> has_exit(static_cast<std::size_t>(count), false);
  for (Index x = 0; x < g.size(); ++x) {
    if (!bad[x]) continue;
    for (Index y : g.successors[x])
      if (comp[y] != comp[x]) has_exit[comp[x]] = true;
  }
  for (Index x = 0; x < g.size(); ++x) {
    if (!bad[x] || has_exit[comp[x]]) continue;
    std::vector<Index> cls;
    for (Index y = 0; y < g.size(); ++y)
      if (comp[y] == comp[x]) cls.push_back(y);
    return cls;
  }
  return {};
}

Eigen::VectorXd point_mass(Index n, Index x) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[x] = 1.0;
  return v;
}

/// Solves (I - A) z = b with partial-pivoting LU; throws on a tiny pivot.
Eigen::VectorXd solve_identity_minus(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     const Tolerances& tol) {
  const Index n = a.rows();
  if (n == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - a;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > tol.singular))
    throw Error(ErrorCode::SingularSystem,
                "absorbing-chain system is singular although the support graph is absorbing");
  return lu.solve(b);
}

}  // namespace

Eigen::MatrixXd transition_matrix(const FiniteMdpModel& model, const StationaryStrategy& sigma) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(model.num_states(), model.num_states());
  for (Index k = 0; k < model.num_pairs(); ++k)
    if (sigma.probs[k] != 0.0) p.row(model.state_of(k)) += sigma.probs[k] * model.kernel().row(k);
  return p;
}

const OccupationMeasure& OccupationResult::value() const {
  if (!measure) throw Error(ErrorCode::InfiniteOccupation, "strategy has infinite occupation");
  return *measure;
}

FinitenessReport classify_finiteness_from(const FiniteMdpModel& model,
                                          const StationaryStrategy& sigma,
                                          const Eigen::VectorXd& initial, Index horizon) {
  const Index n = model.num_states();
  auto g = detail::support_graph(model, sigma.probs);
  std::vector<bool> seeds(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) seeds[x] = initial[x] > 0.0;

  FinitenessReport report;
  report.reachable = detail::forward_reachable(g, seeds);
  auto can_leak = detail::backward_reachable(g, g.leaks);

  std::vector<bool> bad(static_cast<std::size_t>(n), false);
  bool any_bad = false;
  for (Index x = 0; x < n; ++x) {
    bad[x] = report.reachable[x] && !can_leak[x];
    any_bad = any_bad || bad[x];
  }
  if (any_bad) {
    report.verdict = Finiteness::Infinite;
    report.witness = bottom_class(g, bad);
    return report;
  }

  report.verdict = Finiteness::Finite;
  Eigen::MatrixXd pt = transition_matrix(model, sigma).transpose();
  report.survival.resize(horizon + 1);
  Eigen::VectorXd nu = initial;
  for (Index t = 0; t <= horizon; ++t) {
    report.survival[t] = nu.sum();
    nu = pt * nu;
  }
  return report;
}

FinitenessReport classify_finiteness(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                                     Index horizon) {
  return classify_finiteness_from(model, sigma, point_mass(model.num_states(), model.initial()),
                                  horizon);
}

OccupationResult occupation_from_distribution(const FiniteMdpModel& model,
                                              const StationaryStrategy& sigma,
                                              const Eigen::VectorXd& initial,
                                              const Tolerances& tol) {
  OccupationResult out;
  out.finiteness = classify_finiteness_from(model, sigma, initial);
  if (!out.finiteness.finite()) return out;

  const auto idx = reachable_indices(out.finiteness.reachable);
  const Index r = static_cast<Index>(idx.size());
  const Eigen::MatrixXd p = transition_matrix(model, sigma);
  Eigen::MatrixXd pr(r, r);
  Eigen::VectorXd nu(r);
  for (Index i = 0; i < r; ++i) {
    nu[i] = initial[idx[i]];
    for (Index j = 0; j < r; ++j) pr(i, j) = p(idx[i], idx[j]);
  }
  Eigen::VectorXd mu_r = solve_identity_minus(pr.transpose(), nu, tol);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(model.num_states());
  for (Index i = 0; i < r; ++i) mu[idx[i]] = std::max(0.0, mu_r[i]);

  OccupationMeasure m{Eigen::VectorXd(model.num_pairs())};
  for (Index k = 0; k < model.num_pairs(); ++k) m.values[k] = sigma.probs[k] * mu[model.state_of(k)];
  out.measure = std::move(m);
  return out;
}

OccupationResult occupation_of_stationary(const FiniteMdpModel& model,
                                          const StationaryStrategy& sigma, const Tolerances& tol) {
  return occupation_from_distribution(model, sigma, point_mass(model.num_states(), model.initial()),
                                      tol);
}

double flow_residual(const FiniteMdpModel& model, const OccupationMeasure& m) {
  Eigen::VectorXd r = marginal(model, m) - model.kernel().transpose() * m.values;
  r[model.initial()] -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

StationaryStrategy induced_strategy(const FiniteMdpModel& model, const OccupationMeasure& m,
                                    const DeterministicStrategy& fallback, const Tolerances& tol) {
  const Eigen::VectorXd mu = marginal(model, m);
  StationaryStrategy s{Eigen::VectorXd::Zero(model.num_pairs())};
  for (Index x = 0; x < model.num_states(); ++x) {
    if (mu[x] > tol.support) {
      for (Index k = model.pair_begin(x); k < model.pair_end(x); ++k)
        s.probs[k] = std::max(0.0, m.values[k]) / mu[x];
      // renormalise away the round-off of the division
      double row = s.probs.segment(model.pair_begin(x), model.num_actions(x)).sum();
      s.probs.segment(model.pair_begin(x), model.num_actions(x)) /= row;
    } else {
      s.probs[model.pair(x, fallback[x])] = 1.0;
    }
  }
  return s;
}

OccupationMeasure minimality_repair(const FiniteMdpModel& model, const OccupationMeasure& m,
                                    const Tolerances& tol) {
  auto sigma = induced_strategy(model, m, lowest_index_selector(model), tol);
  auto res = occupation_of_stationary(model, sigma, tol);
  if (!res.finite())
    throw Error(ErrorCode::RepairFailed,
                "strategy induced by the flow solution is not absorbing; the table is not "
                "flow-feasible or carries excess on a reachable class");
  return *res.measure;
}

ValueFunction evaluate_value(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                             const Eigen::VectorXd& f, const Tolerances& tol) {
  if (f.size() != model.num_states())
    throw Error(ErrorCode::ShapeMismatch, "value integrand must have one entry per state");
  auto report = classify_finiteness(model, sigma, 0);
  if (!report.finite())
    throw Error(ErrorCode::InfiniteOccupation, "strategy is not absorbing from the initial state");

  const auto idx = reachable_indices(report.reachable);
  const Index r = static_cast<Index>(idx.size());
  const Eigen::MatrixXd p = transition_matrix(model, sigma);
  Eigen::MatrixXd pr(r, r);
  Eigen::VectorXd fr(r);
  for (Index i = 0; i < r; ++i) {
    fr[i] = f[idx[i]];
    for (Index j = 0; j < r; ++j) pr(i, j) = p(idx[i], idx[j]);
  }
  Eigen::VectorXd vr = solve_identity_minus(pr, fr, tol);

  ValueFunction v{Eigen::VectorXd::Zero(model.num_states()), report.reachable};
  for (Index i = 0; i < r; ++i) v.values[idx[i]] = vr[i];
  return v;
}

double value_equation_residual(const FiniteMdpModel& model, const StationaryStrategy& sigma,
                               const Eigen::VectorXd& f, const Eigen::VectorXd& v,
                               const std::vector<bool>& defined) {
  Eigen::VectorXd r = v - f - transition_matrix(model, sigma) * v;
  double worst = 0.0;
  for (Index x = 0; x < model.num_states(); ++x)
    if (defined[x]) worst = std::max(worst, std::abs(r[x]));
  return worst;
}

namespace {

/// One forward step: pair marginal at this step and the next state distribution.
void advance(const FiniteMdpModel& model, const StationaryStrategy& sigma, Eigen::VectorXd& nu,
             Eigen::VectorXd& pair_marginal) {
  pair_marginal.resize(model.num_pairs());
  for (Index k = 0; k < model.num_pairs(); ++k)
    pair_marginal[k] = nu[model.state_of(k)] * sigma.probs[k];
  nu = model.kernel().transpose() * pair_marginal;
}

/// State distributions w_{l,n} for n = 1..steps+1 of each mixture component.
std::vector<std::vector<Eigen::VectorXd>> component_distributions(const FiniteMdpModel& model,
                                                                  const MixedStrategy& mix,
                                                                  Index steps) {
  std::vector<std::vector<Eigen::VectorXd>> w;
  for (const auto& c : mix.components) {
    auto sigma = as_stationary(model, c.selector);
    Eigen::MatrixXd pt = transition_matrix(model, sigma).transpose();
    std::vector<Eigen::VectorXd> dist;
    dist.push_back(point_mass(model.num_states(), model.initial()));
    for (Index n = 1; n <= steps; ++n) dist.push_back(pt * dist.back());
    w.push_back(std::move(dist));
  }
  return w;
}

}  // namespace

OccupationResult occupation_of_markov(const FiniteMdpModel& model, const MarkovStrategy& sigma,
                                      const Tolerances& tol) {
  Eigen::VectorXd nu = point_mass(model.num_states(), model.initial());
  Eigen::VectorXd head = Eigen::VectorXd::Zero(model.num_pairs());
  Eigen::VectorXd step;
  for (const auto& kernel : sigma.head) {
    advance(model, kernel, nu, step);
    head += step;
  }
  OccupationResult tail = occupation_from_distribution(model, sigma.tail, nu, tol);
  if (!tail.finite()) return tail;
  if (sigma.head.empty()) return tail;
  tail.measure->values += head;
  return tail;
}

std::vector<Eigen::VectorXd> step_marginals(const FiniteMdpModel& model,
                                            const MarkovStrategy& sigma, Index steps) {
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd nu = point_mass(model.num_states(), model.initial());
  for (Index n = 1; n <= steps; ++n) {
    Eigen::VectorXd step;
    advance(model, sigma.at_step(static_cast<std::size_t>(n)), nu, step);
    out.push_back(std::move(step));
  }
  return out;
}

std::vector<Eigen::VectorXd> step_marginals(const FiniteMdpModel& model, const MixedStrategy& mix,
                                            Index steps) {
  auto w = component_distributions(model, mix, steps);
  std::vector<Eigen::VectorXd> out;
  for (Index n = 1; n <= steps; ++n) {
    Eigen::VectorXd step = Eigen::VectorXd::Zero(model.num_pairs());
    for (std::size_t l = 0; l < mix.components.size(); ++l) {
      const auto& c = mix.components[l];
      for (Index x = 0; x < model.num_states(); ++x)
        step[model.pair(x, c.selector[x])] += c.weight * w[l][n - 1][x];
    }
    out.push_back(std::move(step));
  }
  return out;
}

MarkovStrategy markovize_mixture(const FiniteMdpModel& model, const MixedStrategy& mix,
                                 Index horizon, const Tolerances& tol) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "markovization horizon must be >= 1");
  validate_strategy(model, mix);
  auto w = component_distributions(model, mix, horizon);

  auto kernel_from = [&](const std::vector<Eigen::VectorXd>& state_weight) {
    // state_weight[l](x): mass that component l puts on x
    StationaryStrategy s{Eigen::VectorXd::Zero(model.num_pairs())};
    for (Index x = 0; x < model.num_states(); ++x) {
      double denom = 0.0;
      for (std::size_t l = 0; l < mix.components.size(); ++l) {
        double mass = mix.components[l].weight * state_weight[l][x];
        s.probs[model.pair(x, mix.components[l].selector[x])] += mass;
        denom += mass;
      }
      auto row = s.probs.segment(model.pair_begin(x), model.num_actions(x));
      if (denom > 0.0) {
        row /= denom;
      } else {
        // Unreached at this step: fall back to the prior weights.
        for (const auto& c : mix.components) s.probs[model.pair(x, c.selector[x])] += c.weight;
      }
    }
    return s;
  };

  MarkovStrategy out;
  for (Index n = 1; n <= horizon; ++n) {
    std::vector<Eigen::VectorXd> at_n;
    for (const auto& dist : w) at_n.push_back(dist[n - 1]);
    out.head.push_back(kernel_from(at_n));
  }

  // Remaining occupation of each component after the horizon.
  std::vector<Eigen::VectorXd> remaining;
  for (std::size_t l = 0; l < mix.components.size(); ++l) {
    auto res = occupation_from_distribution(model, as_stationary(model, mix.components[l].selector),
                                            w[l][horizon], tol);
    if (!res.finite())
      throw Error(ErrorCode::InfiniteOccupation, "mixture component is not absorbing");
    remaining.push_back(marginal(model, *res.measure));
  }
  out.tail = kernel_from(remaining);
  return out;
}

OccupationMeasure mixture_occupation(const FiniteMdpModel& model, const MixedStrategy& mix,
                                     const Tolerances& tol) {
  OccupationMeasure total{Eigen::VectorXd::Zero(model.num_pairs())};
  for (const auto& c : mix.components) {
    auto res = occupation_of_stationary(model, as_stationary(model, c.selector), tol);
    total.values += c.weight * res.value().values;
  }
  return total;
}

}  // namespace cmdp

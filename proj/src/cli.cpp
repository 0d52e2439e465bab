#include "cmdp/cli.hpp"

#include "cmdp/io.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/mixture.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/sim.hpp"
#include "json_docs.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

namespace cmdp {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::RowSumExceedsOne:
    case ErrorCode::NegativeProbability:
    case ErrorCode::NegativeCost:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::UnknownStateReference:
    case ErrorCode::UnknownActionReference:
    case ErrorCode::EmptyActionSet:
    case ErrorCode::DuplicateName:
    case ErrorCode::ActionNameClash:
    case ErrorCode::InvalidStrategy:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::TooManySelectors:
      return kExitValidation;
    case ErrorCode::InfeasibleProblem:
      return kExitInfeasible;
    case ErrorCode::AssumptionViolated:
      return kExitAssumption;
    case ErrorCode::InfiniteOccupation:
    case ErrorCode::UnboundedPolytope:
    case ErrorCode::EmptyCandidatePool:
    case ErrorCode::SingularSystem:
    case ErrorCode::RepairFailed:
    case ErrorCode::IterationLimit:
    case ErrorCode::UnboundedObjective:
    case ErrorCode::NonConvergent:
      return kExitNumerical;
  }
  return kExitNumerical;
}

namespace {

using io::detail::Json;

struct Args {
  std::string model;
  std::string occupation;
  std::string strategy;
  std::string compare;
  std::string dump_lp;
  std::string occupation_out;
  std::string mixture_out;
  double tol_factor = 1.0;
  bool skip_assumption = false;
  bool canonical = false;
  SimulationOptions sim;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, path + ": cannot write file");
  f << text;
}

Tolerances tolerances(const Args& a) {
  if (!(a.tol_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tol must be positive");
  return Tolerances{}.scaled(a.tol_factor);
}

Json solution_json(const ConstrainedProblem& problem, const ConstrainedSolution& sol, const char* status) {
  Json doc;
  doc["status"] = status;
  Json obj = io::detail::objective_json(problem, sol.objective);
  doc["objective"] = obj["objective"];
  doc["constraints"] = obj["constraints"];
  doc["lp_iterations"] = sol.lp_iterations;
  doc["occupation"] = io::detail::occupation_json(problem.model, sol.occupation);
  doc["mixture"] = io::detail::decomposition_json(problem, sol.decomposition);
  return doc;
}

void emit_solution(const ConstrainedProblem& problem, const ConstrainedSolution& sol, const char* status,
                   const Args& a, std::ostream& out) {
  if (!a.occupation_out.empty())
    write_text(a.occupation_out, io::serialize_occupation(problem.model, sol.occupation));
  if (!a.mixture_out.empty())
    write_text(a.mixture_out, io::serialize_decomposition(problem, sol.decomposition));
  out << io::detail::dump(solution_json(problem, sol, status));
}

int cmd_validate(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  if (a.canonical) {
    out << io::serialize_problem(problem);
    return kExitOk;
  }
  Json doc;
  doc["status"] = "valid";
  doc["states"] = problem.model.num_states();
  doc["pairs"] = problem.model.num_pairs();
  doc["constraints"] = problem.num_constraints();
  out << io::detail::dump(doc);
  return kExitOk;
}

int cmd_solve(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  if (!a.dump_lp.empty()) {
    std::ofstream f(a.dump_lp, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, a.dump_lp + ": cannot write file");
    write_mps(f, build_occupation_lp(problem));
  }
  SolveOptions opt;
  opt.check_assumption = !a.skip_assumption;
  opt.tol = tolerances(a);
  emit_solution(problem, solve_constrained(problem, opt), "optimal", a, out);
  return kExitOk;
}

int cmd_find_feasible(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  SolveOptions opt;
  opt.check_assumption = !a.skip_assumption;
  opt.tol = tolerances(a);
  emit_solution(problem, find_feasible(problem, opt), "feasible", a, out);
  return kExitOk;
}

int cmd_decompose(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  const Tolerances tol = tolerances(a);
  OccupationMeasure m = io::parse_occupation(problem.model, io::read_file(a.occupation), a.occupation);
  OccupationMeasure repaired = minimality_repair(problem.model, m, tol);
  DecompositionResult dec = decompose_to_mixture(problem, repaired, tol);
  Json doc;
  doc["status"] = "decomposed";
  Json obj = io::detail::objective_json(problem, cost_vector(problem.model, repaired));
  doc["objective"] = obj["objective"];
  doc["constraints"] = obj["constraints"];
  doc["occupation"] = io::detail::occupation_json(problem.model, repaired);
  doc["mixture"] = io::detail::decomposition_json(problem, dec);
  out << io::detail::dump(doc);
  return kExitOk;
}

int cmd_check_extreme(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  const Tolerances tol = tolerances(a);
  OccupationMeasure m = io::parse_occupation(problem.model, io::read_file(a.occupation), a.occupation);
  ExtremalityVerdict v = is_extreme(problem.model, m, 1e-9 * a.tol_factor);
  Json doc;
  doc["extreme"] = v.extreme;
  if (v.witness) {
    doc["witness"] = problem.model.state_name(*v.witness);
  } else {
    doc["selector"] = io::detail::selector_policy_json(problem.model, argmax_selector(problem.model, m, 1e-9 * a.tol_factor));
  }
  doc["flow_residual"] = io::tidy(flow_residual(problem.model, m));
  doc["flow_feasible"] = flow_residual(problem.model, m) <= tol.flow;
  out << io::detail::dump(doc);
  return kExitOk;
}

int cmd_check_assumption(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  AssumptionCheck check = check_penalization_assumption(problem);
  Json doc;
  doc["holds"] = check.holds;
  if (!check.holds) doc["witness"] = io::detail::pairs_json(problem.model, check.witness);
  out << io::detail::dump(doc);
  return check.holds ? kExitOk : kExitAssumption;
}

int cmd_evaluate(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  const auto& model = problem.model;
  const Tolerances tol = tolerances(a);
  SimStrategy strategy = io::parse_strategy(model, io::read_file(a.strategy), a.strategy);

  OccupationResult result;
  if (auto* phi = std::get_if<DeterministicStrategy>(&strategy)) {
    result = occupation_of_stationary(model, as_stationary(model, *phi), tol);
  } else if (auto* s = std::get_if<StationaryStrategy>(&strategy)) {
    result = occupation_of_stationary(model, *s, tol);
  } else if (auto* m = std::get_if<MarkovStrategy>(&strategy)) {
    result = occupation_of_markov(model, *m, tol);
  } else {
    const auto& mix = std::get<MixedStrategy>(strategy);
    OccupationMeasure total{Eigen::VectorXd::Zero(model.num_pairs())};
    for (const auto& c : mix.components) {
      if (c.weight == 0.0) continue;
      OccupationResult part = occupation_of_stationary(model, as_stationary(model, c.selector), tol);
      if (!part.finite()) {
        result = std::move(part);
        break;
      }
      total.values += c.weight * part.measure->values;
    }
    if (result.finiteness.finite()) result.measure = std::move(total);
  }

  Json doc;
  doc["finiteness"] = io::detail::finiteness_json(model, result.finiteness);
  if (result.finite()) {
    Json obj = io::detail::objective_json(problem, cost_vector(model, *result.measure));
    doc["objective"] = obj["objective"];
    doc["constraints"] = obj["constraints"];
    doc["occupation"] = io::detail::occupation_json(model, *result.measure);
  }
  out << io::detail::dump(doc);
  return kExitOk;
}

int cmd_simulate(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  const auto& model = problem.model;
  const Tolerances tol = tolerances(a);
  if (a.sim.trajectories <= 0) throw Error(ErrorCode::InvalidArgument, "--n must be positive");
  if (a.sim.step_cap <= 0) throw Error(ErrorCode::InvalidArgument, "--step-cap must be positive");
  if (a.sim.threads == 0) throw Error(ErrorCode::InvalidArgument, "--threads must be positive");

  std::optional<OccupationMeasure> reference;
  if (!a.compare.empty())
    reference = io::parse_occupation(model, io::read_file(a.compare), a.compare);

  SimStrategy strategy;
  if (!a.strategy.empty()) {
    strategy = io::parse_strategy(model, io::read_file(a.strategy), a.strategy);
  } else if (reference) {
    strategy = induced_strategy(model, *reference, lowest_index_selector(model), tol);
  } else {
    SolveOptions opt;
    opt.check_assumption = !a.skip_assumption;
    opt.tol = tol;
    strategy = solve_constrained(problem, opt).decomposition.mixture;
  }

  SimulationReport report = simulate(model, strategy, a.sim);
  Json doc = io::detail::simulation_json(model, report);
  if (reference) {
    double z = compare_empirical(report, *reference);
    doc["comparison"] = Json{{"max_abs_z", io::tidy(z)}};
  }
  out << io::detail::dump(doc);
  return kExitOk;
}

int cmd_enumerate(const Args& a, std::ostream& out) {
  ConstrainedProblem problem = io::parse_model(a.model);
  const auto& model = problem.model;
  Json selectors = Json::array();
  for_each_deterministic(
      model,
      [&](const SelectorEvaluation& e) {
        Json s;
        s["policy"] = io::detail::selector_policy_json(model, e.selector);
        s["finiteness"] = io::detail::finiteness_json(model, e.finiteness);
        if (e.objective) {
          Json obj = Json::array();
          for (Index j = 0; j < e.objective->size(); ++j) obj.push_back(io::tidy((*e.objective)[j]));
          s["objective"] = obj;
        }
        selectors.push_back(std::move(s));
      },
      tolerances(a));
  Json doc;
  doc["count"] = selectors.size();
  doc["selectors"] = std::move(selectors);
  out << io::detail::dump(doc);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained total-cost MDP solver", "cmdp"};
  app.require_subcommand(1);
  Args a;
  std::function<int(const Args&, std::ostream&)> action;

  auto add = [&](const char* name, const char* help, auto fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("model", a.model, "Model file")->required();
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };
  auto add_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", a.tol_factor, "Scale every internal tolerance by this factor");
  };
  auto add_outputs = [&](CLI::App* sub) {
    sub->add_option("--occupation-out", a.occupation_out, "Also write the occupation measure here");
    sub->add_option("--mixture-out", a.mixture_out, "Also write the mixture here");
  };

  auto* validate = add("validate", "Check a model file", cmd_validate);
  validate->add_flag("--canonical", a.canonical, "Print the model in canonical form");

  auto* solve = add("solve", "Solve the constrained problem", cmd_solve);
  solve->add_flag("--skip-assumption-check", a.skip_assumption, "Use the LP solution without the assumption gate");
  solve->add_option("--dump-lp", a.dump_lp, "Write the occupation LP in MPS layout");
  add_tol(solve);
  add_outputs(solve);

  auto* feasible = add("find-feasible", "Minimise the first constraint cost and test its bound", cmd_find_feasible);
  feasible->add_flag("--skip-assumption-check", a.skip_assumption, "Use the LP solution without the assumption gate");
  add_tol(feasible);
  add_outputs(feasible);

  auto* decompose = add("decompose", "Repair an occupation measure and write it as a mixture", cmd_decompose);
  decompose->add_option("occupation", a.occupation, "Occupation file")->required();
  add_tol(decompose);

  auto* extreme = add("check-extreme", "Test whether an occupation measure is deterministic", cmd_check_extreme);
  extreme->add_option("occupation", a.occupation, "Occupation file")->required();
  add_tol(extreme);

  add("check-assumption", "Look for a reachable zero-cost end component", cmd_check_assumption);

  auto* evaluate = add("evaluate", "Occupation measure and costs of a strategy", cmd_evaluate);
  evaluate->add_option("strategy", a.strategy, "Strategy file")->required();
  add_tol(evaluate);

  auto* sim = add("simulate", "Monte Carlo estimates of a strategy", cmd_simulate);
  sim->add_option("--n", a.sim.trajectories, "Number of trajectories");
  sim->add_option("--seed", a.sim.seed, "Base seed");
  sim->add_option("--step-cap", a.sim.step_cap, "Steps after which a trajectory is cut");
  sim->add_option("--threads", a.sim.threads, "Worker threads");
  sim->add_option("--strategy", a.strategy, "Strategy file (default: the optimal mixture)");
  sim->add_option("--compare", a.compare, "Occupation file to compare against");
  sim->add_flag("--skip-assumption-check", a.skip_assumption, "Use the LP solution without the assumption gate");
  add_tol(sim);

  auto* enumerate = add("enumerate", "List every deterministic strategy", cmd_enumerate);
  add_tol(enumerate);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    return action(a, out);
  } catch (const AssumptionViolatedError& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    if (!a.model.empty()) {
      ConstrainedProblem problem = io::parse_model(a.model);
      err << "witness: " << io::detail::pairs_json(problem.model, e.witness()).dump() << '\n';
    }
    return kExitAssumption;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace cmdp

#include "json_docs.hpp"

#include "cmdp/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cmdp::io {

using detail::Json;

double tidy(double v) {
  if (!std::isfinite(v)) return v;
  if (std::abs(v) < 1e-14) return 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

[[noreturn]] void parse_fail(const std::string& source, const std::string& key,
                             const std::string& msg) {
  throw Error(ErrorCode::ParseError, source + ": " + key + ": " + msg);
}

const Json& require(const Json& obj, const char* key, const std::string& source,
                    const std::string& path) {
  if (!obj.is_object()) parse_fail(source, path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(source, path.empty() ? key : path + "." + key, "missing key");
  return *it;
}

void allow_only(const Json& obj, std::initializer_list<const char*> keys, const std::string& source,
                const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) parse_fail(source, path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

std::string as_string(const Json& j, const std::string& source, const std::string& path) {
  if (!j.is_string()) parse_fail(source, path, "expected a string");
  return j.get<std::string>();
}

double as_number(const Json& j, const std::string& source, const std::string& path) {
  if (!j.is_number()) parse_fail(source, path, "expected a number");
  return j.get<double>();
}

std::vector<std::string> as_string_list(const Json& j, const std::string& source,
                                        const std::string& path) {
  if (!j.is_array()) parse_fail(source, path, "expected a list");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_string(j[i], source, path + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<std::string, std::string> split_pair_key(const std::string& key, const std::string& source,
                                                   const std::string& path) {
  auto slash = key.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == key.size())
    parse_fail(source, path, "expected a \"state/action\" key, got '" + key + "'");
  return {key.substr(0, slash), key.substr(slash + 1)};
}

Index state_index(const FiniteMdpModel& model, const std::string& name, const std::string& source,
                  const std::string& path) {
  Index x = model.find_state(name);
  if (x < 0) throw Error(ErrorCode::UnknownStateReference, source + ": " + path + ": unknown state '" + name + "'");
  return x;
}

Index action_index(const FiniteMdpModel& model, Index x, const std::string& name,
                   const std::string& source, const std::string& path) {
  Index a = model.find_action(x, name);
  if (a < 0)
    throw Error(ErrorCode::UnknownActionReference, source + ": " + path + ": state '" +
                                                       model.state_name(x) + "' has no action '" + name + "'");
  return a;
}

}  // namespace

namespace detail {

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json problem_json(const ConstrainedProblem& problem) {
  const auto& model = problem.model;
  Json doc;
  doc["states"] = model.state_names();

  bool shared = true;
  for (Index x = 1; x < model.num_states(); ++x)
    shared = shared && model.action_names(x) == model.action_names(0);
  if (shared) {
    doc["actions"] = model.action_names(0);
  } else {
    Json per_state = Json::object();
    for (Index x = 0; x < model.num_states(); ++x) per_state[model.state_name(x)] = model.action_names(x);
    doc["actions"] = per_state;
  }
  doc["initial"] = model.state_name(model.initial());

  Json transitions = Json::array();
  for (Index k = 0; k < model.num_pairs(); ++k) {
    Index x = model.state_of(k);
    Json to = Json::object();
    for (Index y = 0; y < model.num_states(); ++y)
      if (model.p(k, y) != 0.0) to[model.state_name(y)] = model.p(k, y);
    transitions.push_back(Json{{"from", model.state_name(x)},
                               {"action", model.action_name(x, model.action_of(k))},
                               {"to", to}});
  }
  doc["transitions"] = transitions;

  Json costs = Json::array();
  std::map<std::string, Index> emitted;
  for (Index j = 0; j < model.num_costs(); ++j) {
    const auto& name = model.cost_name(j);
    auto it = emitted.find(name);
    if (it != emitted.end()) {
      if (model.costs().row(it->second) != model.costs().row(j))
        throw Error(ErrorCode::DuplicateName, "two different cost tables are named '" + name + "'");
      continue;
    }
    emitted.emplace(name, j);
    Json entries = Json::object();
    for (Index k = 0; k < model.num_pairs(); ++k) {
      if (model.cost(j, k) == 0.0) continue;
      Index x = model.state_of(k);
      entries[model.state_name(x) + "/" + model.action_name(x, model.action_of(k))] = model.cost(j, k);
    }
    costs.push_back(Json{{"name", name}, {"entries", entries}});
  }
  doc["costs"] = costs;

  Json constraints = Json::array();
  for (Index j = 1; j < model.num_costs(); ++j)
    constraints.push_back(Json{{"cost", model.cost_name(j)}, {"bound", problem.bounds[j - 1]}});
  doc["constraints"] = constraints;
  doc["objective"] = model.cost_name(0);
  return doc;
}

Json occupation_json(const FiniteMdpModel& model, const OccupationMeasure& m) {
  Json doc;
  doc["kind"] = "occupation";
  Json entries = Json::array();
  for (Index k = 0; k < model.num_pairs(); ++k) {
    Index x = model.state_of(k);
    entries.push_back(Json{{"state", model.state_name(x)},
                           {"action", model.action_name(x, model.action_of(k))},
                           {"value", tidy(m.values[k])}});
  }
  doc["entries"] = entries;
  Json mu = Json::object();
  Eigen::VectorXd marg = marginal(model, m);
  for (Index x = 0; x < model.num_states(); ++x) mu[model.state_name(x)] = tidy(marg[x]);
  doc["marginal"] = mu;
  doc["flow_residual"] = tidy(flow_residual(model, m));
  return doc;
}

Json selector_policy_json(const FiniteMdpModel& model, const DeterministicStrategy& phi) {
  Json policy = Json::object();
  for (Index x = 0; x < model.num_states(); ++x) policy[model.state_name(x)] = model.action_name(x, phi[x]);
  return policy;
}

namespace {

Json kernel_policy_json(const FiniteMdpModel& model, const StationaryStrategy& s) {
  Json policy = Json::object();
  for (Index x = 0; x < model.num_states(); ++x) {
    Json row = Json::object();
    for (Index a = 0; a < model.num_actions(x); ++a) {
      double p = s.probs[model.pair(x, a)];
      if (p != 0.0) row[model.action_name(x, a)] = tidy(p);
    }
    policy[model.state_name(x)] = row;
  }
  return policy;
}

}  // namespace

Json strategy_json(const FiniteMdpModel& model, const SimStrategy& strategy) {
  Json doc;
  if (auto* phi = std::get_if<DeterministicStrategy>(&strategy)) {
    doc["kind"] = "deterministic";
    doc["policy"] = selector_policy_json(model, *phi);
  } else if (auto* s = std::get_if<StationaryStrategy>(&strategy)) {
    doc["kind"] = "stationary";
    doc["policy"] = kernel_policy_json(model, *s);
  } else if (auto* m = std::get_if<MarkovStrategy>(&strategy)) {
    doc["kind"] = "markov";
    Json head = Json::array();
    for (const auto& h : m->head) head.push_back(kernel_policy_json(model, h));
    doc["head"] = head;
    doc["tail"] = kernel_policy_json(model, m->tail);
  } else {
    const auto& mix = std::get<MixedStrategy>(strategy);
    doc["kind"] = "mixed";
    Json comps = Json::array();
    for (const auto& c : mix.components)
      comps.push_back(Json{{"weight", tidy(c.weight)}, {"policy", selector_policy_json(model, c.selector)}});
    doc["components"] = comps;
  }
  return doc;
}

Json objective_json(const ConstrainedProblem& problem, const ObjectiveVector& r) {
  const auto& model = problem.model;
  Json doc;
  doc["objective"] = Json{{"cost", model.cost_name(0)}, {"value", tidy(r[0])}};
  Json cons = Json::array();
  for (Index j = 1; j < model.num_costs(); ++j)
    cons.push_back(Json{{"cost", model.cost_name(j)},
                        {"value", tidy(r[j])},
                        {"bound", problem.bounds[j - 1]}});
  doc["constraints"] = cons;
  return doc;
}

Json decomposition_json(const ConstrainedProblem& problem, const DecompositionResult& result) {
  const auto& model = problem.model;
  Json doc;
  doc["kind"] = "mixed";
  doc["cardinality"] = result.cardinality;
  doc["fallback"] = result.fallback;
  Json achieved = Json::array();
  for (Index j = 0; j < result.achieved.size(); ++j) achieved.push_back(tidy(result.achieved[j]));
  doc["achieved"] = achieved;
  Json comps = Json::array();
  for (std::size_t l = 0; l < result.mixture.components.size(); ++l) {
    const auto& c = result.mixture.components[l];
    Json obj = Json::array();
    for (Index j = 0; j < result.component_objectives[l].size(); ++j)
      obj.push_back(tidy(result.component_objectives[l][j]));
    comps.push_back(Json{{"weight", tidy(c.weight)},
                         {"policy", selector_policy_json(model, c.selector)},
                         {"objective", obj}});
  }
  doc["components"] = comps;
  return doc;
}

Json simulation_json(const FiniteMdpModel& model, const SimulationReport& report) {
  Json doc;
  doc["kind"] = "simulation";
  doc["trajectories"] = report.trajectories;
  Json entries = Json::array();
  for (Index k = 0; k < model.num_pairs(); ++k) {
    Index x = model.state_of(k);
    entries.push_back(Json{{"state", model.state_name(x)},
                           {"action", model.action_name(x, model.action_of(k))},
                           {"value", tidy(report.occupation[k])},
                           {"stderr", tidy(report.occupation_se[k])}});
  }
  doc["entries"] = entries;
  Json mu = Json::object();
  for (Index x = 0; x < model.num_states(); ++x)
    mu[model.state_name(x)] = Json{{"value", tidy(report.marginal[x])}, {"stderr", tidy(report.marginal_se[x])}};
  doc["marginal"] = mu;

  Json stats;
  Json costs = Json::array();
  for (Index j = 0; j < model.num_costs(); ++j)
    costs.push_back(Json{{"cost", model.cost_name(j)},
                         {"mean", tidy(report.cost_mean[j])},
                         {"stderr", tidy(report.cost_se[j])}});
  stats["costs"] = costs;
  stats["capped"] = report.capped;
  Json times = Json::object();
  for (const auto& [t, c] : report.absorption_times) times[std::to_string(t)] = c;
  stats["absorption_times"] = times;
  doc["statistics"] = stats;
  return doc;
}

Json finiteness_json(const FiniteMdpModel& model, const FinitenessReport& report) {
  Json doc;
  doc["verdict"] = report.finite() ? "finite" : "infinite";
  if (!report.finite()) {
    Json w = Json::array();
    for (Index x : report.witness) w.push_back(model.state_name(x));
    doc["witness"] = w;
  }
  return doc;
}

Json pairs_json(const FiniteMdpModel& model, const std::vector<Index>& pairs) {
  Json out = Json::array();
  for (Index k : pairs) {
    Index x = model.state_of(k);
    out.push_back(Json{{"state", model.state_name(x)}, {"action", model.action_name(x, model.action_of(k))}});
  }
  return out;
}

}  // namespace detail

ConstrainedProblem parse_problem(const std::string& text, const std::string& source) {
  const Json doc = detail::parse_json(text, source);
  if (!doc.is_object()) parse_fail(source, "<root>", "expected an object");
  allow_only(doc, {"states", "actions", "initial", "transitions", "costs", "constraints", "objective"},
             source, "");

  RawModel raw;
  raw.states = as_string_list(require(doc, "states", source, ""), source, "states");
  const Json& actions = require(doc, "actions", source, "");
  if (actions.is_array()) {
    auto shared = as_string_list(actions, source, "actions");
    raw.actions.assign(raw.states.size(), shared);
  } else if (actions.is_object()) {
    for (auto it = actions.begin(); it != actions.end(); ++it) {
      bool known = false;
      for (const auto& s : raw.states) known = known || s == it.key();
      if (!known)
        throw Error(ErrorCode::UnknownStateReference,
                    source + ": actions." + it.key() + ": unknown state '" + it.key() + "'");
    }
    for (const auto& s : raw.states) {
      auto it = actions.find(s);
      if (it == actions.end()) parse_fail(source, "actions." + s, "missing action list");
      raw.actions.push_back(as_string_list(*it, source, "actions." + s));
    }
  } else {
    parse_fail(source, "actions", "expected a list or a per-state object");
  }
  raw.initial = as_string(require(doc, "initial", source, ""), source, "initial");

  const Json& transitions = require(doc, "transitions", source, "");
  if (!transitions.is_array()) parse_fail(source, "transitions", "expected a list");
  std::set<std::pair<std::string, std::string>> given;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const std::string path = "transitions[" + std::to_string(i) + "]";
    const Json& t = transitions[i];
    if (!t.is_object()) parse_fail(source, path, "expected an object");
    allow_only(t, {"from", "action", "to"}, source, path);
    RawTransition rt;
    rt.from = as_string(require(t, "from", source, path), source, path + ".from");
    rt.action = as_string(require(t, "action", source, path), source, path + ".action");
    const Json& to = require(t, "to", source, path);
    if (!to.is_object()) parse_fail(source, path + ".to", "expected a state -> probability map");
    for (auto it = to.begin(); it != to.end(); ++it)
      rt.to.emplace_back(it.key(), as_number(it.value(), source, path + ".to." + it.key()));
    given.emplace(rt.from, rt.action);
    raw.transitions.push_back(std::move(rt));
  }
  for (std::size_t x = 0; x < raw.states.size() && x < raw.actions.size(); ++x)
    for (const auto& a : raw.actions[x])
      if (!given.count({raw.states[x], a}))
        parse_fail(source, "transitions", "missing transition for " + raw.states[x] + "/" + a);

  const Json& costs = require(doc, "costs", source, "");
  if (!costs.is_array()) parse_fail(source, "costs", "expected a list");
  std::map<std::string, RawCost> by_name;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const std::string path = "costs[" + std::to_string(i) + "]";
    const Json& c = costs[i];
    if (!c.is_object()) parse_fail(source, path, "expected an object");
    allow_only(c, {"name", "entries", "default"}, source, path);
    RawCost rc;
    rc.name = as_string(require(c, "name", source, path), source, path + ".name");
    if (by_name.count(rc.name)) throw Error(ErrorCode::DuplicateName, source + ": " + path + ": duplicate cost name '" + rc.name + "'");
    double fallback = 0.0;
    if (c.contains("default")) fallback = as_number(c["default"], source, path + ".default");
    const Json& entries = require(c, "entries", source, path);
    if (!entries.is_object()) parse_fail(source, path + ".entries", "expected a \"state/action\" -> value map");
    std::set<std::pair<std::string, std::string>> listed;
    for (auto it = entries.begin(); it != entries.end(); ++it) {
      auto [s, a] = split_pair_key(it.key(), source, path + ".entries");
      listed.emplace(s, a);
      rc.entries.push_back({s, a, as_number(it.value(), source, path + ".entries." + it.key())});
    }
    if (fallback != 0.0)
      for (std::size_t x = 0; x < raw.states.size(); ++x)
        for (const auto& a : raw.actions[x])
          if (!listed.count({raw.states[x], a})) rc.entries.push_back({raw.states[x], a, fallback});
    order.push_back(rc.name);
    by_name.emplace(rc.name, std::move(rc));
  }

  auto cost_ref = [&](const std::string& name, const std::string& path) -> const RawCost& {
    auto it = by_name.find(name);
    if (it == by_name.end()) parse_fail(source, path, "unknown cost '" + name + "'");
    return it->second;
  };

  const std::string objective = as_string(require(doc, "objective", source, ""), source, "objective");
  raw.costs.push_back(cost_ref(objective, "objective"));
  std::set<std::string> used{objective};
  std::vector<double> bounds;
  if (doc.contains("constraints")) {
    const Json& cons = doc["constraints"];
    if (!cons.is_array()) parse_fail(source, "constraints", "expected a list");
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const std::string path = "constraints[" + std::to_string(i) + "]";
      const Json& c = cons[i];
      if (!c.is_object()) parse_fail(source, path, "expected an object");
      allow_only(c, {"cost", "bound"}, source, path);
      std::string name = as_string(require(c, "cost", source, path), source, path + ".cost");
      raw.costs.push_back(cost_ref(name, path + ".cost"));
      used.insert(name);
      bounds.push_back(as_number(require(c, "bound", source, path), source, path + ".bound"));
    }
  }
  for (const auto& name : order)
    if (!used.count(name))
      parse_fail(source, "costs", "cost '" + name + "' is not used by the objective or a constraint");

  FiniteMdpModel model = validate_model(raw);
  return make_problem(std::move(model), Eigen::Map<Eigen::VectorXd>(bounds.data(), static_cast<Index>(bounds.size())));
}

ConstrainedProblem parse_model(const std::string& path) { return parse_problem(read_file(path), path); }

std::string serialize_problem(const ConstrainedProblem& problem) {
  return detail::dump(detail::problem_json(problem));
}

OccupationMeasure parse_occupation(const FiniteMdpModel& model, const std::string& text,
                                   const std::string& source) {
  const Json doc = detail::parse_json(text, source);
  if (!doc.is_object()) parse_fail(source, "<root>", "expected an object");
  // Solver output embeds the measure under "occupation".
  const Json& body = doc.contains("occupation") && !doc.contains("entries") ? doc["occupation"] : doc;
  if (body.contains("kind") && body["kind"] != "occupation")
    parse_fail(source, "kind", "expected an occupation document");
  const Json& entries = require(body, "entries", source, "");
  if (!entries.is_array()) parse_fail(source, "entries", "expected a list");
  OccupationMeasure m{Eigen::VectorXd::Zero(model.num_pairs())};
  std::vector<bool> seen(static_cast<std::size_t>(model.num_pairs()), false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = "entries[" + std::to_string(i) + "]";
    const Json& e = entries[i];
    if (!e.is_object()) parse_fail(source, path, "expected an object");
    Index x = state_index(model, as_string(require(e, "state", source, path), source, path + ".state"), source, path);
    Index a = action_index(model, x, as_string(require(e, "action", source, path), source, path + ".action"), source, path);
    double v = as_number(require(e, "value", source, path), source, path + ".value");
    if (!std::isfinite(v) || v < 0) parse_fail(source, path + ".value", "occupation must be finite and >= 0");
    Index k = model.pair(x, a);
    if (seen[k]) parse_fail(source, path, "pair listed twice");
    seen[k] = true;
    m.values[k] = v;
  }
  return m;
}

std::string serialize_occupation(const FiniteMdpModel& model, const OccupationMeasure& m) {
  return detail::dump(detail::occupation_json(model, m));
}

namespace {

DeterministicStrategy parse_selector(const FiniteMdpModel& model, const Json& policy,
                                     const std::string& source, const std::string& path) {
  if (!policy.is_object()) parse_fail(source, path, "expected a state -> action map");
  DeterministicStrategy phi = lowest_index_selector(model);
  std::vector<bool> seen(static_cast<std::size_t>(model.num_states()), false);
  for (auto it = policy.begin(); it != policy.end(); ++it) {
    Index x = state_index(model, it.key(), source, path);
    phi.choice[x] = action_index(model, x, as_string(it.value(), source, path + "." + it.key()), source, path);
    seen[x] = true;
  }
  for (Index x = 0; x < model.num_states(); ++x)
    if (!seen[x]) parse_fail(source, path, "no action given for state '" + model.state_name(x) + "'");
  return phi;
}

StationaryStrategy parse_kernel(const FiniteMdpModel& model, const Json& policy,
                                const std::string& source, const std::string& path) {
  if (!policy.is_object()) parse_fail(source, path, "expected a state -> distribution map");
  StationaryStrategy s{Eigen::VectorXd::Zero(model.num_pairs())};
  std::vector<bool> seen(static_cast<std::size_t>(model.num_states()), false);
  for (auto it = policy.begin(); it != policy.end(); ++it) {
    Index x = state_index(model, it.key(), source, path);
    const std::string row_path = path + "." + it.key();
    if (!it.value().is_object()) parse_fail(source, row_path, "expected an action -> probability map");
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      Index a = action_index(model, x, jt.key(), source, row_path);
      s.probs[model.pair(x, a)] = as_number(jt.value(), source, row_path + "." + jt.key());
    }
    seen[x] = true;
  }
  for (Index x = 0; x < model.num_states(); ++x)
    if (!seen[x]) parse_fail(source, path, "no distribution given for state '" + model.state_name(x) + "'");
  return s;
}

}  // namespace

SimStrategy parse_strategy(const FiniteMdpModel& model, const std::string& text,
                           const std::string& source) {
  const Json doc = detail::parse_json(text, source);
  if (!doc.is_object()) parse_fail(source, "<root>", "expected an object");
  const Json& body = doc.contains("mixture") && !doc.contains("kind") ? doc["mixture"] : doc;
  const std::string kind = as_string(require(body, "kind", source, ""), source, "kind");
  SimStrategy out;
  if (kind == "deterministic") {
    out = parse_selector(model, require(body, "policy", source, ""), source, "policy");
  } else if (kind == "stationary") {
    out = parse_kernel(model, require(body, "policy", source, ""), source, "policy");
  } else if (kind == "markov") {
    MarkovStrategy m;
    const Json& head = require(body, "head", source, "");
    if (!head.is_array()) parse_fail(source, "head", "expected a list");
    for (std::size_t i = 0; i < head.size(); ++i)
      m.head.push_back(parse_kernel(model, head[i], source, "head[" + std::to_string(i) + "]"));
    m.tail = parse_kernel(model, require(body, "tail", source, ""), source, "tail");
    out = std::move(m);
  } else if (kind == "mixed") {
    MixedStrategy mix;
    const Json& comps = require(body, "components", source, "");
    if (!comps.is_array()) parse_fail(source, "components", "expected a list");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string path = "components[" + std::to_string(i) + "]";
      double w = as_number(require(comps[i], "weight", source, path), source, path + ".weight");
      mix.components.push_back({w, parse_selector(model, require(comps[i], "policy", source, path), source, path + ".policy")});
    }
    out = std::move(mix);
  } else {
    parse_fail(source, "kind", "unknown strategy kind '" + kind + "'");
  }
  std::visit([&](const auto& s) { validate_strategy(model, s); }, out);
  return out;
}

std::string serialize_strategy(const FiniteMdpModel& model, const SimStrategy& strategy) {
  return detail::dump(detail::strategy_json(model, strategy));
}

std::string serialize_decomposition(const ConstrainedProblem& problem, const DecompositionResult& result) {
  return detail::dump(detail::decomposition_json(problem, result));
}

std::string serialize_simulation(const FiniteMdpModel& model, const SimulationReport& report) {
  return detail::dump(detail::simulation_json(model, report));
}

}  // namespace cmdp::io

#pragma once

#include "cmdp/io.hpp"

#include <json.hpp>

namespace cmdp::io::detail {

using Json = nlohmann::ordered_json;

Json problem_json(const ConstrainedProblem& problem);
Json occupation_json(const FiniteMdpModel& model, const OccupationMeasure& m);
Json strategy_json(const FiniteMdpModel& model, const SimStrategy& strategy);
Json selector_policy_json(const FiniteMdpModel& model, const DeterministicStrategy& phi);
Json decomposition_json(const ConstrainedProblem& problem, const DecompositionResult& result);
Json simulation_json(const FiniteMdpModel& model, const SimulationReport& report);
Json objective_json(const ConstrainedProblem& problem, const ObjectiveVector& r);
Json finiteness_json(const FiniteMdpModel& model, const FinitenessReport& report);
Json pairs_json(const FiniteMdpModel& model, const std::vector<Index>& pairs);

Json parse_json(const std::string& text, const std::string& source);

std::string dump(const Json& j);

}  // namespace cmdp::io::detail

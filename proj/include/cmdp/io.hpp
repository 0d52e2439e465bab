#pragma once

#include "cmdp/mixture.hpp"
#include "cmdp/model.hpp"
#include "cmdp/occupancy.hpp"
#include "cmdp/sim.hpp"

#include <string>

namespace cmdp::io {

/// Model documents (see docs/file-formats.md). `source` names the input in
/// error messages. Throws Error(ParseError) with key context on schema
/// problems and validate_model() errors otherwise.
ConstrainedProblem parse_problem(const std::string& text, const std::string& source = "<input>");
ConstrainedProblem parse_model(const std::string& path);

/// Canonical form: file order of states and actions, nonzero entries only,
/// shared action list when every state has the same actions.
std::string serialize_problem(const ConstrainedProblem& problem);

OccupationMeasure parse_occupation(const FiniteMdpModel& model, const std::string& text,
                                   const std::string& source = "<input>");
std::string serialize_occupation(const FiniteMdpModel& model, const OccupationMeasure& m);

SimStrategy parse_strategy(const FiniteMdpModel& model, const std::string& text,
                           const std::string& source = "<input>");
std::string serialize_strategy(const FiniteMdpModel& model, const SimStrategy& strategy);

std::string serialize_decomposition(const ConstrainedProblem& problem,
                                    const DecompositionResult& result);
std::string serialize_simulation(const FiniteMdpModel& model, const SimulationReport& report);

std::string read_file(const std::string& path);

/// Rounds to 15 significant digits and flushes |v| < 1e-14 to zero, so that
/// emitted documents do not carry last-bit noise.
double tidy(double v);

}  // namespace cmdp::io

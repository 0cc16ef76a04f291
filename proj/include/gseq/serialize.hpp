#ifndef GSEQ_SERIALIZE_HPP
#define GSEQ_SERIALIZE_HPP

#include <string>
#include <vector>

#include "gseq/decision.hpp"
#include "gseq/simulate.hpp"

namespace gseq {

// JSON schemas. Parse errors and schema violations surface as
// invalid_data_error with a short location hint. Non-finite boundary values
// are written as the string "inf" (or "-inf"); all other numbers round-trip
// at full precision.

std::string design_to_json(const DesignSpec& spec);
DesignSpec design_from_json(const std::string& text);

std::string boundary_set_to_json(const BoundarySet& set);
BoundarySet boundary_set_from_json(const std::string& text);

std::string decision_trace_to_json(const DecisionTrace& trace);

// Full analysis report: boundaries, decision and (for the permutation method)
// resampling details.
std::string interim_result_to_json(const InterimResult& result, BoundaryMode mode);

std::vector<ScenarioConfig> scenarios_from_json(const std::string& text);
std::string scenarios_to_json(std::span<const ScenarioConfig> scenarios);

std::string dist_to_json(const DistSpec& dist);
DistSpec dist_from_json(const std::string& text);

}  // namespace gseq

#endif

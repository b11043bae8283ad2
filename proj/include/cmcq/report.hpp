#pragma once

// Serialization of results, metrics and bounds for the command line.

#include <string>
#include <utility>
#include <vector>

#include "cmcq/bound.hpp"
#include "cmcq/engine.hpp"

namespace cmcq {

// Header line then one row per line, rows in ResultSet order (sorted).
std::string result_csv(const ResultSet& rs);
// One JSON object per row keyed by return variable.
std::string result_jsonl(const ResultSet& rs);

// {"mode", "total_intermediate", "total_ms", "optimality_certificate", "steps": [...]}
std::string metrics_json(const Metrics& m);

// {"rho1": {...}, ...}; each entry carries the exponent as "p/q", the
// witness, the winning suite and the search counters.
std::string bound_json(const std::vector<std::pair<std::string, Bound>>& bounds);

}  // namespace cmcq

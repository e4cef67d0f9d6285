#pragma once

#include "nehari/fibering.hpp"
#include "nehari/functionals.hpp"
#include "nehari/model_config.hpp"
#include "nehari/nehari_solver.hpp"

#include <json.hpp>

namespace nehari {

nlohmann::ordered_json to_json(const FiberScalars& sc);
nlohmann::ordered_json to_json(const EnergyBreakdown& e);
nlohmann::ordered_json to_json(const FiberingReport& r);
nlohmann::ordered_json to_json(const ValidationReport& r);
nlohmann::ordered_json to_json(const NminusReport& r);
nlohmann::ordered_json to_json(const PalaisSmaleReport& r);
/// Summary of a solve without the field values; the trace is included.
nlohmann::ordered_json to_json(const SolveResult& r);

/// FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace nehari

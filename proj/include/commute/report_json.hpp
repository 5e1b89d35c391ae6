#pragma once

#include <json.hpp>
#include <span>

#include "commute/bracket.hpp"
#include "commute/collapse_map.hpp"
#include "commute/evaluation_map.hpp"
#include "commute/pipeline.hpp"

namespace commute {

// Key order is fixed by ordered_json and no wall-clock data is written, so a
// report is a pure function of its inputs.
using Json = nlohmann::ordered_json;

Json to_json(const TorusDomain& domain);
Json to_json(const BracketReport& report);
Json to_json(const CollapseParams& params);
Json to_json(const CollapseMap& map);
Json to_json(const DisplacementReport& report);
Json to_json(const DegreeCheck& check);
Json to_json(const AreaFormulaResult& result);
Json to_json(const ApproximationReport& report);
Json to_json(const ThicknessReport& report, int n);
Json to_json(std::span<const SequenceEntry> entries);

CollapseParams collapse_params_from_json(const Json& j);

} // namespace commute

#pragma once

#include "conserv/fusion.hpp"

#include "json.hpp"

#include <string>

namespace conserv {

using Json = nlohmann::json;

/// {"family": ..., "params": {...}}. Errors name the offending field.
Density density_from_json(const Json& j);
Json density_to_json(const Density& d);

Json grid_to_json(const GridDensity& g);
GridDensity grid_from_json(const Json& params);

/// Region cells are run-length encoded as [start, length] pairs.
Json mvset_to_json(const MVSet& s);

Json report_to_json(const ConservativenessReport& r);

/// {"common": descriptor | null, "uniques": [...], "weights": [...],
///  "q": number | "inf" | "-inf", "rule": "lop" | "llop" | "power_mean"}.
FusionScenario scenario_from_json(const Json& j);
Json scenario_to_json(const FusionScenario& s);

/// Header "alpha,cond2,cond3".
std::string curves_csv(const ConditionCurve& c2, const ConditionCurve& c3);
/// Header "x,density" or "x,y,density".
std::string grid_csv(const GridDensity& g);

/// Shortest round-trip decimal form.
std::string format_number(double x);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace conserv

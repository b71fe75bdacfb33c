/**
 * @file io.hpp
 * @brief JSON forms of the public types, presets and session snapshots.
 */
#pragma once

#include "geodss/em_forward.hpp"
#include "geodss/enkf.hpp"
#include "geodss/geomodel.hpp"
#include "geodss/objectives.hpp"
#include "geodss/optimizer.hpp"
#include "geodss/steering.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace geodss {

using json = nlohmann::json;

void to_json(json& j, const Interval& v);
void from_json(const json& j, Interval& v);
void to_json(json& j, const GeostatParams& v);
void from_json(const json& j, GeostatParams& v);
void to_json(json& j, const EarthRealization& v);
void from_json(const json& j, EarthRealization& v);
void to_json(json& j, const Ensemble& v);
void from_json(const json& j, Ensemble& v);

void to_json(json& j, const ToolSpec& v);
void from_json(const json& j, ToolSpec& v);
void to_json(json& j, const Station& v);
void from_json(const json& j, Station& v);
void to_json(json& j, const MeasurementVector& v);
void from_json(const json& j, MeasurementVector& v);
void to_json(json& j, const AssimilationDiagnostics& v);

void to_json(json& j, const Point& v);
void from_json(const json& j, Point& v);
void to_json(json& j, const ObjectiveWeights& v);
void from_json(const json& j, ObjectiveWeights& v);
void to_json(json& j, const Constraints& v);
void from_json(const json& j, Constraints& v);

void to_json(json& j, const Recommendation& v);

void to_json(json& j, const Seeds& v);
void from_json(const json& j, Seeds& v);
void to_json(json& j, const SessionConfig& v);
void from_json(const json& j, SessionConfig& v);
void to_json(json& j, const Decision& v);
void from_json(const json& j, Decision& v);
void to_json(json& j, const Mutation& v);
void from_json(const json& j, Mutation& v);
void to_json(json& j, const StepRecord& v);
void to_json(json& j, const CaseMetrics& v);

/// Parses and validates a session config; missing fields keep defaults and
/// "preset": NAME loads that scenario's truth. Throws ArgumentError.
SessionConfig parse_session_config(const json& j);

/// Trajectory as [[x, z], ...].
json trajectory_json(const std::vector<Point>& trajectory);

/// Directory holding scenarios/<name>.json.
std::filesystem::path fixture_dir();
/// Truth of a scenario preset. Throws ArgumentError for unknown names.
EarthRealization load_preset_truth(const std::string& name);

/// Config plus mutation log.
json session_snapshot(const SteeringSession& session);
SteeringSession load_snapshot(const json& snapshot);

} // namespace geodss

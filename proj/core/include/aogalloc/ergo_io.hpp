#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "aogalloc/ergo.hpp"

namespace aogalloc {

/// Delimited rows of (t_seconds, shoulder, elbow, wrist, trunk, neck) in
/// degrees. Comma, semicolon, tab or space separated; '#' starts a comment.
/// An optional header may list the columns in any order.
AngleTrace parse_angle_csv(std::istream& in, const std::string& source = "<stream>");
/// Structured form: {"samples":[{"t":..,"shoulder":..,...}]} or rows [[t,s,e,w,tr,n],...].
AngleTrace angle_trace_from_json(const nlohmann::json& doc);
nlohmann::json angle_trace_to_json(const AngleTrace& trace);
/// .json files are structured, anything else is delimited text.
AngleTrace load_angle_trace(const std::filesystem::path& path);

RulaScoreTrace score_trace_from_json(const nlohmann::json& doc);
nlohmann::json score_trace_to_json(const RulaScoreTrace& trace);

/// {"shoulder":..,"elbow":..,"wrist":..,"trunk":..,"neck":..}; every joint required.
WearVector wear_from_json(const nlohmann::json& doc);
nlohmann::json wear_to_json(const WearVector& wear);
PerJoint<double> per_joint_from_json(const nlohmann::json& doc, const std::string& what);
nlohmann::json per_joint_to_json(const PerJoint<double>& values);

/// Missing keys keep the values from `base`.
CostConfig cost_config_from_json(const nlohmann::json& doc, const CostConfig& base = {});
nlohmann::json cost_config_to_json(const CostConfig& config);

RulaBandTable bands_from_json(const nlohmann::json& doc);
nlohmann::json bands_to_json(const RulaBandTable& table);

}  // namespace aogalloc

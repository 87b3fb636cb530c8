#pragma once

// Per-action prediction coefficients from repeated trials of the same action.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aogalloc/ergo.hpp"

namespace aogalloc {

struct TrialRecord {
  std::string action;
  std::optional<RulaScoreTrace> scores;     // preferred source
  std::optional<PerJoint<double>> v_start;  // endpoint pair when no trace is kept
  std::optional<PerJoint<double>> v_end;
  double duration_s = 0.0;
};

/// From a trace: alpha = exp(-int G / C). From endpoints:
/// alpha = (1 - V_end) / (1 - V_start).
PerJoint<double> alpha_from_trial(const TrialRecord& trial, double capacity);

enum class AlphaAverage { mean, median, trimmed_mean };

struct ActionCalibration {
  ActionModel model;
  PerJoint<double> stddev{};  // sample standard deviation of per-trial alpha
  std::size_t n_trials = 0;

  bool operator==(const ActionCalibration&) const = default;
};

ActionCalibration estimate_action_model(std::span<const TrialRecord> trials, double capacity,
                                        AlphaAverage average = AlphaAverage::mean);

/// Groups trials by action id (ascending) and estimates one model per action.
std::vector<ActionCalibration> estimate_action_models(std::span<const TrialRecord> trials, double capacity,
                                                      AlphaAverage average = AlphaAverage::mean);

inline constexpr int kCalibrationFormatVersion = 1;
inline constexpr int kTrialsFormatVersion = 1;

/// {"v":1,"trials":[{"action", "duration_s"?, one of "angles" | "angles_file" |
/// "scores" | "v_start"+"v_end"}]}. Angle traces are scored with `bands`;
/// duration defaults to the trace span.
std::vector<TrialRecord> trials_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                          const RulaBandTable& bands);

/// {"v":1,"actions":{"a1":{"shoulder":{"alpha","stddev","n_trials"},...,"duration_s":..}}}
nlohmann::json calibration_to_json(std::span<const ActionCalibration> calibrations);
std::map<std::string, ActionCalibration> calibration_from_json(const nlohmann::json& doc);
std::map<std::string, ActionModel> models_from_calibration(const std::map<std::string, ActionCalibration>& cal);

}  // namespace aogalloc

#include "aogalloc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aogalloc/aog_io.hpp"
#include "aogalloc/ergo_io.hpp"
#include "aogalloc/error.hpp"

namespace aogalloc {

using nlohmann::json;

PerJoint<double> alpha_from_trial(const TrialRecord& trial, double capacity) {
  if (!(capacity > 0.0)) throw Error(ErrorKind::invalid_argument, "capacity must be positive");
  PerJoint<double> alpha{};
  if (trial.scores) {
    if (trial.scores->samples.empty())
      throw Error(ErrorKind::invalid_argument, "trial for " + trial.action + " has an empty trace");
    const PerJoint<double> integral = score_integral(*trial.scores);
    for (std::size_t j = 0; j < kJointCount; ++j) alpha[j] = std::exp(-integral[j] / capacity);
    return alpha;
  }
  if (!trial.v_start || !trial.v_end)
    throw Error(ErrorKind::invalid_argument, "trial for " + trial.action + " has neither a trace nor endpoints");
  for (Joint j : kJoints) {
    const double s = (*trial.v_start)[index(j)];
    const double e = (*trial.v_end)[index(j)];
    const std::string name(joint_name(j));
    if (!(s >= 0.0 && s < 1.0) || !(e >= 0.0 && e < 1.0))
      throw Error(ErrorKind::invalid_argument, "trial for " + trial.action + ": " + name + " endpoints must be in [0, 1)");
    if (e < s)
      throw Error(ErrorKind::invalid_argument, "trial for " + trial.action + ": " + name + " wear decreased during the action");
    alpha[index(j)] = (1.0 - e) / (1.0 - s);
  }
  return alpha;
}

namespace {

double average(std::vector<double> xs, AlphaAverage how) {
  const std::size_t n = xs.size();
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
  switch (how) {
    case AlphaAverage::mean:
      return mean;
    case AlphaAverage::median:
      std::sort(xs.begin(), xs.end());
      return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
    case AlphaAverage::trimmed_mean: {
      if (n < 3) return mean;
      std::sort(xs.begin(), xs.end());
      // 10% per side, at least one sample.
      const std::size_t cut = std::max<std::size_t>(1, n / 10);
      return std::accumulate(xs.begin() + cut, xs.end() - cut, 0.0) / double(n - 2 * cut);
    }
  }
  return mean;
}

}  // namespace

ActionCalibration estimate_action_model(std::span<const TrialRecord> trials, double capacity, AlphaAverage how) {
  if (trials.empty()) throw Error(ErrorKind::invalid_argument, "calibration needs at least one trial");
  const std::string& action = trials.front().action;
  PerJoint<std::vector<double>> samples;
  double duration = 0.0;
  for (const TrialRecord& t : trials) {
    if (t.action != action)
      throw Error(ErrorKind::invalid_argument, "mixed action ids in calibration batch: '" + action + "' and '" + t.action + "'");
    const PerJoint<double> a = alpha_from_trial(t, capacity);
    for (std::size_t j = 0; j < kJointCount; ++j) samples[j].push_back(a[j]);
    duration += t.duration_s;
  }

  ActionCalibration out;
  out.n_trials = trials.size();
  out.model.action = action;
  out.model.nominal_duration_s = duration / double(trials.size());
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const std::vector<double>& xs = samples[j];
    out.model.alpha[j] = average(xs, how);
    if (xs.size() > 1) {
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      out.stddev[j] = std::sqrt(ss / double(xs.size() - 1));
    }
  }
  out.model.check();
  return out;
}

std::vector<ActionCalibration> estimate_action_models(std::span<const TrialRecord> trials, double capacity,
                                                      AlphaAverage how) {
  std::map<std::string, std::vector<TrialRecord>> by_action;
  for (const TrialRecord& t : trials) by_action[t.action].push_back(t);
  std::vector<ActionCalibration> out;
  for (const auto& [action, batch] : by_action) out.push_back(estimate_action_model(batch, capacity, how));
  return out;
}

std::vector<TrialRecord> trials_from_json(const json& doc, const std::filesystem::path& base_dir,
                                          const RulaBandTable& bands) {
  check_version(doc, kTrialsFormatVersion, "trials");
  if (!doc.contains("trials") || !doc["trials"].is_array()) throw Error(ErrorKind::parse, "trials: missing 'trials' array");
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < doc["trials"].size(); ++i) {
    const json& t = doc["trials"][i];
    const std::string where = "trials[" + std::to_string(i) + "]";
    try {
      if (!t.is_object() || !t.contains("action") || !t["action"].is_string())
        throw Error(ErrorKind::parse, "missing string 'action'");
      TrialRecord r;
      r.action = t["action"].get<std::string>();
      std::optional<AngleTrace> angles;
      if (t.contains("angles_file")) {
        std::filesystem::path p = t["angles_file"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        angles = load_angle_trace(p);
      } else if (t.contains("angles")) {
        angles = angle_trace_from_json(t["angles"]);
      }
      if (angles) r.scores = score_angle_trace(*angles, bands);
      else if (t.contains("scores")) r.scores = score_trace_from_json(t["scores"]);
      if (t.contains("v_start")) r.v_start = per_joint_from_json(t["v_start"], where + ".v_start");
      if (t.contains("v_end")) r.v_end = per_joint_from_json(t["v_end"], where + ".v_end");
      if (!r.scores && !(r.v_start && r.v_end))
        throw Error(ErrorKind::parse, "needs angles, angles_file, scores or v_start + v_end");
      if (t.contains("duration_s")) {
        r.duration_s = t["duration_s"].get<double>();
      } else if (r.scores && !r.scores->samples.empty()) {
        r.duration_s = r.scores->samples.back().t - r.scores->samples.front().t;
      } else {
        throw Error(ErrorKind::parse, "missing 'duration_s'");
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return out;
}

json calibration_to_json(std::span<const ActionCalibration> calibrations) {
  json actions = json::object();
  for (const ActionCalibration& c : calibrations) {
    json entry = json::object();
    for (Joint j : kJoints)
      entry[std::string(joint_name(j))] = {{"alpha", c.model.alpha[index(j)]},
                                           {"stddev", c.stddev[index(j)]},
                                           {"n_trials", c.n_trials}};
    entry["duration_s"] = c.model.nominal_duration_s;
    actions[c.model.action] = std::move(entry);
  }
  return {{"v", kCalibrationFormatVersion}, {"actions", std::move(actions)}};
}

std::map<std::string, ActionCalibration> calibration_from_json(const json& doc) {
  check_version(doc, kCalibrationFormatVersion, "calibration");
  if (!doc.contains("actions") || !doc["actions"].is_object())
    throw Error(ErrorKind::parse, "calibration: missing 'actions' object");
  std::map<std::string, ActionCalibration> out;
  for (const auto& [action, entry] : doc["actions"].items()) {
    const std::string where = "calibration.actions." + action;
    if (!entry.is_object()) throw Error(ErrorKind::parse, where + ": expected an object");
    ActionCalibration c;
    c.model.action = action;
    if (!entry.contains("duration_s") || !entry["duration_s"].is_number())
      throw Error(ErrorKind::parse, where + ": missing numeric 'duration_s'");
    c.model.nominal_duration_s = entry["duration_s"].get<double>();
    for (Joint j : kJoints) {
      const std::string name(joint_name(j));
      if (!entry.contains(name) || !entry[name].is_object())
        throw Error(ErrorKind::parse, where + ": missing joint '" + name + "'");
      const json& je = entry[name];
      if (!je.contains("alpha") || !je["alpha"].is_number())
        throw Error(ErrorKind::parse, where + "." + name + ": missing numeric 'alpha'");
      c.model.alpha[index(j)] = je["alpha"].get<double>();
      c.stddev[index(j)] = je.value("stddev", 0.0);
      c.n_trials = je.value("n_trials", std::size_t{0});
    }
    try {
      c.model.check();
    } catch (const Error& e) {
      throw Error(ErrorKind::validation, where + ": " + e.what());
    }
    out.emplace(action, std::move(c));
  }
  return out;
}

std::map<std::string, ActionModel> models_from_calibration(const std::map<std::string, ActionCalibration>& cal) {
  std::map<std::string, ActionModel> out;
  for (const auto& [action, c] : cal) out.emplace(action, c.model);
  return out;
}

}  // namespace aogalloc

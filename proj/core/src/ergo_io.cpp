#include "aogalloc/ergo_io.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "aogalloc/error.hpp"

namespace aogalloc {

using nlohmann::json;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : line) {
    if (c == ',' || c == ';' || c == '\t' || c == ' ' || c == '\r')
      flush();
    else
      cur += c;
  }
  flush();
  return out;
}

bool parse_number(const std::string& text, double& out) {
  std::size_t used = 0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size();
}

double number_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorKind::parse, where + ": missing field '" + key + "'");
  if (!obj[key].is_number()) throw Error(ErrorKind::parse, where + ": field '" + key + "' must be a number");
  return obj[key].get<double>();
}

template <typename Sample, typename Member>
std::vector<Sample> rows_from_json(const json& doc, const std::string& what, Member member) {
  const json& rows = doc.is_object() ? doc.value("samples", json()) : doc;
  if (!rows.is_array()) throw Error(ErrorKind::parse, what + ": expected an array of samples");
  std::vector<Sample> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& r = rows[i];
    const std::string where = what + " sample " + std::to_string(i);
    Sample s;
    if (r.is_array()) {
      if (r.size() != 1 + kJointCount)
        throw Error(ErrorKind::parse, where + ": expected 6 values (t + five joints)");
      for (const json& v : r)
        if (!v.is_number()) throw Error(ErrorKind::parse, where + ": values must be numbers");
      s.t = r[0].get<double>();
      for (std::size_t j = 0; j < kJointCount; ++j) (s.*member)[j] = r[j + 1].get<double>();
    } else if (r.is_object()) {
      s.t = number_at(r, "t", where);
      for (Joint j : kJoints) (s.*member)[index(j)] = number_at(r, std::string(joint_name(j)).c_str(), where);
    } else {
      throw Error(ErrorKind::parse, where + ": expected an array or object");
    }
    out.push_back(s);
  }
  return out;
}

template <typename Sample, typename Member>
json rows_to_json(const std::vector<Sample>& samples, Member member) {
  json rows = json::array();
  for (const Sample& s : samples) {
    json row = json::array({s.t});
    for (double v : s.*member) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

AngleTrace parse_angle_csv(std::istream& in, const std::string& source) {
  AngleTrace trace;
  // Column of t followed by the five joints in canonical order unless a header says otherwise.
  std::array<std::size_t, 1 + kJointCount> column{0, 1, 2, 3, 4, 5};
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    double probe = 0.0;
    if (!header_seen && trace.samples.empty() && !parse_number(fields.front(), probe)) {
      header_seen = true;
      std::array<bool, 1 + kJointCount> found{};
      for (std::size_t c = 0; c < fields.size(); ++c) {
        std::string name = fields[c];
        if (auto unit = name.find('_'); unit != std::string::npos) name.erase(unit);
        if (name == "t" || name == "time") {
          column[0] = c;
          found[0] = true;
        } else if (auto j = parse_joint(name)) {
          column[1 + index(*j)] = c;
          found[1 + index(*j)] = true;
        }
      }
      for (std::size_t k = 0; k < found.size(); ++k)
        if (!found[k])
          throw Error(ErrorKind::parse, where + ": header is missing column '" +
                                            (k == 0 ? std::string("t") : std::string(joint_name(kJoints[k - 1]))) + "'");
      continue;
    }
    AngleSample s;
    for (std::size_t k = 0; k < column.size(); ++k) {
      if (column[k] >= fields.size())
        throw Error(ErrorKind::parse, where + ": expected t and five joint angles");
      double v = 0.0;
      if (!parse_number(fields[column[k]], v))
        throw Error(ErrorKind::parse, where + ": '" + fields[column[k]] + "' is not a number");
      if (k == 0)
        s.t = v;
      else
        s.degrees[k - 1] = v;
    }
    if (!trace.samples.empty() && !(s.t > trace.samples.back().t))
      throw Error(ErrorKind::parse, where + ": timestamps must be strictly increasing");
    trace.samples.push_back(s);
  }
  return trace;
}

AngleTrace angle_trace_from_json(const json& doc) {
  AngleTrace trace;
  trace.samples = rows_from_json<AngleSample>(doc, "angle trace", &AngleSample::degrees);
  return trace;
}

json angle_trace_to_json(const AngleTrace& trace) {
  return rows_to_json(trace.samples, &AngleSample::degrees);
}

AngleTrace load_angle_trace(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    try {
      return angle_trace_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return parse_angle_csv(in, path.string());
}

RulaScoreTrace score_trace_from_json(const json& doc) {
  RulaScoreTrace trace;
  trace.samples = rows_from_json<ScoreSample>(doc, "score trace", &ScoreSample::score);
  if (trace.samples.size() > 1)
    trace.sample_period = (trace.samples.back().t - trace.samples.front().t) / double(trace.samples.size() - 1);
  return trace;
}

json score_trace_to_json(const RulaScoreTrace& trace) {
  return rows_to_json(trace.samples, &ScoreSample::score);
}

PerJoint<double> per_joint_from_json(const json& doc, const std::string& what) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, what + ": expected an object keyed by joint");
  PerJoint<double> out{};
  for (Joint j : kJoints) {
    const std::string name(joint_name(j));
    if (!doc.contains(name)) throw Error(ErrorKind::parse, what + ": missing joint '" + name + "'");
    if (!doc[name].is_number()) throw Error(ErrorKind::parse, what + ": joint '" + name + "' must be a number");
    out[index(j)] = doc[name].get<double>();
  }
  return out;
}

json per_joint_to_json(const PerJoint<double>& values) {
  json out = json::object();
  for (Joint j : kJoints) out[std::string(joint_name(j))] = values[index(j)];
  return out;
}

WearVector wear_from_json(const json& doc) {
  WearVector w;
  w.values = per_joint_from_json(doc, "wear");
  if (doc.contains("t") && doc["t"].is_number()) w.t = doc["t"].get<double>();
  return w;
}

json wear_to_json(const WearVector& wear) {
  json out = per_joint_to_json(wear.values);
  out["t"] = wear.t;
  return out;
}

CostConfig cost_config_from_json(const json& doc, const CostConfig& base) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, "config: expected an object");
  CostConfig c = base;
  auto num = [&](const char* key, double& dst) {
    if (doc.contains(key)) dst = number_at(doc, key, "config");
  };
  if (doc.contains("gamma")) {
    const json& g = doc["gamma"];
    c.gamma_low = number_at(g, "low", "config.gamma");
    c.gamma_med = number_at(g, "med", "config.gamma");
    c.gamma_high = number_at(g, "high", "config.gamma");
  }
  num("v_th1", c.v_th1);
  num("v_th2", c.v_th2);
  num("robot_cost", c.robot_cost);
  num("recovery_rate", c.recovery_rate);
  num("g_avg", c.g_avg);
  num("endurance_s", c.endurance_s);
  num("v_target", c.v_target);
  if (doc.contains("capacity") && !doc["capacity"].is_null())
    c.capacity_override = number_at(doc, "capacity", "config");
  if (doc.contains("weights")) c.weights = per_joint_from_json(doc["weights"], "config.weights");
  c.check();
  return c;
}

json cost_config_to_json(const CostConfig& c) {
  json out;
  out["gamma"] = {{"low", c.gamma_low}, {"med", c.gamma_med}, {"high", c.gamma_high}};
  out["v_th1"] = c.v_th1;
  out["v_th2"] = c.v_th2;
  out["robot_cost"] = c.robot_cost;
  out["recovery_rate"] = c.recovery_rate;
  out["g_avg"] = c.g_avg;
  out["endurance_s"] = c.endurance_s;
  out["v_target"] = c.v_target;
  out["capacity"] = c.capacity_override ? json(*c.capacity_override) : json(nullptr);
  out["weights"] = per_joint_to_json(c.weights);
  return out;
}

RulaBandTable bands_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, "bands: expected an object");
  RulaBandTable t = RulaBandTable::standard();
  if (doc.contains("steepness_per_deg")) t.steepness_per_deg = number_at(doc, "steepness_per_deg", "bands");
  for (Joint j : kJoints) {
    const std::string name(joint_name(j));
    if (!doc.contains(name)) continue;
    const json& jb = doc[name];
    const std::string where = "bands." + name;
    JointBands b;
    b.neutral_deg = number_at(jb, "neutral_deg", where);
    b.min_deg = number_at(jb, "min_deg", where);
    b.max_deg = number_at(jb, "max_deg", where);
    if (!jb.contains("breakpoints") || !jb["breakpoints"].is_array())
      throw Error(ErrorKind::parse, where + ": missing breakpoints array");
    for (const json& bp : jb["breakpoints"]) {
      Breakpoint p;
      p.angle_deg = number_at(bp, "angle_deg", where);
      p.increment = number_at(bp, "increment", where);
      const std::string side = bp.value("side", "flexion");
      if (side == "flexion")
        p.side = BandSide::flexion;
      else if (side == "extension")
        p.side = BandSide::extension;
      else
        throw Error(ErrorKind::parse, where + ": side must be flexion or extension");
      b.breakpoints.push_back(p);
    }
    t.joints[index(j)] = std::move(b);
  }
  t.check();
  return t;
}

json bands_to_json(const RulaBandTable& t) {
  json out;
  out["steepness_per_deg"] = t.steepness_per_deg;
  for (Joint j : kJoints) {
    const JointBands& b = t.joints[index(j)];
    json bps = json::array();
    for (const Breakpoint& p : b.breakpoints)
      bps.push_back({{"angle_deg", p.angle_deg},
                     {"increment", p.increment},
                     {"side", p.side == BandSide::flexion ? "flexion" : "extension"}});
    out[std::string(joint_name(j))] = {
        {"neutral_deg", b.neutral_deg}, {"min_deg", b.min_deg}, {"max_deg", b.max_deg}, {"breakpoints", bps}};
  }
  return out;
}

}  // namespace aogalloc

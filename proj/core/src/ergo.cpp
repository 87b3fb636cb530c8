#include "aogalloc/ergo.hpp"

#include <algorithm>
#include <cmath>

#include "aogalloc/error.hpp"

namespace aogalloc {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames{"shoulder", "elbow", "wrist", "trunk",
                                                                "neck"};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double raw_score(const JointBands& bands, double angle, double steepness) {
  double g = 1.0;
  for (const Breakpoint& b : bands.breakpoints) {
    const double sign = b.side == BandSide::flexion ? 1.0 : -1.0;
    g += b.increment * logistic(sign * steepness * (angle - b.angle_deg));
  }
  return g;
}

std::string fmt(double v) { return std::to_string(v); }

// 1 - tiny rounds to 1.0 once the exponent underflows; wear stays in [0, 1).
constexpr double kWearCeiling = 1.0 - 0x1p-53;
double below_one(double v) { return std::min(v, kWearCeiling); }

}  // namespace

std::string_view joint_name(Joint j) noexcept { return kJointNames[index(j)]; }

std::optional<Joint> parse_joint(std::string_view name) noexcept {
  for (Joint j : kJoints)
    if (kJointNames[index(j)] == name) return j;
  return std::nullopt;
}

void check_wear(const WearVector& wear) {
  for (Joint j : kJoints) {
    const double v = wear[j];
    if (!(v >= 0.0 && v < 1.0))
      throw Error(ErrorKind::invalid_argument, "wear for " + std::string(joint_name(j)) + " must be in [0, 1), got " + fmt(v));
  }
}

RulaBandTable RulaBandTable::standard() {
  RulaBandTable t;
  using B = Breakpoint;
  constexpr auto flex = BandSide::flexion;
  constexpr auto ext = BandSide::extension;
  // Raw RULA ranges rescaled to [1, 7]: shoulder 1..4 (x2), elbow 1..2 (x6),
  // wrist 1..2 (x6), trunk 1..3 (x3), neck 1..4 (x2).
  t.joints[index(Joint::shoulder)] = {0.0, -60.0, 180.0, {B{20, 2, flex}, B{45, 2, flex}, B{90, 2, flex}, B{-20, 2, ext}}};
  t.joints[index(Joint::elbow)] = {80.0, 0.0, 160.0, {B{60, 6, ext}, B{100, 6, flex}}};
  t.joints[index(Joint::wrist)] = {0.0, -90.0, 90.0, {B{15, 6, flex}, B{-15, 6, ext}}};
  t.joints[index(Joint::trunk)] = {0.0, -30.0, 120.0, {B{20, 3, flex}, B{60, 3, flex}}};
  t.joints[index(Joint::neck)] = {0.0, -60.0, 80.0, {B{10, 2, flex}, B{20, 2, flex}, B{-10, 6, ext}}};
  return t;
}

void RulaBandTable::check() const {
  if (!(steepness_per_deg > 0.0))
    throw Error(ErrorKind::validation, "sigmoid steepness must be positive");
  for (Joint j : kJoints) {
    const JointBands& b = joints[index(j)];
    const std::string name(joint_name(j));
    if (!(b.min_deg < b.max_deg) || b.neutral_deg < b.min_deg || b.neutral_deg > b.max_deg)
      throw Error(ErrorKind::validation, name + ": neutral angle must lie inside [min, max]");
    for (const Breakpoint& bp : b.breakpoints)
      if (!(bp.increment > 0.0))
        throw Error(ErrorKind::validation, name + ": band increments must be positive");
  }
}

double rula_score(Joint joint, double angle_deg, const RulaBandTable& table) {
  if (index(joint) >= kJointCount) throw Error(ErrorKind::not_found, "unknown joint");
  const JointBands& bands = table.joints[index(joint)];
  if (!(angle_deg >= bands.min_deg && angle_deg <= bands.max_deg))
    throw Error(ErrorKind::invalid_argument,
                std::string(joint_name(joint)) + " angle " + fmt(angle_deg) + " deg outside [" +
                    fmt(bands.min_deg) + ", " + fmt(bands.max_deg) + "]");
  const double k = table.steepness_per_deg;
  // Pin the neutral posture to exactly 1.
  const double offset = raw_score(bands, bands.neutral_deg, k) - 1.0;
  return std::clamp(raw_score(bands, angle_deg, k) - offset, 1.0, 7.0);
}

double rula_lipschitz(Joint joint, const RulaBandTable& table) {
  double sum = 0.0;
  for (const Breakpoint& b : table.joints[index(joint)].breakpoints) sum += b.increment;
  return sum * table.steepness_per_deg / 4.0;
}

RulaScoreTrace score_angle_trace(const AngleTrace& trace, const RulaBandTable& table) {
  if (trace.samples.empty()) throw Error(ErrorKind::invalid_argument, "angle trace is empty");
  RulaScoreTrace out;
  out.samples.reserve(trace.samples.size());
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const AngleSample& s = trace.samples[i];
    if (i > 0 && !(s.t > trace.samples[i - 1].t))
      throw Error(ErrorKind::invalid_argument, "angle trace timestamps must be strictly increasing (sample " +
                                                   std::to_string(i) + ")");
    ScoreSample g;
    g.t = s.t;
    for (Joint j : kJoints) g.score[index(j)] = rula_score(j, s.degrees[index(j)], table);
    out.samples.push_back(g);
  }
  if (out.samples.size() > 1)
    out.sample_period = (out.samples.back().t - out.samples.front().t) / double(out.samples.size() - 1);
  return out;
}

double capacity(double g_avg, double endurance_s, double v_target) {
  if (!(v_target > 0.0 && v_target < 1.0))
    throw Error(ErrorKind::invalid_argument, "target wear must be in (0, 1), got " + fmt(v_target));
  if (!(g_avg >= 1.0 && g_avg <= 7.0))
    throw Error(ErrorKind::invalid_argument, "average RULA score must be in [1, 7], got " + fmt(g_avg));
  if (!(endurance_s > 0.0)) throw Error(ErrorKind::invalid_argument, "endurance time must be positive");
  return -g_avg * endurance_s / std::log(1.0 - v_target);
}

double CostConfig::capacity() const {
  return capacity_override ? *capacity_override : aogalloc::capacity(g_avg, endurance_s, v_target);
}

void CostConfig::check() const {
  if (!(gamma_low > 0.0 && gamma_low < gamma_med && gamma_med < gamma_high))
    throw Error(ErrorKind::validation, "gamma scores must satisfy 0 < low < med < high");
  if (!(v_th1 > 0.0 && v_th1 < v_th2 && v_th2 < 1.0))
    throw Error(ErrorKind::validation, "thresholds must satisfy 0 < V_th1 < V_th2 < 1");
  if (!(robot_cost >= 0.0)) throw Error(ErrorKind::validation, "robot cost must be nonnegative");
  if (!(recovery_rate >= 0.0)) throw Error(ErrorKind::validation, "recovery rate must be nonnegative");
  if (!(capacity() > 0.0)) throw Error(ErrorKind::validation, "capacity must be positive");
  for (double w : weights)
    if (!(w > 0.0)) throw Error(ErrorKind::validation, "joint weights must be positive");
}

PerJoint<double> score_integral(const RulaScoreTrace& trace) {
  if (trace.samples.empty()) throw Error(ErrorKind::invalid_argument, "score trace is empty");
  PerJoint<double> total{};
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    const ScoreSample& a = trace.samples[i - 1];
    const ScoreSample& b = trace.samples[i];
    const double dt = b.t - a.t;
    if (!(dt > 0.0))
      throw Error(ErrorKind::invalid_argument, "score trace timestamps must be strictly increasing (sample " +
                                                   std::to_string(i) + ")");
    for (std::size_t j = 0; j < kJointCount; ++j) total[j] += 0.5 * (a.score[j] + b.score[j]) * dt;
  }
  return total;
}

std::vector<WearVector> integrate_wear(const WearVector& v0, const RulaScoreTrace& trace, double capacity) {
  check_wear(v0);
  if (!(capacity > 0.0)) throw Error(ErrorKind::invalid_argument, "capacity must be positive");
  if (trace.samples.empty()) throw Error(ErrorKind::invalid_argument, "score trace is empty");
  for (const ScoreSample& s : trace.samples)
    for (double g : s.score)
      if (!(g >= 0.0)) throw Error(ErrorKind::invalid_argument, "RULA scores must be nonnegative");

  std::vector<WearVector> out;
  out.reserve(trace.samples.size());
  PerJoint<double> integral{};
  const double t0 = trace.samples.front().t;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (i > 0) {
      const ScoreSample& a = trace.samples[i - 1];
      const ScoreSample& b = trace.samples[i];
      const double dt = b.t - a.t;
      if (!(dt > 0.0))
        throw Error(ErrorKind::invalid_argument, "score trace timestamps must be strictly increasing (sample " +
                                                     std::to_string(i) + ")");
      for (std::size_t j = 0; j < kJointCount; ++j) integral[j] += 0.5 * (a.score[j] + b.score[j]) * dt;
    }
    WearVector v;
    v.t = v0.t + (trace.samples[i].t - t0);
    for (std::size_t j = 0; j < kJointCount; ++j)
      v.values[j] = below_one(1.0 - (1.0 - v0.values[j]) * std::exp(-integral[j] / capacity));
    out.push_back(v);
  }
  return out;
}

double recover(double v0, double duration_s, double recovery_rate, double capacity) {
  if (!(duration_s >= 0.0)) throw Error(ErrorKind::invalid_argument, "recovery duration must be nonnegative");
  if (!(v0 >= 0.0 && v0 < 1.0)) throw Error(ErrorKind::invalid_argument, "wear must be in [0, 1)");
  if (!(capacity > 0.0)) throw Error(ErrorKind::invalid_argument, "capacity must be positive");
  return v0 * std::exp(-recovery_rate * duration_s / capacity);
}

WearVector recover(const WearVector& v0, double duration_s, double recovery_rate, double capacity) {
  WearVector out = v0;
  for (std::size_t j = 0; j < kJointCount; ++j)
    out.values[j] = recover(v0.values[j], duration_s, recovery_rate, capacity);
  out.t = v0.t + duration_s;
  return out;
}

void ActionModel::check() const {
  for (Joint j : kJoints) {
    const double a = alpha[index(j)];
    if (!(a > 0.0 && a <= 1.0))
      throw Error(ErrorKind::validation, "action " + action + ": alpha for " + std::string(joint_name(j)) +
                                             " must be in (0, 1], got " + fmt(a));
  }
  if (!(nominal_duration_s >= 0.0))
    throw Error(ErrorKind::validation, "action " + action + ": nominal duration must be nonnegative");
}

WearVector predict(const WearVector& wear, const ActionModel& model) {
  check_wear(wear);
  model.check();
  WearVector out = wear;
  for (std::size_t j = 0; j < kJointCount; ++j)
    out.values[j] = below_one(model.alpha[j] * wear.values[j] + (1.0 - model.alpha[j]));
  return out;
}

const char* to_string(RiskLevel level) noexcept {
  switch (level) {
    case RiskLevel::low: return "low";
    case RiskLevel::medium: return "medium";
    case RiskLevel::high: return "high";
  }
  return "low";
}

RiskLevel risk_level(double predicted, const CostConfig& config) {
  if (predicted <= config.v_th1) return RiskLevel::low;
  if (predicted >= config.v_th2) return RiskLevel::high;
  return RiskLevel::medium;
}

double gamma_of(double predicted, const CostConfig& config) {
  switch (risk_level(predicted, config)) {
    case RiskLevel::low: return config.gamma_low;
    case RiskLevel::medium: return config.gamma_med;
    case RiskLevel::high: return config.gamma_high;
  }
  return config.gamma_high;
}

double human_cost(const WearVector& predicted, const CostConfig& config) {
  double cost = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j)
    cost += config.weights[j] * gamma_of(predicted.values[j], config);
  return cost;
}

}  // namespace aogalloc

#pragma once

// Joint-level ergonomic model: continuous RULA scores, kinematic wear
// (RC-circuit charge while working, discharge while resting), one-step wear
// prediction and the per-action human cost built on it.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aogalloc {

enum class Joint : std::size_t { shoulder = 0, elbow, wrist, trunk, neck };
inline constexpr std::size_t kJointCount = 5;
inline constexpr std::array<Joint, kJointCount> kJoints{Joint::shoulder, Joint::elbow, Joint::wrist,
                                                       Joint::trunk, Joint::neck};

template <typename T>
using PerJoint = std::array<T, kJointCount>;

constexpr std::size_t index(Joint j) noexcept { return static_cast<std::size_t>(j); }
std::string_view joint_name(Joint j) noexcept;
std::optional<Joint> parse_joint(std::string_view name) noexcept;

/// Kinematic wear per joint, each in [0, 1).
struct WearVector {
  PerJoint<double> values{};
  double t = 0.0;  // seconds

  double operator[](Joint j) const noexcept { return values[index(j)]; }
  double& operator[](Joint j) noexcept { return values[index(j)]; }
  bool operator==(const WearVector&) const = default;
};

/// Throws invalid_argument unless every value is in [0, 1).
void check_wear(const WearVector& wear);

struct ScoreSample {
  double t = 0.0;
  PerJoint<double> score{};  // RULA score in [1, 7]
};

struct RulaScoreTrace {
  std::vector<ScoreSample> samples;
  double sample_period = 1.0 / 60.0;
};

struct AngleSample {
  double t = 0.0;
  PerJoint<double> degrees{};
};

struct AngleTrace {
  std::vector<AngleSample> samples;
};

enum class BandSide {
  flexion,    // score rises once the angle exceeds the breakpoint
  extension,  // score rises once the angle drops below the breakpoint
};

struct Breakpoint {
  double angle_deg = 0.0;
  double increment = 0.0;
  BandSide side = BandSide::flexion;
};

struct JointBands {
  double neutral_deg = 0.0;
  double min_deg = -180.0;
  double max_deg = 180.0;
  std::vector<Breakpoint> breakpoints;
};

/// Discrete RULA posture bands smoothed by logistic steps. Each joint's
/// bands are rescaled so the score spans [1, 7].
struct RulaBandTable {
  PerJoint<JointBands> joints{};
  double steepness_per_deg = 0.5;

  /// Shoulder 20/45/90 deg (+ extension), elbow 60-100 deg window, wrist
  /// +-15 deg, trunk 20/60 deg, neck 10/20 deg + extension.
  static RulaBandTable standard();
  void check() const;
};

/// Continuous score in [1, 7]; exactly 1 at the joint's neutral angle.
double rula_score(Joint joint, double angle_deg, const RulaBandTable& table);
RulaScoreTrace score_angle_trace(const AngleTrace& trace, const RulaBandTable& table);

/// Largest possible |dG/dtheta| for the joint; bounds inter-sample jumps.
double rula_lipschitz(Joint joint, const RulaBandTable& table);

struct CostConfig {
  double gamma_low = 1.0;
  double gamma_med = 10.0;
  double gamma_high = 100.0;
  double v_th1 = 0.25;
  double v_th2 = 0.75;
  double robot_cost = 35.0;
  double recovery_rate = 3.0;
  double g_avg = 3.0;
  double endurance_s = 240.0;
  double v_target = 0.993;
  std::optional<double> capacity_override;
  PerJoint<double> weights{1.0, 1.0, 1.0, 1.0, 1.0};

  double capacity() const;
  void check() const;
};

/// C = -G_avg * endurance / ln(1 - V_target).
double capacity(double g_avg, double endurance_s, double v_target);

/// V(t) = 1 - (1 - V0) exp(-int_0^t G/C) per joint, trapezoidal integral.
/// One output per input sample; the first equals V0.
std::vector<WearVector> integrate_wear(const WearVector& v0, const RulaScoreTrace& trace, double capacity);

/// Trapezoidal integral of G over the trace, per joint.
PerJoint<double> score_integral(const RulaScoreTrace& trace);

/// Rest: V = V0 exp(-r * duration / C).
double recover(double v0, double duration_s, double recovery_rate, double capacity);
WearVector recover(const WearVector& v0, double duration_s, double recovery_rate, double capacity);

/// Per-action linear prediction coefficients; beta = 1 - alpha.
struct ActionModel {
  std::string action;
  PerJoint<double> alpha{1.0, 1.0, 1.0, 1.0, 1.0};
  double nominal_duration_s = 0.0;

  double beta(Joint j) const noexcept { return 1.0 - alpha[index(j)]; }
  void check() const;
  bool operator==(const ActionModel&) const = default;
};

/// V_hat_j = alpha_j * V_j + (1 - alpha_j).
WearVector predict(const WearVector& wear, const ActionModel& model);

enum class RiskLevel { low, medium, high };
const char* to_string(RiskLevel level) noexcept;

/// low iff v <= V_th1, high iff v >= V_th2, medium otherwise.
RiskLevel risk_level(double predicted, const CostConfig& config);
double gamma_of(double predicted, const CostConfig& config);

/// Weighted sum of per-joint gamma scores.
double human_cost(const WearVector& predicted, const CostConfig& config);

}  // namespace aogalloc

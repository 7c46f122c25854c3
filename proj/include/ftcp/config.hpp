#pragma once

#include <json.hpp>

#include <optional>

#include "ftcp/fixed_tcp.hpp"
#include "ftcp/profile.hpp"

namespace ftcp {

struct Tolerances {
  double fixed_tcp_position_m = 1e-9;
  double fixed_tcp_orientation_rad = 1e-9;
  double pose_fit_position_m = 1e-4;
  double pose_fit_angle_rad = 1e-3;
  double tcp_speed_m_s = 1e-6;
  double ee_speed_m_s = 1e-6;
  double limit_slack = 1e-9;
  double chain_rule_relative = 1e-4;
  // Chain-rule check from output samples only (validate); limited by the rate.
  double grid_chain_rule_relative = 1e-3;
};

enum class NormalMode { kConstant, kPerPoint };

struct PlannerConfig {
  int fit_degree = 5;
  std::optional<int> fit_control_points;  // default: N / 4
  NormalMode normal_mode = NormalMode::kConstant;
  Vec3 constant_normal = Vec3(0, 0, -1);
  SetupConfig setup;
  int path_samples = 1000;
  int arc_length_samples = 1024;
  SpeedFrame speed_frame = SpeedFrame::kTcp;
  MotionLimits limits{0.05, 0.5, 5.0};
  bool smoothing = true;
  int smoothing_degree = 5;
  std::optional<int> smoothing_control_points;  // default: path_samples / 4
  double output_rate_hz = 1000.0;
  double cusp_threshold_deg = 5.0;
  Tolerances tolerances;

  // Rejects unknown keys and out-of-range values with InvalidConfig.
  static PlannerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int fit_control_points_for(std::size_t num_points) const;
  int smoothing_control_points_value() const;
};

PlannerConfig load_config(const std::string& path);

// Rotation given as three rows, or as {"tait_bryan_xyz": [a, b, g]}.
Mat3 rotation_from_json(const nlohmann::json& j);

}  // namespace ftcp

#pragma once

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftcp/config.hpp"
#include "ftcp/fixed_tcp.hpp"
#include "ftcp/profile.hpp"
#include "ftcp/spline.hpp"
#include "ftcp/trajectory.hpp"

namespace ftcp {

// sigma_k = length * k / (count - 1), with the last value exactly `length`.
std::vector<double> sigma_samples(double length, int count);

struct ProcessingFit {
  DataPolygon polygon;  // after duplicate removal
  std::size_t duplicates_removed = 0;
  ParameterTable params;
  CurveFit fit;
};

ProcessingFit fit_processing_path(const PlannerConfig& config, const DataPolygon& input);

// Surface normals for the processing path. Per-point mode needs the normals of
// `polygon` at parameters `params`.
NormalField make_normal_field(const PlannerConfig& config, const DataPolygon* polygon,
                              const ParameterTable* params);

struct ProfileExtremes {
  double max_velocity = 0.0;
  double max_acceleration = 0.0;
  double max_jerk = 0.0;
};

// Largest |sigma_dot|, |sigma_ddot| and |sigma_dddot| over a uniform grid.
ProfileExtremes profile_extremes(const ScalarProfile& profile, double rate_hz);

// Largest distance from the end effector's mount point to the processing path.
double max_lever_arm(std::span<const ProcessFrameSample> frames, const SetupConfig& setup);

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

// Quantities measured on a sampled trajectory.
struct TrajectoryMetrics {
  std::size_t samples = 0;
  double position_drift = 0.0;     // m, contact point vs r_0T
  double orientation_drift = 0.0;  // rad, process frame vs R_IT
  double position_bound = 0.0;
  double orientation_bound = 0.0;
  std::size_t cruise_samples = 0;
  double tcp_speed_error = 0.0;    // max | |v_0T| - v_max | during cruise
  double max_ee_speed = 0.0;       // max |v_0E|
  double boundary_max = 0.0;       // largest velocity-level entry at t = 0 and t = T
  double jerk_proxy = 0.0;         // max |d/dt of translational acceleration|
  double chain_velocity_position = 0.0;
  double chain_velocity_angle = 0.0;
  double chain_acceleration_position = 0.0;
  double chain_acceleration_angle = 0.0;
};

// Fills everything except the chain_* fields. `samples` must carry sigma.
TrajectoryMetrics measure_trajectory(std::span<const TrajectorySample> samples,
                                     const FixedTcpPath& path, const ScalarProfile& profile,
                                     double rate_hz);

// Chain-rule consistency from the samples alone: five-point differences on
// the uniform part of the grid (the closing sample at t = T is skipped).
void grid_chain_rule_errors(std::span<const TrajectorySample> samples, double rate_hz,
                            TrajectoryMetrics& metrics);

// Drift bounds that apply to the trajectory: the fixed-TCP tolerances without
// smoothing, the pose-fit tolerances carried through the lever arm with it.
void set_drift_bounds(TrajectoryMetrics& metrics, const PlannerConfig& config,
                      double lever_arm);

// Appends the trajectory checks (drift, speed, boundaries, chain rule). With
// `grid` the chain-rule values come from grid_chain_rule_errors and are held
// to the looser grid tolerance.
void trajectory_checks(const TrajectoryMetrics& m, const PlannerConfig& config,
                       std::vector<Check>& checks, bool grid = false);

struct PipelineReport {
  std::size_t input_points = 0;
  std::size_t duplicates_removed = 0;
  int fit_degree = 0;
  int fit_control_points = 0;
  double fit_rms_error = 0.0;
  double fit_max_error = 0.0;
  double path_length = 0.0;
  SpeedFrame speed_frame = SpeedFrame::kTcp;
  FixedTcpReport path_drift;
  std::vector<double> processing_cusps;
  std::vector<double> robot_cusps;
  bool smoothing = false;
  int smoothing_degree = 0;
  int smoothing_control_points = 0;
  PoseFitReport pose_fit;       // at the fitted samples
  PoseFitReport pose_held_out;  // midway between fitted samples
  double lever_arm = 0.0;
  double duration = 0.0;
  double cruise_begin = 0.0;
  double cruise_end = 0.0;
  ProfileExtremes profile;
  TrajectoryMetrics trajectory;
  std::vector<Check> checks;
  bool pass = false;

  nlohmann::json to_json() const;
};

struct PipelineResult {
  PlannerConfig config;
  std::optional<ProcessingFit> processing;
  std::unique_ptr<FixedTcpPath> path;
  std::vector<ProcessFrameSample> frames;
  std::vector<RobotPathSample> robot;
  std::optional<PoseSplineFit> smoothed;
  std::unique_ptr<PosePath> pose_path;
  std::optional<ScalarProfile> profile;
  std::vector<TrajectorySample> trajectory;
  PipelineReport report;
};

// fit -> frames -> transform -> (smoothing) -> profile -> sampling ->
// validation. Errors are rethrown as StageError naming the stage.
PipelineResult run_pipeline(const PlannerConfig& config, const DataPolygon& input);

// trajectory.csv, report.json, processing_spline.json, frames.csv,
// robot_path.csv and profile.csv.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace ftcp

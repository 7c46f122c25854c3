#include "ftcp/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftcp/errors.hpp"
#include "ftcp/frames.hpp"
#include "ftcp/io.hpp"

namespace ftcp {

using nlohmann::json;

namespace {

// The "ftcp" logger if the application registered one, otherwise a quiet
// stderr logger.
spdlog::logger& logger() {
  if (auto registered = spdlog::get("ftcp")) return *registered;
  static spdlog::logger fallback = [] {
    spdlog::logger l("ftcp", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
    l.set_pattern("[%l] %v");
    l.set_level(spdlog::level::warn);
    return l;
  }();
  return fallback;
}

template <class F>
auto in_stage(const char* name, F&& body) {
  logger().debug("stage {}", name);
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

double relative(double err, double scale) { return scale > 0.0 ? err / scale : err; }

void add_check(std::vector<Check>& checks, std::string name, double value, double limit) {
  checks.push_back({std::move(name), value, limit, value <= limit});
}

// Central differences with step h around every sample, against fresh
// evaluations of the same pose path and profile. Near tight robot-path corners
// the angular acceleration changes within microseconds, hence the small step.
void chain_rule_errors(const PosePath& pose, const ScalarProfile& profile,
                       std::span<const TrajectorySample> samples, TrajectoryMetrics& m) {
  constexpr double h = 1e-6;
  const double total = profile.duration();
  double err[4] = {0, 0, 0, 0};
  double scale[4] = {0, 0, 0, 0};
  for (const auto& s : samples) {
    scale[0] = std::max(scale[0], s.velocity.head<3>().norm());
    scale[1] = std::max(scale[1], s.velocity.tail<3>().norm());
    scale[2] = std::max(scale[2], s.acceleration.head<3>().norm());
    scale[3] = std::max(scale[3], s.acceleration.tail<3>().norm());
    if (s.t < h || s.t > total - h) continue;
    const TrajectorySample a = trajectory_at(pose, profile, s.t - h);
    const TrajectorySample b = trajectory_at(pose, profile, s.t + h);
    const Vec6 dv = (b.pose - a.pose) / (2.0 * h) - s.velocity;
    const Vec6 da = (b.velocity - a.velocity) / (2.0 * h) - s.acceleration;
    err[0] = std::max(err[0], dv.head<3>().norm());
    err[1] = std::max(err[1], dv.tail<3>().norm());
    err[2] = std::max(err[2], da.head<3>().norm());
    err[3] = std::max(err[3], da.tail<3>().norm());
  }
  m.chain_velocity_position = relative(err[0], scale[0]);
  m.chain_velocity_angle = relative(err[1], scale[1]);
  m.chain_acceleration_position = relative(err[2], scale[2]);
  m.chain_acceleration_angle = relative(err[3], scale[3]);
}

json cusps_json(std::span<const double> cusps) { return json(std::vector<double>(cusps.begin(), cusps.end())); }

}  // namespace

std::vector<double> sigma_samples(double length, int count) {
  if (count < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two samples");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] =
        k + 1 == count ? length : length * static_cast<double>(k) / (count - 1);
  }
  return out;
}

ProcessingFit fit_processing_path(const PlannerConfig& config, const DataPolygon& input) {
  input.validate();
  std::size_t removed = 0;
  DataPolygon polygon = collapse_duplicates(input, &removed);
  if (removed > 0) logger().warn("dropped {} repeated input point(s)", removed);
  polygon.validate();
  ParameterTable params = chord_length_parameters(polygon, 0.0, polygon.length());
  const int m = config.fit_control_points_for(polygon.points.size());
  CurveFit fit = fit_least_squares(polygon, params, config.fit_degree, m);
  logger().info("fitted degree {} spline with {} control points to {} points (max error {:.3g} m)",
               config.fit_degree, m, polygon.points.size(), fit.max_error);
  return {std::move(polygon), removed, std::move(params), std::move(fit)};
}

NormalField make_normal_field(const PlannerConfig& config, const DataPolygon* polygon,
                              const ParameterTable* params) {
  if (config.normal_mode == NormalMode::kConstant) {
    return NormalField::constant(config.constant_normal);
  }
  if (polygon == nullptr || params == nullptr || polygon->normals.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "normals.mode 'per_point' needs nx,ny,nz for every input point");
  }
  return NormalField::per_point(params->sigma, polygon->normals);
}

ProfileExtremes profile_extremes(const ScalarProfile& profile, double rate_hz) {
  ProfileExtremes out;
  const double total = profile.duration();
  const auto steps = static_cast<std::size_t>(std::ceil(total * rate_hz));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(static_cast<double>(k) / rate_hz, total);
    const ProfileState s = eval_profile(profile, t);
    out.max_velocity = std::max(out.max_velocity, std::abs(s.velocity));
    out.max_acceleration = std::max(out.max_acceleration, std::abs(s.acceleration));
    out.max_jerk = std::max(out.max_jerk, std::abs(s.jerk));
  }
  return out;
}

double max_lever_arm(std::span<const ProcessFrameSample> frames, const SetupConfig& setup) {
  double lever = 0.0;
  for (const auto& f : frames) lever = std::max(lever, (f.position - setup.mount_position).norm());
  return lever;
}

TrajectoryMetrics measure_trajectory(std::span<const TrajectorySample> samples,
                                     const FixedTcpPath& path, const ScalarProfile& profile,
                                     double rate_hz) {
  TrajectoryMetrics m;
  m.samples = samples.size();
  if (samples.empty()) return m;
  const SetupConfig& setup = path.setup();
  const double v_max = profile.limits().v_max;
  for (const auto& s : samples) {
    const ProcessFrameSample f = path.frame(std::clamp(s.sigma, 0.0, path.length()));
    const Mat3 ee = taitbryan_to_rotation(TaitBryanAngles::from(s.pose.tail<3>()));
    const PartPose part = part_pose_from_end_effector(s.pose.head<3>(), ee, setup);
    const Vec3 contact = part.position + part.rotation * f.position;
    m.position_drift = std::max(m.position_drift, (contact - setup.tool_position).norm());
    m.orientation_drift = std::max(
        m.orientation_drift, geodesic_angle(part.rotation * f.rotation, setup.tool_rotation));
    m.max_ee_speed = std::max(m.max_ee_speed, s.velocity.head<3>().norm());
    if (s.t > profile.cruise_begin() && s.t < profile.cruise_end()) {
      ++m.cruise_samples;
      m.tcp_speed_error = std::max(m.tcp_speed_error, std::abs(s.tcp_velocity.norm() - v_max));
    }
  }
  for (const TrajectorySample* s : {&samples.front(), &samples.back()}) {
    m.boundary_max = std::max({m.boundary_max, s->velocity.cwiseAbs().maxCoeff(),
                               s->acceleration.cwiseAbs().maxCoeff(), s->omega.cwiseAbs().maxCoeff(),
                               s->alpha.cwiseAbs().maxCoeff(),
                               s->tcp_velocity.cwiseAbs().maxCoeff()});
  }
  // The closing sample at t = T may sit arbitrarily close to the last grid
  // point, so short intervals are left out of the jerk estimate.
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double dt = samples[k].t - samples[k - 1].t;
    if (dt < 0.5 / rate_hz) continue;
    const Vec3 da = samples[k].acceleration.head<3>() - samples[k - 1].acceleration.head<3>();
    m.jerk_proxy = std::max(m.jerk_proxy, da.norm() / dt);
  }
  return m;
}

void grid_chain_rule_errors(std::span<const TrajectorySample> samples, double rate_hz,
                            TrajectoryMetrics& m) {
  const double h = 1.0 / rate_hz;
  double err[4] = {0, 0, 0, 0};
  double scale[4] = {0, 0, 0, 0};
  for (const auto& s : samples) {
    scale[0] = std::max(scale[0], s.velocity.head<3>().norm());
    scale[1] = std::max(scale[1], s.velocity.tail<3>().norm());
    scale[2] = std::max(scale[2], s.acceleration.head<3>().norm());
    scale[3] = std::max(scale[3], s.acceleration.tail<3>().norm());
  }
  for (std::size_t k = 2; k + 2 < samples.size(); ++k) {
    if (std::abs(samples[k + 2].t - samples[k - 2].t - 4.0 * h) > 1e-9 * h) continue;
    auto stencil = [&](auto field) -> Vec6 {
      return (field(samples[k - 2]) - 8.0 * field(samples[k - 1]) + 8.0 * field(samples[k + 1]) -
              field(samples[k + 2])) / (12.0 * h);
    };
    const Vec6 dv = stencil([](const TrajectorySample& s) { return s.pose; }) - samples[k].velocity;
    const Vec6 da =
        stencil([](const TrajectorySample& s) { return s.velocity; }) - samples[k].acceleration;
    err[0] = std::max(err[0], dv.head<3>().norm());
    err[1] = std::max(err[1], dv.tail<3>().norm());
    err[2] = std::max(err[2], da.head<3>().norm());
    err[3] = std::max(err[3], da.tail<3>().norm());
  }
  m.chain_velocity_position = relative(err[0], scale[0]);
  m.chain_velocity_angle = relative(err[1], scale[1]);
  m.chain_acceleration_position = relative(err[2], scale[2]);
  m.chain_acceleration_angle = relative(err[3], scale[3]);
}

void set_drift_bounds(TrajectoryMetrics& m, const PlannerConfig& config, double lever_arm) {
  const Tolerances& tol = config.tolerances;
  if (config.smoothing) {
    m.position_bound = tol.pose_fit_position_m + tol.pose_fit_angle_rad * lever_arm;
    m.orientation_bound = tol.pose_fit_angle_rad;
  } else {
    m.position_bound = tol.fixed_tcp_position_m;
    m.orientation_bound = tol.fixed_tcp_orientation_rad;
  }
}

void trajectory_checks(const TrajectoryMetrics& m, const PlannerConfig& config,
                       std::vector<Check>& checks, bool grid) {
  const Tolerances& tol = config.tolerances;
  add_check(checks, "trajectory_fixed_tcp_position_m", m.position_drift, m.position_bound);
  add_check(checks, "trajectory_fixed_tcp_orientation_rad", m.orientation_drift,
            m.orientation_bound);
  if (config.speed_frame == SpeedFrame::kTcp) {
    add_check(checks, "tcp_cruise_speed_error_m_s", m.tcp_speed_error, tol.tcp_speed_m_s);
  } else {
    add_check(checks, "end_effector_speed_m_s", m.max_ee_speed,
              config.limits.v_max + tol.ee_speed_m_s);
  }
  add_check(checks, "rest_boundaries", m.boundary_max, 0.0);
  const std::string prefix = grid ? "grid_" : "";
  const double limit = grid ? tol.grid_chain_rule_relative : tol.chain_rule_relative;
  add_check(checks, prefix + "chain_rule_velocity_relative",
            std::max(m.chain_velocity_position, m.chain_velocity_angle), limit);
  add_check(checks, prefix + "chain_rule_acceleration_relative",
            std::max(m.chain_acceleration_position, m.chain_acceleration_angle), limit);
}

json PipelineReport::to_json() const {
  json j;
  j["input"] = {{"points", input_points}, {"duplicates_removed", duplicates_removed}};
  j["fit"] = {{"degree", fit_degree},
              {"control_points", fit_control_points},
              {"rms_error_m", fit_rms_error},
              {"max_error_m", fit_max_error}};
  j["path"] = {{"length_m", path_length},
               {"speed_frame", speed_frame == SpeedFrame::kTcp ? "tcp" : "end_effector"},
               {"fixed_tcp_position_drift_m", path_drift.max_position_drift},
               {"fixed_tcp_orientation_drift_rad", path_drift.max_orientation_drift},
               {"lever_arm_m", lever_arm}};
  j["cusps"] = {{"processing_path", cusps_json(processing_cusps)},
                {"robot_path", cusps_json(robot_cusps)}};
  j["smoothing"] = {{"enabled", smoothing}};
  if (smoothing) {
    j["smoothing"]["degree"] = smoothing_degree;
    j["smoothing"]["control_points"] = smoothing_control_points;
    j["smoothing"]["max_position_deviation_m"] = pose_fit.max_position_deviation;
    j["smoothing"]["max_angle_deviation_rad"] = pose_fit.max_angle_deviation;
    j["smoothing"]["held_out_position_deviation_m"] = pose_held_out.max_position_deviation;
    j["smoothing"]["held_out_angle_deviation_rad"] = pose_held_out.max_angle_deviation;
  }
  j["profile"] = {{"duration_s", duration},
                  {"cruise_begin_s", cruise_begin},
                  {"cruise_end_s", cruise_end},
                  {"max_velocity", profile.max_velocity},
                  {"max_acceleration", profile.max_acceleration},
                  {"max_jerk", profile.max_jerk}};
  const TrajectoryMetrics& t = trajectory;
  j["trajectory"] = {{"samples", t.samples},
                     {"fixed_tcp_position_drift_m", t.position_drift},
                     {"fixed_tcp_orientation_drift_rad", t.orientation_drift},
                     {"position_drift_bound_m", t.position_bound},
                     {"orientation_drift_bound_rad", t.orientation_bound},
                     {"cruise_samples", t.cruise_samples},
                     {"tcp_cruise_speed_error_m_s", t.tcp_speed_error},
                     {"max_end_effector_speed_m_s", t.max_ee_speed},
                     {"boundary_max", t.boundary_max},
                     {"jerk_proxy_m_s3", t.jerk_proxy},
                     {"chain_rule",
                      {{"velocity_position", t.chain_velocity_position},
                       {"velocity_angle", t.chain_velocity_angle},
                       {"acceleration_position", t.chain_acceleration_position},
                       {"acceleration_angle", t.chain_acceleration_angle}}}};
  json cs = json::array();
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
  }
  j["checks"] = std::move(cs);
  j["pass"] = pass;
  return j;
}

PipelineResult run_pipeline(const PlannerConfig& config, const DataPolygon& input) {
  PipelineResult r;
  r.config = config;
  PipelineReport& rep = r.report;
  const Tolerances& tol = config.tolerances;

  r.processing = in_stage("fit", [&] { return fit_processing_path(config, input); });
  rep.input_points = input.points.size();
  rep.duplicates_removed = r.processing->duplicates_removed;
  rep.fit_degree = r.processing->fit.curve.degree();
  rep.fit_control_points = static_cast<int>(r.processing->fit.curve.control_points().size());
  rep.fit_rms_error = r.processing->fit.rms_error;
  rep.fit_max_error = r.processing->fit.max_error;

  const std::vector<double> sigma = in_stage("frames", [&] {
    r.path = std::make_unique<FixedTcpPath>(
        r.processing->fit.curve,
        make_normal_field(config, &r.processing->polygon, &r.processing->params), config.setup,
        config.speed_frame, config.arc_length_samples);
    std::vector<double> s = sigma_samples(r.path->length(), config.path_samples);
    r.frames.reserve(s.size());
    for (double v : s) r.frames.push_back(r.path->frame(v));
    return s;
  });
  rep.path_length = r.path->length();
  rep.speed_frame = config.speed_frame;

  in_stage("transform", [&] {
    r.robot.reserve(r.frames.size());
    for (const auto& f : r.frames) r.robot.push_back(robot_pose(f, config.setup));
    rep.path_drift = verify_fixed_tcp(r.frames, r.robot, config.setup);
    rep.lever_arm = max_lever_arm(r.frames, config.setup);
    const double threshold = config.cusp_threshold_deg * std::numbers::pi / 180.0;
    std::vector<Vec3> pts(r.frames.size());
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = r.frames[k].position;
    rep.processing_cusps = detect_cusps(sigma, pts, threshold);
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = r.robot[k].position;
    rep.robot_cusps = detect_cusps(sigma, pts, threshold);
    return 0;
  });
  logger().info("path length {:.6g} m, fixed-TCP drift {:.3g} m, {} robot-path cusp(s)",
               rep.path_length, rep.path_drift.max_position_drift, rep.robot_cusps.size());

  rep.smoothing = config.smoothing;
  in_stage("smoothing", [&] {
    if (!config.smoothing) {
      r.pose_path = std::make_unique<ExactPosePath>(*r.path, config.path_samples);
      return 0;
    }
    rep.smoothing_degree = config.smoothing_degree;
    rep.smoothing_control_points = config.smoothing_control_points_value();
    r.smoothed = fit_pose_splines(r.robot, rep.smoothing_degree, rep.smoothing_control_points);
    rep.pose_fit = r.smoothed->report;
    for (std::size_t k = 0; k + 1 < sigma.size(); ++k) {
      const double mid = 0.5 * (sigma[k] + sigma[k + 1]);
      const RobotPathSample exact = r.path->robot(mid);
      const PoseDerivatives fit = r.smoothed->splines.evaluate(mid);
      const Mat3 rot = taitbryan_to_rotation(TaitBryanAngles::from(fit.z.tail<3>()));
      rep.pose_held_out.max_position_deviation = std::max(
          rep.pose_held_out.max_position_deviation, (fit.z.head<3>() - exact.position).norm());
      rep.pose_held_out.max_angle_deviation =
          std::max(rep.pose_held_out.max_angle_deviation, geodesic_angle(rot, exact.rotation));
    }
    r.pose_path = std::make_unique<PoseSplines>(r.smoothed->splines);
    return 0;
  });

  r.profile = in_stage("profile", [&] { return plan_profile(r.path->length(), config.limits); });
  rep.duration = r.profile->duration();
  rep.cruise_begin = r.profile->cruise_begin();
  rep.cruise_end = r.profile->cruise_end();

  r.trajectory = in_stage("sampling", [&] {
    return sample_trajectory(*r.pose_path, *r.profile, config.output_rate_hz, r.path.get());
  });
  logger().info("sampled {} poses over {:.6g} s", r.trajectory.size(), rep.duration);

  in_stage("validation", [&] {
    rep.profile = profile_extremes(*r.profile, 10'000.0);
    rep.trajectory = measure_trajectory(r.trajectory, *r.path, *r.profile, config.output_rate_hz);
    chain_rule_errors(*r.pose_path, *r.profile, r.trajectory, rep.trajectory);
    set_drift_bounds(rep.trajectory, config, rep.lever_arm);

    auto& checks = rep.checks;
    add_check(checks, "path_fixed_tcp_position_m", rep.path_drift.max_position_drift,
              tol.fixed_tcp_position_m);
    add_check(checks, "path_fixed_tcp_orientation_rad", rep.path_drift.max_orientation_drift,
              tol.fixed_tcp_orientation_rad);
    if (config.smoothing) {
      add_check(checks, "pose_fit_position_m",
                std::max(rep.pose_fit.max_position_deviation,
                         rep.pose_held_out.max_position_deviation),
                tol.pose_fit_position_m);
      add_check(checks, "pose_fit_angle_rad",
                std::max(rep.pose_fit.max_angle_deviation, rep.pose_held_out.max_angle_deviation),
                tol.pose_fit_angle_rad);
    }
    add_check(checks, "profile_velocity", rep.profile.max_velocity,
              config.limits.v_max + tol.limit_slack);
    add_check(checks, "profile_acceleration", rep.profile.max_acceleration,
              config.limits.a_max + tol.limit_slack);
    add_check(checks, "profile_jerk", rep.profile.max_jerk,
              config.limits.j_max + tol.limit_slack);
    trajectory_checks(rep.trajectory, config, checks);
    rep.pass = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    for (const auto& c : checks) {
      if (!c.pass) logger().warn("check {} failed: {:.6g} > {:.6g}", c.name, c.value, c.limit);
    }
    return 0;
  });
  return r;
}

void write_outputs(const PipelineResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  }
  write_text(dir / "trajectory.csv", trajectory_csv(result.trajectory));
  write_text(dir / "report.json", result.report.to_json().dump(2) + "\n");
  write_text(dir / "processing_spline.json",
             curve_to_json(result.processing->fit.curve).dump(2) + "\n");
  write_text(dir / "frames.csv", frames_csv(result.frames));
  write_text(dir / "robot_path.csv", robot_path_csv(result.robot));
  if (result.profile) {
    write_text(dir / "profile.csv", profile_csv(*result.profile, result.config.output_rate_hz));
  }
}

}  // namespace ftcp

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "ftcp/config.hpp"
#include "ftcp/errors.hpp"
#include "ftcp/io.hpp"
#include "ftcp/pipeline.hpp"
#include "ftcp/test_parts.hpp"

namespace fs = std::filesystem;
using namespace ftcp;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitInput = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("ftcp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PLANNER_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("PLANNER_LOG='{}' is not a log level; keeping 'warn'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

PlannerConfig config_or_default(const std::string& path) {
  return path.empty() ? PlannerConfig{} : load_config(path);
}

int print_checks(const std::vector<Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    fmt::print("{} {} = {:.6g} (limit {:.6g})\n", c.pass ? "PASS" : "FAIL", c.name, c.value,
               c.limit);
    ok = ok && c.pass;
  }
  return ok ? kExitPass : kExitTolerance;
}

// Points and their chord parameters, needed only for per-point normals.
struct PointContext {
  DataPolygon polygon;
  ParameterTable params;
};

std::optional<PointContext> load_points(const std::string& path) {
  if (path.empty()) return std::nullopt;
  PointContext ctx;
  ctx.polygon = collapse_duplicates(read_polygon(path));
  ctx.polygon.validate();
  ctx.params = chord_length_parameters(ctx.polygon, 0.0, ctx.polygon.length());
  return ctx;
}

FixedTcpPath build_path(const PlannerConfig& config, const std::string& spline_path,
                        const std::string& points_path) {
  const auto points = load_points(points_path);
  NormalField normals = make_normal_field(config, points ? &points->polygon : nullptr,
                                          points ? &points->params : nullptr);
  return FixedTcpPath(read_curve(spline_path), std::move(normals), config.setup,
                      config.speed_frame, config.arc_length_samples);
}

int cmd_fit(const std::string& config_path, const std::string& input, const fs::path& out) {
  const PlannerConfig config = config_or_default(config_path);
  const ProcessingFit pf = fit_processing_path(config, read_polygon(input));
  fs::create_directories(out);
  write_text(out / "processing_spline.json", curve_to_json(pf.fit.curve).dump(2) + "\n");
  fmt::print("points {} control_points {} rms_error_m {:.6g} max_error_m {:.6g}\n",
             pf.polygon.points.size(), pf.fit.curve.control_points().size(), pf.fit.rms_error,
             pf.fit.max_error);
  return kExitPass;
}

int cmd_frames(const std::string& config_path, const std::string& spline,
               const std::string& points, const fs::path& out) {
  const PlannerConfig config = config_or_default(config_path);
  const FixedTcpPath path = build_path(config, spline, points);
  std::vector<ProcessFrameSample> frames;
  for (double s : sigma_samples(path.length(), config.path_samples)) frames.push_back(path.frame(s));
  fs::create_directories(out);
  write_text(out / "frames.csv", frames_csv(frames));
  fmt::print("frames {} length_m {:.9g}\n", frames.size(), path.length());
  return kExitPass;
}

int cmd_transform(const std::string& config_path, const std::string& spline,
                  const std::string& points, const fs::path& out) {
  const PlannerConfig config = config_or_default(config_path);
  const FixedTcpPath path = build_path(config, spline, points);
  std::vector<ProcessFrameSample> frames;
  std::vector<RobotPathSample> robot;
  for (double s : sigma_samples(path.length(), config.path_samples)) {
    frames.push_back(path.frame(s));
    robot.push_back(robot_pose(frames.back(), config.setup));
  }
  fs::create_directories(out);
  write_text(out / "robot_path.csv", robot_path_csv(robot));
  const FixedTcpReport rep = verify_fixed_tcp(frames, robot, config.setup);
  return print_checks(
      {{"path_fixed_tcp_position_m", rep.max_position_drift,
        config.tolerances.fixed_tcp_position_m,
        rep.max_position_drift <= config.tolerances.fixed_tcp_position_m},
       {"path_fixed_tcp_orientation_rad", rep.max_orientation_drift,
        config.tolerances.fixed_tcp_orientation_rad,
        rep.max_orientation_drift <= config.tolerances.fixed_tcp_orientation_rad}});
}

int cmd_plan(const std::string& config_path, const std::string& input, const fs::path& out) {
  const PlannerConfig config = config_or_default(config_path);
  const PipelineResult result = run_pipeline(config, read_polygon(input));
  write_outputs(result, out);
  return print_checks(result.report.checks);
}

int cmd_validate(const std::string& config_path, const std::string& spline,
                 const std::string& points, const std::string& trajectory,
                 const std::string& out) {
  const PlannerConfig config = config_or_default(config_path);
  const FixedTcpPath path = build_path(config, spline, points);
  const ScalarProfile profile = plan_profile(path.length(), config.limits);
  std::vector<TrajectorySample> samples = parse_trajectory_csv(read_text(trajectory));
  if (samples.size() < 2) throw Error(ErrorCode::kInvalidArgument, "trajectory has < 2 rows");
  for (auto& s : samples) s.sigma = eval_profile(profile, s.t).position;
  if (std::abs(samples.back().t - profile.duration()) > 1e-9 * std::max(1.0, profile.duration())) {
    throw Error(ErrorCode::kDomainMismatch,
                fmt::format("trajectory ends at t = {} but the profile lasts {} s",
                            samples.back().t, profile.duration()));
  }
  std::vector<ProcessFrameSample> frames;
  for (double s : sigma_samples(path.length(), config.path_samples)) frames.push_back(path.frame(s));

  TrajectoryMetrics m = measure_trajectory(samples, path, profile, config.output_rate_hz);
  grid_chain_rule_errors(samples, config.output_rate_hz, m);
  set_drift_bounds(m, config, max_lever_arm(frames, config.setup));
  std::vector<Check> checks;
  trajectory_checks(m, config, checks, true);
  if (!out.empty()) {
    nlohmann::json j;
    j["samples"] = m.samples;
    j["fixed_tcp_position_drift_m"] = m.position_drift;
    j["fixed_tcp_orientation_drift_rad"] = m.orientation_drift;
    j["tcp_cruise_speed_error_m_s"] = m.tcp_speed_error;
    j["max_end_effector_speed_m_s"] = m.max_ee_speed;
    j["jerk_proxy_m_s3"] = m.jerk_proxy;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) {
      cs.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
    }
    j["checks"] = std::move(cs);
    write_text(out, j.dump(2) + "\n");
  }
  return print_checks(checks);
}

int cmd_part(double width, double height, double radius, int count, double noise,
             std::uint64_t seed, const fs::path& out) {
  std::vector<Vec3> pts = rounded_rectangle(width, height, radius, count);
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, noise);
    // The closing point keeps matching the first one.
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      pts[k].x() += dist(rng);
      pts[k].y() += dist(rng);
    }
    pts.back() = pts.front();
  }
  std::string csv = "x,y,z\n";
  for (const auto& p : pts) csv += fmt::format("{},{},{}\n", p.x(), p.y(), p.z());
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, csv);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Fixed-TCP trajectory planner"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Seed for randomized utilities (part --noise)");

  std::string config, input, spline, points, out;
  auto common = [&](CLI::App* sub) { sub->add_option("--config", config, "JSON config")->check(CLI::ExistingFile); };

  auto* fit = app.add_subcommand("fit", "Fit the processing spline to input points");
  common(fit);
  fit->add_option("--input", input, "Points (.csv or .json)")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", out, "Output directory")->required();

  auto* frames = app.add_subcommand("frames", "Sample process frames along a spline");
  common(frames);
  frames->add_option("--spline", spline, "Spline JSON")->required()->check(CLI::ExistingFile);
  frames->add_option("--points", points, "Points with normals (per_point mode)")->check(CLI::ExistingFile);
  frames->add_option("--out", out, "Output directory")->required();

  auto* transform = app.add_subcommand("transform", "Map a spline to the robot path");
  common(transform);
  transform->add_option("--spline", spline, "Spline JSON")->required()->check(CLI::ExistingFile);
  transform->add_option("--points", points, "Points with normals (per_point mode)")->check(CLI::ExistingFile);
  transform->add_option("--out", out, "Output directory")->required();

  auto* plan = app.add_subcommand("plan", "Run the full pipeline");
  common(plan);
  plan->add_option("--input", input, "Points (.csv or .json)")->required()->check(CLI::ExistingFile);
  plan->add_option("--out", out, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Recheck an existing trajectory");
  common(validate);
  validate->add_option("--input", input, "trajectory.csv")->required()->check(CLI::ExistingFile);
  validate->add_option("--spline", spline, "Processing spline JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--points", points, "Points with normals (per_point mode)")->check(CLI::ExistingFile);
  validate->add_option("--out", out, "Write the validation summary to this JSON file");

  double width = 0.13, height = 0.08, radius = 0.01, noise = 0.0;
  int count = 401;
  auto* part = app.add_subcommand("part", "Write a rounded-rectangle test part as CSV");
  part->add_option("--width", width, "m")->check(CLI::PositiveNumber);
  part->add_option("--height", height, "m")->check(CLI::PositiveNumber);
  part->add_option("--radius", radius, "Corner radius, m")->check(CLI::NonNegativeNumber);
  part->add_option("--count", count, "Number of points")->check(CLI::Range(3, 10'000'000));
  part->add_option("--noise", noise, "Std. deviation of in-plane noise, m")->check(CLI::NonNegativeNumber);
  part->add_option("--out", out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(config, input, out);
    if (*frames) return cmd_frames(config, spline, points, out);
    if (*transform) return cmd_transform(config, spline, points, out);
    if (*plan) return cmd_plan(config, input, out);
    if (*validate) return cmd_validate(config, spline, points, input, out);
    if (*part) return cmd_part(width, height, radius, count, noise, seed, out);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}

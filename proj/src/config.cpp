#include "ftcp/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "ftcp/errors.hpp"
#include "ftcp/frames.hpp"

namespace ftcp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorCode::kInvalidConfig, msg);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) fail(fmt::format("{} must be an object", where));
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail(fmt::format("unknown key '{}' in {}", item.key(), where));
    }
  }
}

double number(const json& j, std::string_view where) {
  if (!j.is_number()) fail(fmt::format("{} must be a number", where));
  return j.get<double>();
}

double positive(const json& j, std::string_view where) {
  const double v = number(j, where);
  if (!(v > 0.0)) fail(fmt::format("{} must be positive", where));
  return v;
}

int integer(const json& j, std::string_view where, int min_value) {
  if (!j.is_number_integer()) fail(fmt::format("{} must be an integer", where));
  const auto v = j.get<long long>();
  if (v < min_value || v > 100'000'000) {
    fail(fmt::format("{} must be an integer >= {}", where, min_value));
  }
  return static_cast<int>(v);
}

bool boolean(const json& j, std::string_view where) {
  if (!j.is_boolean()) fail(fmt::format("{} must be true or false", where));
  return j.get<bool>();
}

Vec3 vec3(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 3) fail(fmt::format("{} must be [x, y, z]", where));
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json rotation_json(const Mat3& r) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({r(i, 0), r(i, 1), r(i, 2)}));
  return rows;
}

}  // namespace

Mat3 rotation_from_json(const json& j) {
  Mat3 r;
  if (j.is_object()) {
    check_keys(j, {"tait_bryan_xyz"}, "rotation");
    if (!j.contains("tait_bryan_xyz")) fail("rotation object needs tait_bryan_xyz");
    r = taitbryan_to_rotation(TaitBryanAngles::from(vec3(j["tait_bryan_xyz"], "tait_bryan_xyz")));
  } else if (j.is_array() && j.size() == 3) {
    for (int i = 0; i < 3; ++i) r.row(i) = vec3(j[static_cast<std::size_t>(i)], "rotation row").transpose();
  } else {
    fail("rotation must be three rows or {\"tait_bryan_xyz\": [...]}");
  }
  if (!is_rotation(r)) fail("rotation matrix is not orthonormal with det 1 (tolerance 1e-9)");
  return r;
}

PlannerConfig PlannerConfig::from_json(const json& j) {
  PlannerConfig c;
  check_keys(j,
             {"fit", "normals", "setup", "path_samples", "arc_length_samples", "speed_frame",
              "limits", "smoothing", "output_rate_hz", "cusp_threshold_deg", "tolerances"},
             "config");
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f, {"degree", "control_points"}, "fit");
    if (f.contains("degree")) c.fit_degree = integer(f["degree"], "fit.degree", 1);
    if (f.contains("control_points")) {
      c.fit_control_points = integer(f["control_points"], "fit.control_points", 2);
    }
  }
  if (j.contains("normals")) {
    const json& n = j["normals"];
    check_keys(n, {"mode", "vector"}, "normals");
    if (n.contains("mode") && !n["mode"].is_string()) fail("normals.mode must be a string");
    const std::string mode = n.value("mode", "constant");
    if (mode == "constant") {
      c.normal_mode = NormalMode::kConstant;
      if (n.contains("vector")) c.constant_normal = vec3(n["vector"], "normals.vector");
      if (!(c.constant_normal.norm() > 0.0)) fail("normals.vector must be non-zero");
    } else if (mode == "per_point") {
      c.normal_mode = NormalMode::kPerPoint;
      if (n.contains("vector")) fail("normals.vector only applies to mode 'constant'");
    } else {
      fail(fmt::format("normals.mode '{}' is not 'constant' or 'per_point'", mode));
    }
  }
  if (j.contains("setup")) {
    const json& s = j["setup"];
    check_keys(s, {"mount_position", "mount_rotation", "tool_position", "tool_rotation"}, "setup");
    if (s.contains("mount_position")) c.setup.mount_position = vec3(s["mount_position"], "setup.mount_position");
    if (s.contains("mount_rotation")) c.setup.mount_rotation = rotation_from_json(s["mount_rotation"]);
    if (s.contains("tool_position")) c.setup.tool_position = vec3(s["tool_position"], "setup.tool_position");
    if (s.contains("tool_rotation")) c.setup.tool_rotation = rotation_from_json(s["tool_rotation"]);
  }
  if (j.contains("path_samples")) c.path_samples = integer(j["path_samples"], "path_samples", 3);
  if (j.contains("arc_length_samples")) {
    c.arc_length_samples = integer(j["arc_length_samples"], "arc_length_samples", 2);
  }
  if (j.contains("speed_frame")) {
    if (!j["speed_frame"].is_string()) fail("speed_frame must be a string");
    const auto sf = j["speed_frame"].get<std::string>();
    if (sf == "tcp") {
      c.speed_frame = SpeedFrame::kTcp;
    } else if (sf == "end_effector") {
      c.speed_frame = SpeedFrame::kEndEffector;
    } else {
      fail(fmt::format("speed_frame '{}' is not 'tcp' or 'end_effector'", sf));
    }
  }
  if (j.contains("limits")) {
    const json& l = j["limits"];
    check_keys(l, {"v_max", "a_max", "j_max"}, "limits");
    if (l.contains("v_max")) c.limits.v_max = positive(l["v_max"], "limits.v_max");
    if (l.contains("a_max")) c.limits.a_max = positive(l["a_max"], "limits.a_max");
    if (l.contains("j_max")) c.limits.j_max = positive(l["j_max"], "limits.j_max");
  }
  if (j.contains("smoothing")) {
    const json& s = j["smoothing"];
    check_keys(s, {"enabled", "degree", "control_points"}, "smoothing");
    if (s.contains("enabled")) c.smoothing = boolean(s["enabled"], "smoothing.enabled");
    if (s.contains("degree")) c.smoothing_degree = integer(s["degree"], "smoothing.degree", 2);
    if (s.contains("control_points")) {
      c.smoothing_control_points = integer(s["control_points"], "smoothing.control_points", 3);
    }
  }
  if (j.contains("output_rate_hz")) c.output_rate_hz = positive(j["output_rate_hz"], "output_rate_hz");
  if (j.contains("cusp_threshold_deg")) {
    c.cusp_threshold_deg = positive(j["cusp_threshold_deg"], "cusp_threshold_deg");
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t,
               {"fixed_tcp_position_m", "fixed_tcp_orientation_rad", "pose_fit_position_m",
                "pose_fit_angle_rad", "tcp_speed_m_s", "ee_speed_m_s", "limit_slack",
                "chain_rule_relative", "grid_chain_rule_relative"},
               "tolerances");
    auto read = [&](const char* key, double& field) {
      if (t.contains(key)) field = positive(t[key], fmt::format("tolerances.{}", key));
    };
    read("fixed_tcp_position_m", c.tolerances.fixed_tcp_position_m);
    read("fixed_tcp_orientation_rad", c.tolerances.fixed_tcp_orientation_rad);
    read("pose_fit_position_m", c.tolerances.pose_fit_position_m);
    read("pose_fit_angle_rad", c.tolerances.pose_fit_angle_rad);
    read("tcp_speed_m_s", c.tolerances.tcp_speed_m_s);
    read("ee_speed_m_s", c.tolerances.ee_speed_m_s);
    read("limit_slack", c.tolerances.limit_slack);
    read("chain_rule_relative", c.tolerances.chain_rule_relative);
    read("grid_chain_rule_relative", c.tolerances.grid_chain_rule_relative);
  }
  if (c.smoothing_degree >= c.path_samples) fail("smoothing.degree must be below path_samples");
  return c;
}

json PlannerConfig::to_json() const {
  json j;
  j["fit"]["degree"] = fit_degree;
  if (fit_control_points) j["fit"]["control_points"] = *fit_control_points;
  if (normal_mode == NormalMode::kConstant) {
    j["normals"] = {{"mode", "constant"}, {"vector", vec3_json(constant_normal)}};
  } else {
    j["normals"] = {{"mode", "per_point"}};
  }
  j["setup"] = {{"mount_position", vec3_json(setup.mount_position)},
                {"mount_rotation", rotation_json(setup.mount_rotation)},
                {"tool_position", vec3_json(setup.tool_position)},
                {"tool_rotation", rotation_json(setup.tool_rotation)}};
  j["path_samples"] = path_samples;
  j["arc_length_samples"] = arc_length_samples;
  j["speed_frame"] = speed_frame == SpeedFrame::kTcp ? "tcp" : "end_effector";
  j["limits"] = {{"v_max", limits.v_max}, {"a_max", limits.a_max}, {"j_max", limits.j_max}};
  j["smoothing"] = {{"enabled", smoothing}, {"degree", smoothing_degree}};
  if (smoothing_control_points) j["smoothing"]["control_points"] = *smoothing_control_points;
  j["output_rate_hz"] = output_rate_hz;
  j["cusp_threshold_deg"] = cusp_threshold_deg;
  j["tolerances"] = {{"fixed_tcp_position_m", tolerances.fixed_tcp_position_m},
                     {"fixed_tcp_orientation_rad", tolerances.fixed_tcp_orientation_rad},
                     {"pose_fit_position_m", tolerances.pose_fit_position_m},
                     {"pose_fit_angle_rad", tolerances.pose_fit_angle_rad},
                     {"tcp_speed_m_s", tolerances.tcp_speed_m_s},
                     {"ee_speed_m_s", tolerances.ee_speed_m_s},
                     {"limit_slack", tolerances.limit_slack},
                     {"chain_rule_relative", tolerances.chain_rule_relative},
                     {"grid_chain_rule_relative", tolerances.grid_chain_rule_relative}};
  return j;
}

int PlannerConfig::fit_control_points_for(std::size_t num_points) const {
  if (fit_control_points) return *fit_control_points;
  return std::max(fit_degree + 1, static_cast<int>(num_points / 4));
}

int PlannerConfig::smoothing_control_points_value() const {
  if (smoothing_control_points) return *smoothing_control_points;
  return std::max(smoothing_degree + 1, path_samples / 4);
}

PlannerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot open config '{}'", path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("'{}': {}", path, e.what()));
  }
  return PlannerConfig::from_json(j);
}

}  // namespace ftcp

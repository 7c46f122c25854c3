#include "ftcp/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "ftcp/errors.hpp"

namespace ftcp {

using nlohmann::json;

namespace {

[[noreturn]] void bad_input(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || s.empty()) {
    bad_input(fmt::format("line {}: '{}' is not a number", line_no, s));
  }
  return v;
}

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::string_view rest(text);
  std::size_t no = 0;
  while (!rest.empty()) {
    ++no;
    const auto pos = rest.find('\n');
    const std::string_view line = trim(rest.substr(0, pos));
    if (!line.empty()) out.emplace_back(no, line);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return out;
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += fmt::format("{}", v);
    first = false;
  }
  out += '\n';
}

const std::vector<std::string> kPolygonColumns = {"x", "y", "z", "nx", "ny", "nz", "w"};

const std::vector<std::string> kTrajectoryColumns = {
    "t",         "x",           "y",           "z",           "alpha",    "beta",
    "gamma",     "vx",          "vy",          "vz",          "dalpha",   "dbeta",
    "dgamma",    "ax",          "ay",          "az",          "ddalpha",  "ddbeta",
    "ddgamma",   "omega_x",     "omega_y",     "omega_z",     "alpha_ang_x",
    "alpha_ang_y", "alpha_ang_z", "vtcp_x",    "vtcp_y",      "vtcp_z"};

void add_polygon_row(DataPolygon& poly, std::span<const double> v) {
  poly.points.emplace_back(v[0], v[1], v[2]);
  if (v.size() >= 6) poly.normals.emplace_back(v[3], v[4], v[5]);
  if (v.size() == 7) poly.weights.push_back(v[6]);
}

}  // namespace

DataPolygon parse_polygon_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) bad_input("empty point file");
  const auto header = split(lines.front().second);
  const std::size_t cols = header.size();
  if (cols != 3 && cols != 6 && cols != 7) {
    bad_input("header must be x,y,z or x,y,z,nx,ny,nz or x,y,z,nx,ny,nz,w");
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (header[c] != kPolygonColumns[c]) {
      bad_input(fmt::format("header column {} is '{}', expected '{}'", c + 1, header[c],
                            kPolygonColumns[c]));
    }
  }
  DataPolygon poly;
  std::vector<double> row(cols);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i].second);
    if (fields.size() != cols) {
      bad_input(fmt::format("line {}: expected {} fields, got {}", lines[i].first, cols,
                            fields.size()));
    }
    for (std::size_t c = 0; c < cols; ++c) row[c] = parse_double(fields[c], lines[i].first);
    add_polygon_row(poly, row);
  }
  poly.validate();
  return poly;
}

DataPolygon parse_polygon_json(const json& j) {
  if (!j.is_array()) bad_input("point JSON must be an array");
  DataPolygon poly;
  std::size_t cols = 0;
  std::vector<double> row;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& item = j[i];
    row.clear();
    if (item.is_array()) {
      for (const auto& v : item) {
        if (!v.is_number()) bad_input(fmt::format("point {}: non-numeric entry", i));
        row.push_back(v.get<double>());
      }
    } else if (item.is_object()) {
      for (const auto& key : kPolygonColumns) {
        if (!item.contains(key)) break;
        if (!item[key].is_number()) bad_input(fmt::format("point {}: '{}' is not a number", i, key));
        row.push_back(item[key].get<double>());
      }
      if (row.size() != item.size()) {
        bad_input(fmt::format("point {}: keys must be x,y,z[,nx,ny,nz[,w]]", i));
      }
    } else {
      bad_input(fmt::format("point {} is neither an array nor an object", i));
    }
    if (row.size() != 3 && row.size() != 6 && row.size() != 7) {
      bad_input(fmt::format("point {} has {} values", i, row.size()));
    }
    if (i == 0) cols = row.size();
    if (row.size() != cols) bad_input(fmt::format("point {} has a different layout", i));
    add_polygon_row(poly, row);
  }
  poly.validate();
  return poly;
}

DataPolygon read_polygon(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto ext = path.extension().string();
  if (ext == ".csv") return parse_polygon_csv(text);
  if (ext == ".json") {
    try {
      return parse_polygon_json(json::parse(text));
    } catch (const json::parse_error& e) {
      bad_input(fmt::format("'{}': {}", path.string(), e.what()));
    }
  }
  bad_input(fmt::format("'{}': expected a .csv or .json point file", path.string()));
}

json curve_to_json(const BSplineCurve& curve) {
  json j;
  j["degree"] = curve.degree();
  j["knots"] = json(std::vector<double>(curve.knots().knots().begin(),
                                        curve.knots().knots().end()));
  json ctrl = json::array();
  for (const auto& d : curve.control_points()) ctrl.push_back({d.x(), d.y(), d.z()});
  j["control_points"] = std::move(ctrl);
  return j;
}

BSplineCurve curve_from_json(const json& j) {
  if (!j.is_object() || !j.contains("degree") || !j.contains("knots") ||
      !j.contains("control_points") || j.size() != 3) {
    bad_input("spline JSON needs exactly degree, knots and control_points");
  }
  if (!j["degree"].is_number_integer()) bad_input("spline degree must be an integer");
  std::vector<double> knots;
  for (const auto& k : j["knots"]) {
    if (!k.is_number()) bad_input("knots must be numbers");
    knots.push_back(k.get<double>());
  }
  std::vector<Vec3> ctrl;
  for (const auto& c : j["control_points"]) {
    if (!c.is_array() || c.size() != 3 || !c[0].is_number() || !c[1].is_number() ||
        !c[2].is_number()) {
      bad_input("control points must be [x, y, z]");
    }
    ctrl.emplace_back(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  }
  return BSplineCurve(KnotVector(std::move(knots), j["degree"].get<int>()), std::move(ctrl));
}

BSplineCurve read_curve(const std::filesystem::path& path) {
  try {
    return curve_from_json(json::parse(read_text(path)));
  } catch (const json::parse_error& e) {
    bad_input(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::string frames_csv(std::span<const ProcessFrameSample> frames) {
  std::string out = "sigma,x,y,z,tx,ty,tz,nx,ny,nz,bx,by,bz\n";
  for (const auto& f : frames) {
    append_row(out, {f.sigma, f.position.x(), f.position.y(), f.position.z(), f.tangent.x(),
                     f.tangent.y(), f.tangent.z(), f.normal.x(), f.normal.y(), f.normal.z(),
                     f.binormal.x(), f.binormal.y(), f.binormal.z()});
  }
  return out;
}

std::string robot_path_csv(std::span<const RobotPathSample> path) {
  std::string out = "sigma,x,y,z,alpha,beta,gamma\n";
  std::vector<double> cols[3];
  for (auto& c : cols) c.reserve(path.size());
  for (const auto& s : path) {
    const Vec3 a = rotation_to_taitbryan(s.rotation).vector();
    for (int c = 0; c < 3; ++c) cols[c].push_back(a[c]);
  }
  for (auto& c : cols) unwrap_angles(c);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& s = path[k];
    append_row(out, {s.sigma, s.position.x(), s.position.y(), s.position.z(), cols[0][k],
                     cols[1][k], cols[2][k]});
  }
  return out;
}

std::string trajectory_csv(std::span<const TrajectorySample> samples) {
  std::string out;
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    if (c > 0) out += ',';
    out += kTrajectoryColumns[c];
  }
  out += '\n';
  for (const auto& s : samples) {
    out += fmt::format("{}", s.t);
    auto put = [&out](const auto& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format(",{}", v[i]);
    };
    put(s.pose);
    put(s.velocity);
    put(s.acceleration);
    put(s.omega);
    put(s.alpha);
    put(s.tcp_velocity);
    out += '\n';
  }
  return out;
}

std::string profile_csv(const ScalarProfile& profile, double rate_hz) {
  std::string out = "t,sigma,sigma_dot,sigma_ddot,sigma_dddot\n";
  const double total = profile.duration();
  const auto steps = static_cast<std::size_t>(std::floor(total * rate_hz));
  for (std::size_t k = 0; k <= steps + 1; ++k) {
    double t = std::min(static_cast<double>(k) / rate_hz, total);
    if (k == steps + 1 && !(static_cast<double>(steps) / rate_hz < total)) break;
    const ProfileState s = eval_profile(profile, t);
    append_row(out, {t, s.position, s.velocity, s.acceleration, s.jerk});
  }
  return out;
}

std::vector<TrajectorySample> parse_trajectory_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) bad_input("empty trajectory file");
  const auto header = split(lines.front().second);
  if (header.size() != kTrajectoryColumns.size()) bad_input("unexpected trajectory header");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != kTrajectoryColumns[c]) {
      bad_input(fmt::format("trajectory column {} is '{}', expected '{}'", c + 1, header[c],
                            kTrajectoryColumns[c]));
    }
  }
  std::vector<TrajectorySample> out;
  std::vector<double> v(kTrajectoryColumns.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i].second);
    if (fields.size() != v.size()) {
      bad_input(fmt::format("line {}: expected {} fields", lines[i].first, v.size()));
    }
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = parse_double(fields[c], lines[i].first);
    TrajectorySample s;
    s.t = v[0];
    for (int c = 0; c < 6; ++c) {
      s.pose[c] = v[1 + c];
      s.velocity[c] = v[7 + c];
      s.acceleration[c] = v[13 + c];
    }
    for (int c = 0; c < 3; ++c) {
      s.omega[c] = v[19 + c];
      s.alpha[c] = v[22 + c];
      s.tcp_velocity[c] = v[25 + c];
    }
    out.push_back(s);
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("failed writing '{}'", path.string()));
}

}  // namespace ftcp

#pragma once

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ftcp/fixed_tcp.hpp"
#include "ftcp/profile.hpp"
#include "ftcp/spline.hpp"
#include "ftcp/trajectory.hpp"

namespace ftcp {

// CSV with header x,y,z[,nx,ny,nz[,w]].
DataPolygon parse_polygon_csv(const std::string& text);
// [[x,y,z(,nx,ny,nz(,w))], ...] or [{"x":..,"y":..,"z":.., "nx":.., "w":..}, ...]
DataPolygon parse_polygon_json(const nlohmann::json& j);
// Dispatches on the file extension (.csv or .json).
DataPolygon read_polygon(const std::filesystem::path& path);

nlohmann::json curve_to_json(const BSplineCurve& curve);
BSplineCurve curve_from_json(const nlohmann::json& j);
BSplineCurve read_curve(const std::filesystem::path& path);

std::string frames_csv(std::span<const ProcessFrameSample> frames);
std::string robot_path_csv(std::span<const RobotPathSample> path);
std::string trajectory_csv(std::span<const TrajectorySample> samples);
std::string profile_csv(const ScalarProfile& profile, double rate_hz);

// Rows of a trajectory CSV written by trajectory_csv (sigma is not stored).
std::vector<TrajectorySample> parse_trajectory_csv(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ftcp

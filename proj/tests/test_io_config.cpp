#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fmt/format.h>

#include <filesystem>
#include <random>

#include "ftcp/config.hpp"
#include "ftcp/io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ftcp;
using nlohmann::json;

TEST_CASE("polygon CSV") {
  const DataPolygon p = parse_polygon_csv("x,y,z\n0,0,0\n1, 2 ,3\r\n-1e-3,4.5,6\n");
  REQUIRE(p.points.size() == 3);
  CHECK(p.points[1] == Vec3(1, 2, 3));
  CHECK(p.points[2] == Vec3(-1e-3, 4.5, 6));
  CHECK(p.normals.empty());
  CHECK(p.weights.empty());

  const DataPolygon q = parse_polygon_csv("x,y,z,nx,ny,nz,w\n0,0,0,0,0,1,2\n1,0,0,0,0,1,0.5\n");
  REQUIRE(q.normals.size() == 2);
  CHECK(q.weights[0] == 2.0);
  CHECK(q.weights[1] == 0.5);

  CHECK(error_code_of([] { parse_polygon_csv("a,b,c\n1,2,3\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { parse_polygon_csv("x,y,z\n1,2\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { parse_polygon_csv("x,y,z\n1,2,abc\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { parse_polygon_csv(""); }) == ErrorCode::kInvalidArgument);
  try {
    parse_polygon_csv("x,y,z\n1,2,3\n4,5,x\n");
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("polygon JSON") {
  const DataPolygon a = parse_polygon_json(json::parse("[[0,0,0,0,0,1],[1,2,3,0,0,1]]"));
  CHECK(a.points.size() == 2);
  CHECK(a.normals.size() == 2);
  CHECK(error_code_of([] { parse_polygon_json(json::parse("[[0,0,0],[1,2,3,0,0,1]]")); }) ==
        ErrorCode::kInvalidArgument);
  const DataPolygon b = parse_polygon_json(json::parse(
      R"([{"x":0,"y":0,"z":0,"nx":0,"ny":0,"nz":1,"w":2},{"x":1,"y":2,"z":3,"nx":0,"ny":0,"nz":1,"w":1}])"));
  REQUIRE(b.points.size() == 2);
  CHECK(b.points[1] == Vec3(1, 2, 3));
  CHECK(b.weights.size() == 2);
  CHECK(error_code_of([] { parse_polygon_json(json::parse(R"({"x":1})")); }).has_value());
  CHECK(error_code_of([] { parse_polygon_json(json::parse(R"([{"x":0,"y":0,"z":0,"w":2}])")); }).has_value());
  CHECK(error_code_of([] { parse_polygon_json(json::parse(R"([["a",1,2]])")); }).has_value());
}

TEST_CASE("curve JSON round trip") {
  DataPolygon poly;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int k = 0; k < 40; ++k) poly.points.emplace_back(0.1 * k, c(rng), c(rng));
  const ParameterTable params = chord_length_parameters(poly, 0.0, poly.length());
  const BSplineCurve curve = fit_least_squares(poly, params, 3, 12).curve;
  const BSplineCurve back = curve_from_json(json::parse(curve_to_json(curve).dump()));
  CHECK(back.degree() == curve.degree());
  const auto ka = curve.knots().knots();
  const auto kb = back.knots().knots();
  CHECK(std::equal(ka.begin(), ka.end(), kb.begin(), kb.end()));
  for (std::size_t i = 0; i < curve.control_points().size(); ++i) {
    CHECK(curve.control_points()[i] == back.control_points()[i]);
  }
  CHECK(error_code_of([] {
          curve_from_json(json::parse(R"({"degree":1,"knots":[0,0,1,1],"control_points":[[0,0,0],[1,0,0]],"extra":1})"));
        }).has_value());
}

TEST_CASE("config defaults and parsing") {
  const PlannerConfig d = PlannerConfig::from_json(json::object());
  CHECK(d.fit_degree == 5);
  CHECK(d.path_samples == 1000);
  CHECK(d.speed_frame == SpeedFrame::kTcp);
  CHECK(d.smoothing);
  CHECK(d.fit_control_points_for(400) == 100);
  CHECK(d.smoothing_control_points_value() == 250);
  CHECK(d.tolerances.fixed_tcp_position_m == 1e-9);

  const PlannerConfig c = load_config(std::string(FTCP_DATA_DIR) + "/roller_setup.json");
  CHECK(c.fit_control_points == 100);
  CHECK(!c.smoothing);
  const Mat3 expected = oracle::rx(0.2) * oracle::ry(-0.1);
  CHECK((c.setup.mount_rotation - expected).norm() <= 1e-15);
  CHECK(c.setup.tool_rotation(1, 2) == 1.0);

  const PlannerConfig again = PlannerConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config rejects bad input") {
  auto code = [](const char* text) {
    return error_code_of([&] { PlannerConfig::from_json(json::parse(text)); });
  };
  CHECK(code(R"({"unknown": 1})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"limits": {"v_max": 1, "vmax": 2}})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"limits": {"v_max": -1}})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"speed_frame": "flange"})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"fit": {"degree": 2.5}})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"setup": {"tool_rotation": [[1,0,0],[0,1,0],[0,0,2]]}})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"normals": {"mode": "per_point", "vector": [0,0,1]}})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"tolerances": {"grid_chain_rule_relative": 0}})") == ErrorCode::kInvalidConfig);
  CHECK(error_code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kIoError);
}

TEST_CASE("trajectory CSV round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-10.0, 10.0);
  std::vector<TrajectorySample> samples(25);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    auto& s = samples[k];
    s.t = 1e-3 * static_cast<double>(k) / 3.0;
    for (int i = 0; i < 6; ++i) {
      s.pose[i] = c(rng);
      s.velocity[i] = c(rng) * 1e-7;
      s.acceleration[i] = c(rng) * 1e9;
    }
    for (int i = 0; i < 3; ++i) {
      s.omega[i] = c(rng);
      s.alpha[i] = c(rng);
      s.tcp_velocity[i] = c(rng);
    }
  }
  const std::string text = trajectory_csv(samples);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
  CHECK(text.substr(0, text.find('\n')).find("t,x,y,z,alpha,beta,gamma") == 0);
  const auto back = parse_trajectory_csv(text);
  REQUIRE(back.size() == samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    CHECK(back[k].t == samples[k].t);
    CHECK(back[k].pose == samples[k].pose);
    CHECK(back[k].velocity == samples[k].velocity);
    CHECK(back[k].acceleration == samples[k].acceleration);
    CHECK(back[k].omega == samples[k].omega);
    CHECK(back[k].alpha == samples[k].alpha);
    CHECK(back[k].tcp_velocity == samples[k].tcp_velocity);
  }
  CHECK(error_code_of([] { parse_trajectory_csv("t,x\n0,1\n"); }).has_value());
}

TEST_CASE("profile CSV") {
  const ScalarProfile p = plan_profile(0.01, {0.05, 0.5, 5.0});
  const std::string text = profile_csv(p, 1000.0);
  CHECK(text.rfind("t,sigma,sigma_dot,sigma_ddot,sigma_dddot\n", 0) == 0);
  const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
  CHECK(last.rfind(fmt::format("{},{},", p.duration(), 0.01), 0) == 0);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "ftcp_io_test";
  std::filesystem::create_directories(dir);
  write_text(dir / "a.csv", "x,y,z\n0,0,0\n1,0,0\n");
  CHECK(read_polygon(dir / "a.csv").points.size() == 2);
  write_text(dir / "a.json", "[[0,0,0],[1,0,0],[2,0,0]]");
  CHECK(read_polygon(dir / "a.json").points.size() == 3);
  CHECK(error_code_of([&] { read_polygon(dir / "a.txt"); }).has_value());
  CHECK(error_code_of([&] { read_text(dir / "missing.csv"); }) == ErrorCode::kIoError);
  std::filesystem::remove_all(dir);
}

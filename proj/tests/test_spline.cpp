#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ftcp/spline.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ftcp;

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

BSplineCurve random_curve(std::mt19937_64& rng, int degree, int m) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Vec3> ctrl(static_cast<std::size_t>(m));
  for (auto& c : ctrl) c = Vec3(coord(rng), coord(rng), coord(rng));
  // Non-uniform interior knots.
  std::uniform_real_distribution<double> gap(0.2, 1.0);
  std::vector<double> knots(static_cast<std::size_t>(degree + 1), 0.0);
  double u = 0.0;
  for (int i = 0; i < m - degree - 1; ++i) knots.push_back(u += gap(rng));
  u += gap(rng);
  for (int i = 0; i <= degree; ++i) knots.push_back(u);
  return BSplineCurve(KnotVector(knots, degree), ctrl);
}

DataPolygon circle_points(int n, double radius, double arc) {
  DataPolygon poly;
  for (int k = 0; k < n; ++k) {
    const double th = arc * k / (n - 1);
    poly.points.emplace_back(radius * std::cos(th), radius * std::sin(th), 0.0);
  }
  return poly;
}

}  // namespace

TEST_CASE("knot vector validation") {
  CHECK_NOTHROW(KnotVector({0, 0, 1, 1}, 1));
  CHECK(error_code_of([] { KnotVector({0, 0.5, 1, 1}, 1); }).has_value());
  CHECK(error_code_of([] { KnotVector({0, 0, 1, 0.5, 1, 1}, 1); }).has_value());
  CHECK(error_code_of([] { KnotVector({1, 1, 1, 1}, 1); }).has_value());
  CHECK(error_code_of([] { KnotVector({0, 0, 1}, 1); }).has_value());

  const KnotVector kv = KnotVector::clamped_uniform(3, 7, 0.0, 2.0);
  CHECK(kv.num_basis() == 7);
  CHECK(kv.size() == 11);
  CHECK(kv.front() == 0.0);
  CHECK(kv.back() == 2.0);
}

TEST_CASE("chord length parameters") {
  DataPolygon poly;
  poly.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0)};
  const ParameterTable t = chord_length_parameters(poly, 0.0, 1.0);
  CHECK(t.total_length == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(t.sigma[0] == 0.0);
  CHECK(t.sigma[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t.sigma[2] == 1.0);

  SUBCASE("duplicate gives a repeated value") {
    DataPolygon dup;
    dup.points = {Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(2, 0, 0)};
    const ParameterTable d = chord_length_parameters(dup, 0.0, 1.0);
    CHECK(d.sigma[0] == d.sigma[1]);
    CHECK(d.sigma[2] == 1.0);
    std::size_t removed = 0;
    const DataPolygon collapsed = collapse_duplicates(dup, &removed);
    CHECK(removed == 1);
    CHECK(collapsed.points.size() == 2);
  }

  SUBCASE("random points against a cumulative sum") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    DataPolygon rnd;
    for (int k = 0; k < 100; ++k) rnd.points.emplace_back(c(rng), c(rng), c(rng));
    const ParameterTable r = chord_length_parameters(rnd, 0.0, 1.0);
    const auto expected = oracle::chord_params(rnd.points, 0.0, 1.0);
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(std::abs(r.sigma[k] - expected[k]) <= 1e-12);
    CHECK(r.sigma.front() == 0.0);
    CHECK(r.sigma.back() == 1.0);
  }

  SUBCASE("degenerate polygon") {
    DataPolygon same;
    same.points = {Vec3(1, 1, 1), Vec3(1, 1, 1)};
    CHECK(error_code_of([&] { chord_length_parameters(same, 0.0, 1.0); }) ==
          ErrorCode::kDegeneratePolygon);
  }
}

TEST_CASE("data polygon validation") {
  DataPolygon poly;
  poly.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_NOTHROW(poly.validate());
  poly.normals = {Vec3(0, 0, 1), Vec3(0, 0, 1.01)};
  CHECK(error_code_of([&] { poly.validate(); }).has_value());
  poly.normals = {Vec3(0, 0, 1)};
  CHECK(error_code_of([&] { poly.validate(); }).has_value());
  poly.normals.clear();
  poly.weights = {1.0, -1.0};
  CHECK(error_code_of([&] { poly.validate(); }).has_value());
}

TEST_CASE("basis functions") {
  const KnotVector lin({0, 0, 1, 1}, 1);
  const auto n = basis_functions(lin, 0.5);
  REQUIRE(n.size() == 2);
  CHECK(n[0] == doctest::Approx(0.5));
  CHECK(n[1] == doctest::Approx(0.5));

  const std::vector<double> U = {0, 0, 0, 0, 1, 2, 3, 3, 3, 3};
  const KnotVector cubic(U, 3);
  const auto b = basis_functions(cubic, 1.5);
  REQUIRE(b.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(b[i] - oracle::basis(U, i, 3, 1.5)) <= 1e-14);

  CHECK(error_code_of([&] { basis_functions(cubic, 3.0 + 1e-9); }) == ErrorCode::kOutOfDomain);
  CHECK(error_code_of([&] { basis_functions(cubic, -1e-9); }) == ErrorCode::kOutOfDomain);

  SUBCASE("partition of unity, non-negativity and local support") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const int p = 1 + trial % 6;
      const BSplineCurve c = random_curve(rng, p, p + 1 + trial);
      const auto knots = to_vec(c.knots().knots());
      std::uniform_real_distribution<double> ud(c.domain_begin(), c.domain_end());
      for (int k = 0; k < 500; ++k) {
        const double u = k == 0 ? c.domain_end() : ud(rng);
        const auto v = basis_functions(c.knots(), u);
        double sum = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          CHECK(v[i] >= 0.0);
          if (u < knots[i] || u > knots[i + p + 1]) CHECK(v[i] == 0.0);
          sum += v[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }

  SUBCASE("matches the recursive definition") {
    std::mt19937_64 rng(12);
    const BSplineCurve c = random_curve(rng, 4, 12);
    const auto knots = to_vec(c.knots().knots());
    std::uniform_real_distribution<double> ud(c.domain_begin(), c.domain_end());
    for (int k = 0; k < 200; ++k) {
      const double u = ud(rng);
      const auto v = basis_functions(c.knots(), u);
      for (int i = 0; i < 12; ++i) CHECK(std::abs(v[i] - oracle::basis(knots, i, 4, u)) <= 1e-13);
    }
  }
}

TEST_CASE("curve evaluation") {
  const Vec3 c(0.3, -2.0, 5.0);
  const BSplineCurve constant(KnotVector::clamped_uniform(3, 6, 0.0, 1.0),
                              std::vector<Vec3>(6, c));
  for (double u : {0.0, 0.17, 0.5, 0.99, 1.0}) CHECK((evaluate(constant, u) - c).norm() <= 1e-15);

  std::mt19937_64 rng(13);
  const BSplineCurve curve = random_curve(rng, 5, 14);
  CHECK((evaluate(curve, curve.domain_begin()) - curve.control_points().front()).norm() == 0.0);
  CHECK((evaluate(curve, curve.domain_end()) - curve.control_points().back()).norm() <= 1e-15);
  CHECK(error_code_of([&] { evaluate(curve, curve.domain_end() + 1e-6); }) ==
        ErrorCode::kOutOfDomain);

  const auto knots = to_vec(curve.knots().knots());
  const std::vector<Vec3> ctrl(curve.control_points().begin(), curve.control_points().end());
  for (int k = 0; k <= 200; ++k) {
    const double u = curve.domain_begin() + (curve.domain_end() - curve.domain_begin()) * k / 200.0;
    CHECK((evaluate(curve, u) - oracle::curve_point(knots, 5, ctrl, u)).norm() <= 1e-13);
  }

  SUBCASE("convex hull of the active control points") {
    // Degree 2 in the plane: the active hull is a triangle.
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vec3> pts(7);
      for (auto& p : pts) p = Vec3(coord(rng), coord(rng), 0.0);
      const BSplineCurve q(KnotVector::clamped_uniform(2, 7, 0.0, 1.0), pts);
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      for (int k = 0; k < 50; ++k) {
        const double u = ud(rng);
        const int span = q.knots().find_span(u);
        const Eigen::Vector2d a = pts[span - 2].head<2>();
        const Eigen::Vector2d b = pts[span - 1].head<2>();
        const Eigen::Vector2d cc = pts[span].head<2>();
        const Eigen::Vector2d x = evaluate(q, u).head<2>();
        Eigen::Matrix2d m;
        m << b - a, cc - a;
        if (std::abs(m.determinant()) < 1e-6) continue;
        const Eigen::Vector2d l = m.fullPivLu().solve(x - a);
        CHECK(l.x() >= -1e-12);
        CHECK(l.y() >= -1e-12);
        CHECK(l.x() + l.y() <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("derivative curves") {
  const BSplineCurve constant(KnotVector::clamped_uniform(3, 5, 0.0, 1.0),
                              std::vector<Vec3>(5, Vec3(1, 2, 3)));
  const BSplineCurve dc = derivative_curve(constant, 1);
  for (double u : {0.0, 0.3, 1.0}) CHECK(evaluate(dc, u).norm() <= 1e-14);

  const Vec3 q0(1, 2, 3), q1(-1, 0.5, 4);
  const BSplineCurve line(KnotVector({0, 0, 1, 1}, 1), {q0, q1});
  const BSplineCurve dl = derivative_curve(line, 1);
  CHECK(dl.degree() == 0);
  for (double u : {0.0, 0.5, 1.0}) CHECK((evaluate(dl, u) - (q1 - q0)).norm() <= 1e-15);

  CHECK(error_code_of([&] { derivative_curve(line, 2); }) == ErrorCode::kOrderTooHigh);

  std::mt19937_64 rng(14);
  const BSplineCurve curve = random_curve(rng, 5, 12);
  const BSplineCurve d1 = derivative_curve(curve, 1);
  const BSplineCurve d2 = derivative_curve(curve, 2);
  const double a = curve.domain_begin(), b = curve.domain_end();
  const double h = 1e-6;
  double worst1 = 0.0, worst2 = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double u = a + (b - a) * (k - 0.5) / 200.0;
    const Vec3 fd1 = (evaluate(curve, u + h) - evaluate(curve, u - h)) / (2 * h);
    const Vec3 fd2 = (evaluate(d1, u + h) - evaluate(d1, u - h)) / (2 * h);
    worst1 = std::max(worst1, (fd1 - evaluate(d1, u)).norm() / evaluate(d1, u).norm());
    worst2 = std::max(worst2, (fd2 - evaluate(d2, u)).norm() / evaluate(d2, u).norm());
  }
  CHECK(worst1 <= 1e-5);
  CHECK(worst2 <= 1e-5);
}

TEST_CASE("least-squares fitting") {
  SUBCASE("collinear points are reproduced") {
    DataPolygon poly;
    for (int k = 0; k < 30; ++k) {
      const double x = std::pow(k / 29.0, 1.3);
      poly.points.emplace_back(x, 2 * x - 1, 0.5 * x);
    }
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    for (int p : {1, 3, 5}) {
      const CurveFit fit = fit_least_squares(poly, params, p, 10);
      CHECK(fit.max_error <= 1e-12);
    }
  }

  SUBCASE("N == m interpolates") {
    DataPolygon poly = circle_points(12, 1.0, 4.0);
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    const CurveFit fit = fit_least_squares(poly, params, 5, 12);
    for (std::size_t j = 0; j < poly.points.size(); ++j) {
      CHECK((evaluate(fit.curve, params.sigma[j]) - poly.points[j]).norm() <= 1e-8);
    }
    CHECK(fit.max_error <= 1e-8);
  }

  SUBCASE("circle against explicit normal equations") {
    const DataPolygon poly = circle_points(200, 1.0, 2.0 * std::numbers::pi);
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    const CurveFit fit = fit_least_squares(poly, params, 5, 20);
    CHECK(fit.rms_error < 1e-4);

    Eigen::MatrixXd data(200, 3);
    for (int j = 0; j < 200; ++j) data.row(j) = poly.points[j].transpose();
    const auto knots = to_vec(fit.curve.knots().knots());
    const Eigen::MatrixXd ctrl = oracle::normal_equation_fit(knots, 5, 20, params.sigma, data, {});
    double residual = 0.0;
    std::vector<Vec3> oc(20);
    for (int i = 0; i < 20; ++i) oc[i] = ctrl.row(i).transpose();
    for (int j = 0; j < 200; ++j) {
      residual += (oracle::curve_point(knots, 5, oc, params.sigma[j]) - poly.points[j]).squaredNorm();
    }
    CHECK(std::abs(fit.weighted_residual - residual) <= 1e-9);
    for (int i = 0; i < 20; ++i) CHECK((fit.curve.control_points()[i] - oc[i]).norm() <= 1e-8);
  }

  SUBCASE("weights enter the objective") {
    DataPolygon poly = circle_points(60, 1.0, 3.0);
    poly.weights.assign(60, 1.0);
    for (int j = 20; j < 30; ++j) poly.weights[j] = 50.0;
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    const CurveFit fit = fit_least_squares(poly, params, 3, 8);
    Eigen::MatrixXd data(60, 3);
    for (int j = 0; j < 60; ++j) data.row(j) = poly.points[j].transpose();
    const auto knots = to_vec(fit.curve.knots().knots());
    const Eigen::MatrixXd ctrl =
        oracle::normal_equation_fit(knots, 3, 8, params.sigma, data, poly.weights);
    for (int i = 0; i < 8; ++i) {
      CHECK((fit.curve.control_points()[i] - Vec3(ctrl.row(i).transpose())).norm() <= 1e-9);
    }
  }

  SUBCASE("first-order optimality") {
    const DataPolygon poly = circle_points(80, 0.5, 5.0);
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    const CurveFit fit = fit_least_squares(poly, params, 4, 15);
    auto residual = [&](const BSplineCurve& c) {
      double r = 0.0;
      for (std::size_t j = 0; j < poly.points.size(); ++j) {
        r += (evaluate(c, params.sigma[j]) - poly.points[j]).squaredNorm();
      }
      return r;
    };
    const double base = residual(fit.curve);
    for (std::size_t i = 0; i < 15; ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        for (double step : {1e-4, -1e-4}) {
          std::vector<Vec3> ctrl(fit.curve.control_points().begin(), fit.curve.control_points().end());
          ctrl[i][axis] += step;
          CHECK(residual(BSplineCurve(fit.curve.knots(), ctrl)) >= base);
        }
      }
    }
  }

  SUBCASE("errors") {
    const DataPolygon poly = circle_points(10, 1.0, 2.0);
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    CHECK(error_code_of([&] { fit_least_squares(poly, params, 3, 11); }) ==
          ErrorCode::kUnderdeterminedFit);

    // All data in a single knot span cannot determine the outer control points.
    const KnotVector kv = KnotVector::clamped_uniform(3, 10, 0.0, 1.0);
    std::vector<double> clustered;
    Eigen::MatrixXd data(20, 3);
    for (int j = 0; j < 20; ++j) {
      clustered.push_back(0.01 * j / 19.0);
      data.row(j) = Eigen::RowVector3d(j, 0, 0);
    }
    CHECK(error_code_of([&] { least_squares_control_points(kv, clustered, data, {}); }) ==
          ErrorCode::kSingularNormalEquations);
  }
}

TEST_CASE("arc length") {
  const BSplineCurve segment(KnotVector({0, 0, 1, 1}, 1), {Vec3(0, 0, 0), Vec3(2, 0, 0)});
  const ArcLengthTable seg = arc_length_table(segment, 16);
  CHECK(std::abs(seg.length() - 2.0) <= 1e-9);

  SUBCASE("quarter circle against adaptive quadrature") {
    const DataPolygon poly = circle_points(100, 1.0, std::numbers::pi / 2);
    const ParameterTable params = chord_length_parameters(poly, 0.0, 1.0);
    const CurveFit fit = fit_least_squares(poly, params, 5, 12);
    const ArcLengthTable t = arc_length_table(fit.curve, 64);
    const BSplineCurve d1 = derivative_curve(fit.curve, 1);
    double reference = 0.0;
    const auto bp = fit.curve.knots().breakpoints();
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      reference += oracle::integrate([&](double u) { return evaluate(d1, u).norm(); }, bp[k],
                                     bp[k + 1]);
    }
    CHECK(std::abs(t.length() - reference) <= 1e-9 * reference);
    CHECK(std::abs(t.length() - std::numbers::pi / 2) <= 1e-4);

    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double u = ud(rng);
      CHECK(std::abs(t.u_at(t.s_at(u)) - u) <= 1e-9);
    }
    double prev = -1.0;
    for (int k = 0; k <= 5000; ++k) {
      const double s = t.s_at(k / 5000.0);
      CHECK(s >= prev);
      prev = s;
    }
    CHECK(t.s_at(0.0) == 0.0);
  }
}

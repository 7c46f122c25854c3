#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ftcp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Clamped, non-decreasing knot sequence u_0..u_{n-1} for a B-spline of
// degree p. The first and last p+1 knots coincide with the domain ends a < b.
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree);

  // Clamped knots with uniformly spaced interior knots.
  static KnotVector clamped_uniform(int degree, int num_basis, double a,
                                    double b);

  int degree() const noexcept { return degree_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::size_t size() const noexcept { return knots_.size(); }
  double operator[](std::size_t i) const { return knots_[i]; }

  // m = n - p - 1
  int num_basis() const noexcept {
    return static_cast<int>(knots_.size()) - degree_ - 1;
  }
  double front() const noexcept { return knots_.front(); }
  double back() const noexcept { return knots_.back(); }
  bool contains(double u) const noexcept { return u >= front() && u <= back(); }

  // Index k of the non-empty span [u_k, u_{k+1}) containing u. The right end b
  // maps to the last non-empty span. Requires contains(u).
  int find_span(double u) const;

  // Distinct knot values (the breakpoints of the piecewise polynomial).
  std::vector<double> breakpoints() const;

 private:
  std::vector<double> knots_;
  int degree_;
};

class BSplineCurve {
 public:
  BSplineCurve(KnotVector knots, std::vector<Vec3> control_points);

  const KnotVector& knots() const noexcept { return knots_; }
  int degree() const noexcept { return knots_.degree(); }
  std::span<const Vec3> control_points() const noexcept { return ctrl_; }
  double domain_begin() const noexcept { return knots_.front(); }
  double domain_end() const noexcept { return knots_.back(); }

  // Length of the control polygon; an upper bound for the curve length.
  double control_polygon_length() const;

 private:
  KnotVector knots_;
  std::vector<Vec3> ctrl_;
};

// All m basis values N_{i,p}(u) by the Cox-de Boor recursion. Throws
// OutOfDomain outside [a, b].
std::vector<double> basis_functions(const KnotVector& kv, double u);

// The p+1 non-zero basis values N_{span-p..span,p}(u) written to `out`.
void nonzero_basis(const KnotVector& kv, int span, double u,
                   std::span<double> out);

Vec3 evaluate(const BSplineCurve& curve, double u);

// Exact B-spline of the order-th derivative (degree p - order).
BSplineCurve derivative_curve(const BSplineCurve& curve, int order);

struct DataPolygon {
  std::vector<Vec3> points;
  std::vector<double> weights;  // empty means all 1
  std::vector<Vec3> normals;    // empty means none supplied

  // Throws DegeneratePolygon / InvalidArgument on invariant violations.
  void validate() const;
  double weight(std::size_t j) const { return weights.empty() ? 1.0 : weights[j]; }
  double length() const;
};

// Removes points identical to their predecessor (with their weight/normal).
// `removed` receives the number of dropped points.
DataPolygon collapse_duplicates(const DataPolygon& polygon,
                                std::size_t* removed = nullptr);

struct ParameterTable {
  std::vector<double> sigma;
  double total_length = 0.0;
};

ParameterTable chord_length_parameters(const DataPolygon& polygon, double a,
                                       double b);

// Clamped knots on [params.front(), params.back()] for fitting m control
// points of degree p. N == m uses the averaging of p consecutive parameters;
// N > m spreads the interior knots so every span holds data.
KnotVector fitting_knots(std::span<const double> params, int degree,
                         int num_ctrl);

// Weighted least-squares control points for the rows of `data` (N x dim) at
// `params`, solved by column-pivoting QR of the weighted collocation matrix.
Eigen::MatrixXd least_squares_control_points(const KnotVector& kv,
                                             std::span<const double> params,
                                             const Eigen::MatrixXd& data,
                                             std::span<const double> weights);

struct CurveFit {
  BSplineCurve curve;
  double weighted_residual = 0.0;  // sum_j w_j |C(sigma_j) - r_j|^2
  double rms_error = 0.0;
  double max_error = 0.0;
};

CurveFit fit_least_squares(const DataPolygon& polygon,
                           const ParameterTable& params, int degree,
                           int num_ctrl);

// Speed |C'(u)| and its derivative d|C'|/du.
struct SpeedSample {
  double speed = 0.0;
  double dspeed = 0.0;
};
using SpeedFunction = std::function<SpeedSample(double)>;

// Monotone map between a curve parameter u and arc length s, tabulated on a
// grid that is doubled until the total length settles to `rel_tol` and the
// interpolant's slope matches the speed at every interval midpoint to the
// same relative tolerance. Between nodes s(u) is a quintic Hermite
// interpolant of the node lengths, speeds and speed derivatives.
class ArcLengthTable {
 public:
  static ArcLengthTable build(const SpeedFunction& speed,
                              std::span<const double> breakpoints,
                              int min_samples, double rel_tol = 1e-9);

  double length() const noexcept { return s_.back(); }
  double domain_begin() const noexcept { return u_.front(); }
  double domain_end() const noexcept { return u_.back(); }
  std::size_t node_count() const noexcept { return u_.size(); }

  double s_at(double u) const;
  double u_at(double s) const;

 private:
  double hermite(std::size_t k, double u) const;
  double hermite_slope(std::size_t k, double u) const;

  std::vector<double> u_;
  std::vector<double> s_;
  std::vector<double> slope_;  // speed and d(speed)/du at both ends, per interval
};

ArcLengthTable arc_length_table(const BSplineCurve& curve, int samples);

}  // namespace ftcp

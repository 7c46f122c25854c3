#include "ftcp/spline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "ftcp/errors.hpp"

namespace ftcp {

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative spline degree");
  }
  const auto p = static_cast<std::size_t>(degree_);
  if (knots_.size() < 2 * (p + 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("knot vector of degree {} needs at least {} knots, got {}",
                            degree_, 2 * (p + 1), knots_.size()));
  }
  for (double u : knots_) {
    if (!std::isfinite(u)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite knot");
    }
  }
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw Error(ErrorCode::kInvalidArgument, "knots must be non-decreasing");
  }
  const double a = knots_.front();
  const double b = knots_.back();
  if (!(a < b)) {
    throw Error(ErrorCode::kInvalidArgument, "knot domain is empty");
  }
  for (std::size_t i = 0; i <= p; ++i) {
    if (knots_[i] != a || knots_[knots_.size() - 1 - i] != b) {
      throw Error(ErrorCode::kInvalidArgument, "knot vector is not clamped");
    }
  }
}

KnotVector KnotVector::clamped_uniform(int degree, int num_basis, double a,
                                       double b) {
  if (num_basis < degree + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "clamped knots need at least degree+1 basis functions");
  }
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(num_basis + degree + 1));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), a);
  const int interior = num_basis - degree - 1;
  for (int j = 1; j <= interior; ++j) {
    knots.push_back(a + (b - a) * j / (interior + 1));
  }
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), b);
  return KnotVector(std::move(knots), degree);
}

int KnotVector::find_span(double u) const {
  const int m = num_basis();
  if (u >= back()) {
    int k = m - 1;
    while (k > degree_ && knots_[k] == knots_[k + 1]) --k;
    return k;
  }
  // last k with u_k <= u
  const auto it = std::upper_bound(knots_.begin() + degree_,
                                   knots_.begin() + m + 1, u);
  return static_cast<int>(it - knots_.begin()) - 1;
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> out;
  std::unique_copy(knots_.begin(), knots_.end(), std::back_inserter(out));
  return out;
}

BSplineCurve::BSplineCurve(KnotVector knots, std::vector<Vec3> control_points)
    : knots_(std::move(knots)), ctrl_(std::move(control_points)) {
  if (static_cast<int>(ctrl_.size()) != knots_.num_basis()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} control points given, knot vector implies {}",
                            ctrl_.size(), knots_.num_basis()));
  }
  for (const auto& d : ctrl_) {
    if (!d.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite control point");
    }
  }
}

double BSplineCurve::control_polygon_length() const {
  double length = 0.0;
  for (std::size_t i = 1; i < ctrl_.size(); ++i) {
    length += (ctrl_[i] - ctrl_[i - 1]).norm();
  }
  return length;
}

namespace {

void require_in_domain(const KnotVector& kv, double u) {
  if (!kv.contains(u)) {
    throw Error(ErrorCode::kOutOfDomain,
                fmt::format("u = {} outside [{}, {}]", u, kv.front(), kv.back()));
  }
}

}  // namespace

void nonzero_basis(const KnotVector& kv, int span, double u,
                   std::span<double> out) {
  const int p = kv.degree();
  // left/right differences as in the triangular Cox-de Boor scheme
  double left[32];
  double right[32];
  if (p >= 32) {
    throw Error(ErrorCode::kInvalidArgument, "degree too large");
  }
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - kv[static_cast<std::size_t>(span + 1 - j)];
    right[j] = kv[static_cast<std::size_t>(span + j)] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

std::vector<double> basis_functions(const KnotVector& kv, double u) {
  require_in_domain(kv, u);
  std::vector<double> values(static_cast<std::size_t>(kv.num_basis()), 0.0);
  const int span = kv.find_span(u);
  const int p = kv.degree();
  std::vector<double> local(static_cast<std::size_t>(p + 1));
  nonzero_basis(kv, span, u, local);
  for (int r = 0; r <= p; ++r) {
    values[static_cast<std::size_t>(span - p + r)] = local[static_cast<std::size_t>(r)];
  }
  return values;
}

Vec3 evaluate(const BSplineCurve& curve, double u) {
  const KnotVector& kv = curve.knots();
  require_in_domain(kv, u);
  const int p = kv.degree();
  const int span = kv.find_span(u);
  double local[32];
  nonzero_basis(kv, span, u, std::span<double>(local, static_cast<std::size_t>(p + 1)));
  Vec3 point = Vec3::Zero();
  const auto ctrl = curve.control_points();
  for (int r = 0; r <= p; ++r) {
    point += local[r] * ctrl[static_cast<std::size_t>(span - p + r)];
  }
  return point;
}

BSplineCurve derivative_curve(const BSplineCurve& curve, int order) {
  if (order < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative derivative order");
  }
  if (order > curve.degree()) {
    throw Error(ErrorCode::kOrderTooHigh,
                fmt::format("derivative order {} exceeds degree {}", order,
                            curve.degree()));
  }
  std::vector<double> knots(curve.knots().knots().begin(),
                            curve.knots().knots().end());
  std::vector<Vec3> ctrl(curve.control_points().begin(),
                         curve.control_points().end());
  int p = curve.degree();
  for (int k = 0; k < order; ++k) {
    std::vector<Vec3> next(ctrl.size() - 1);
    for (std::size_t i = 0; i + 1 < ctrl.size(); ++i) {
      const double span = knots[i + static_cast<std::size_t>(p) + 1] - knots[i + 1];
      next[i] = span > 0.0 ? Vec3(p * (ctrl[i + 1] - ctrl[i]) / span)
                           : Vec3::Zero();
    }
    knots.erase(knots.begin());
    knots.pop_back();
    ctrl = std::move(next);
    --p;
  }
  return BSplineCurve(KnotVector(std::move(knots), p), std::move(ctrl));
}

void DataPolygon::validate() const {
  if (points.size() < 2) {
    throw Error(ErrorCode::kDegeneratePolygon, "need at least two points");
  }
  for (const auto& r : points) {
    if (!r.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite point");
    }
  }
  if (!weights.empty()) {
    if (weights.size() != points.size()) {
      throw Error(ErrorCode::kInvalidArgument, "weight count differs from point count");
    }
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(ErrorCode::kInvalidArgument, "weights must be finite and non-negative");
      }
    }
  }
  if (!normals.empty()) {
    if (normals.size() != points.size()) {
      throw Error(ErrorCode::kInvalidArgument, "normal count differs from point count");
    }
    for (std::size_t j = 0; j < normals.size(); ++j) {
      if (std::abs(normals[j].norm() - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("normal {} is not a unit vector", j));
      }
    }
  }
  if (!(length() > 0.0)) {
    throw Error(ErrorCode::kDegeneratePolygon, "data polygon has zero length");
  }
}

double DataPolygon::length() const {
  double length = 0.0;
  for (std::size_t j = 1; j < points.size(); ++j) {
    length += (points[j] - points[j - 1]).norm();
  }
  return length;
}

DataPolygon collapse_duplicates(const DataPolygon& polygon, std::size_t* removed) {
  DataPolygon out;
  std::size_t dropped = 0;
  for (std::size_t j = 0; j < polygon.points.size(); ++j) {
    if (j > 0 && polygon.points[j] == polygon.points[j - 1]) {
      ++dropped;
      continue;
    }
    out.points.push_back(polygon.points[j]);
    if (!polygon.weights.empty()) out.weights.push_back(polygon.weights[j]);
    if (!polygon.normals.empty()) out.normals.push_back(polygon.normals[j]);
  }
  if (removed != nullptr) *removed = dropped;
  return out;
}

ParameterTable chord_length_parameters(const DataPolygon& polygon, double a,
                                       double b) {
  if (!(a < b)) {
    throw Error(ErrorCode::kInvalidArgument, "parameter interval needs a < b");
  }
  const auto& pts = polygon.points;
  if (pts.size() < 2) {
    throw Error(ErrorCode::kDegeneratePolygon, "need at least two points");
  }
  ParameterTable table;
  table.sigma.resize(pts.size());
  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t j = 1; j < pts.size(); ++j) {
    cumulative[j] = cumulative[j - 1] + (pts[j] - pts[j - 1]).norm();
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegeneratePolygon, "data polygon has zero length");
  }
  table.total_length = total;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    table.sigma[k] = a + (b - a) / total * cumulative[k];
  }
  table.sigma.back() = b;
  return table;
}

KnotVector fitting_knots(std::span<const double> params, int degree,
                         int num_ctrl) {
  const auto n_points = static_cast<int>(params.size());
  const int p = degree;
  const int m = num_ctrl;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(m + p + 1));
  knots.insert(knots.end(), static_cast<std::size_t>(p + 1), params.front());
  if (n_points == m) {
    for (int j = 1; j <= m - p - 1; ++j) {
      double sum = 0.0;
      for (int i = j; i < j + p; ++i) sum += params[static_cast<std::size_t>(i)];
      knots.push_back(sum / p);
    }
  } else {
    const double d = static_cast<double>(n_points) / (m - p);
    for (int j = 1; j <= m - p - 1; ++j) {
      const double jd = j * d;
      const auto i = static_cast<int>(std::floor(jd));
      const double alpha = jd - i;
      knots.push_back((1.0 - alpha) * params[static_cast<std::size_t>(i - 1)] +
                      alpha * params[static_cast<std::size_t>(i)]);
    }
  }
  knots.insert(knots.end(), static_cast<std::size_t>(p + 1), params.back());
  return KnotVector(std::move(knots), p);
}

Eigen::MatrixXd least_squares_control_points(const KnotVector& kv,
                                             std::span<const double> params,
                                             const Eigen::MatrixXd& data,
                                             std::span<const double> weights) {
  const auto n_points = static_cast<Eigen::Index>(params.size());
  const int m = kv.num_basis();
  const int p = kv.degree();
  if (n_points < m) {
    throw Error(ErrorCode::kUnderdeterminedFit,
                fmt::format("{} data points cannot determine {} control points",
                            n_points, m));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_points, m);
  Eigen::MatrixXd rhs = data;
  std::vector<double> local(static_cast<std::size_t>(p + 1));
  for (Eigen::Index j = 0; j < n_points; ++j) {
    const double u = params[static_cast<std::size_t>(j)];
    require_in_domain(kv, u);
    const int span = kv.find_span(u);
    nonzero_basis(kv, span, u, local);
    const double sw = weights.empty() ? 1.0 : std::sqrt(weights[static_cast<std::size_t>(j)]);
    for (int r = 0; r <= p; ++r) {
      a(j, span - p + r) = sw * local[static_cast<std::size_t>(r)];
    }
    rhs.row(j) *= sw;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) {
    throw Error(ErrorCode::kSingularNormalEquations,
                fmt::format("collocation matrix has rank {} < {}; some knot span "
                            "holds too little data",
                            qr.rank(), m));
  }
  return qr.solve(rhs);
}

CurveFit fit_least_squares(const DataPolygon& polygon,
                           const ParameterTable& params, int degree,
                           int num_ctrl) {
  const auto n_points = polygon.points.size();
  if (params.sigma.size() != n_points) {
    throw Error(ErrorCode::kInvalidArgument, "parameter count differs from point count");
  }
  if (degree < 1) {
    throw Error(ErrorCode::kInvalidArgument, "fitting needs degree >= 1");
  }
  if (num_ctrl < degree + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("need at least degree+1 = {} control points", degree + 1));
  }
  if (static_cast<int>(n_points) < num_ctrl) {
    throw Error(ErrorCode::kUnderdeterminedFit,
                fmt::format("{} data points cannot determine {} control points",
                            n_points, num_ctrl));
  }
  KnotVector kv = fitting_knots(params.sigma, degree, num_ctrl);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n_points), 3);
  for (std::size_t j = 0; j < n_points; ++j) {
    data.row(static_cast<Eigen::Index>(j)) = polygon.points[j].transpose();
  }
  const Eigen::MatrixXd ctrl =
      least_squares_control_points(kv, params.sigma, data, polygon.weights);
  std::vector<Vec3> points(static_cast<std::size_t>(num_ctrl));
  for (int i = 0; i < num_ctrl; ++i) points[static_cast<std::size_t>(i)] = ctrl.row(i).transpose();

  CurveFit fit{BSplineCurve(std::move(kv), std::move(points))};
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < n_points; ++j) {
    const double err = (evaluate(fit.curve, params.sigma[j]) - polygon.points[j]).norm();
    const double w = polygon.weight(j);
    fit.weighted_residual += w * err * err;
    weight_sum += w;
    fit.max_error = std::max(fit.max_error, err);
  }
  fit.rms_error = weight_sum > 0.0 ? std::sqrt(fit.weighted_residual / weight_sum) : 0.0;
  return fit;
}

}  // namespace ftcp

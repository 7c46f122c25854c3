#include "ftcp/frames.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftcp/errors.hpp"

namespace ftcp {

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  return (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

void require_rotation(const Mat3& r, const char* what) {
  if (!is_rotation(r)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} is not a proper rotation matrix", what));
  }
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
  const Mat3 delta = a.transpose() * b;
  const double sin_part = vee(delta).norm();
  const double cos_part = 0.5 * (delta.trace() - 1.0);
  return std::atan2(sin_part, cos_part);
}

Mat3 taitbryan_to_rotation(const TaitBryanAngles& angles) {
  return rot_x(angles.alpha) * rot_y(angles.beta) * rot_z(angles.gamma);
}

namespace {

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  if (a <= -kPi) a += 2 * kPi;
  if (a > kPi) a -= 2 * kPi;
  return a;
}

}  // namespace

TaitBryanAngles rotation_to_taitbryan(const Mat3& r) {
  const double cb = std::hypot(r(0, 0), r(0, 1));
  const double beta = std::atan2(r(0, 2), cb);
  if (std::numbers::pi / 2 - std::abs(beta) < kGimbalLockTolerance) {
    throw Error(ErrorCode::kGimbalLock,
                fmt::format("beta = {} is within {} of +-pi/2", beta,
                            kGimbalLockTolerance));
  }
  return {wrap_angle(std::atan2(-r(1, 2), r(2, 2))), beta,
          wrap_angle(std::atan2(-r(0, 1), r(0, 0)))};
}

Mat3 angular_velocity_map(const TaitBryanAngles& angles) {
  const double ca = std::cos(angles.alpha);
  const double sa = std::sin(angles.alpha);
  const double cb = std::cos(angles.beta);
  const double sb = std::sin(angles.beta);
  Mat3 t;
  t << 1, 0, sb,
       0, ca, -sa * cb,
       0, sa, ca * cb;
  return t;
}

Mat3 angular_velocity_map_rate(const TaitBryanAngles& angles, const Vec3& rates) {
  const double ca = std::cos(angles.alpha);
  const double sa = std::sin(angles.alpha);
  const double cb = std::cos(angles.beta);
  const double sb = std::sin(angles.beta);
  const double da = rates.x();
  const double db = rates.y();
  Mat3 t;
  t << 0, 0, cb * db,
       0, -sa * da, sa * sb * db - ca * cb * da,
       0, ca * da, -ca * sb * db - sa * cb * da;
  return t;
}

Vec3 euler_rate_to_angular_velocity(const TaitBryanAngles& angles,
                                    const Vec3& rates) {
  return angular_velocity_map(angles) * rates;
}

Vec3 euler_accel_to_angular_acceleration(const TaitBryanAngles& angles,
                                         const Vec3& rates, const Vec3& accels) {
  return angular_velocity_map_rate(angles, rates) * rates +
         angular_velocity_map(angles) * accels;
}

VecJet taitbryan_jet(const MatJet& r) {
  const TaitBryanAngles angles = rotation_to_taitbryan(r.v);
  const Vec3 omega = vee(r.d1 * r.v.transpose());
  const Vec3 omega_dot = vee(r.d2 * r.v.transpose() + r.d1 * r.d1.transpose());
  const Mat3 map = angular_velocity_map(angles);
  const auto lu = map.partialPivLu();
  const Vec3 rates = lu.solve(omega);
  const Vec3 accels = lu.solve(omega_dot - angular_velocity_map_rate(angles, rates) * rates);
  return {angles.vector(), rates, accels};
}

double tangent_threshold(const BSplineCurve& curve) {
  const double scale = curve.control_polygon_length() /
                       (curve.domain_end() - curve.domain_begin());
  return 1e-8 * scale;
}

Vec3 compute_tangent(const BSplineCurve& curve, double sigma) {
  if (curve.degree() < 1) {
    throw Error(ErrorCode::kVanishingTangent, "piecewise constant curve has no tangent");
  }
  const Vec3 d = evaluate(derivative_curve(curve, 1), sigma);
  const double n = d.norm();
  if (!(n > tangent_threshold(curve))) {
    throw Error(ErrorCode::kVanishingTangent,
                fmt::format("|dr/du| = {} at u = {}", n, sigma));
  }
  return d / n;
}

Vec3 project_normal(const Vec3& surface_normal, const Vec3& tangent) {
  const double len = surface_normal.norm();
  if (!(len > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "surface normal is zero");
  }
  const Vec3 ns = surface_normal / len;
  const Vec3 rest = ns - ns.dot(tangent) * tangent;
  const double rn = rest.norm();
  if (rn < kNormalAngleEpsilon) {
    throw Error(ErrorCode::kNormalParallelToTangent,
                fmt::format("surface normal deviates only {} rad from the tangent",
                            std::asin(std::min(1.0, rn))));
  }
  return rest / rn;
}

ProcessFrameSample compute_process_frame(const BSplineCurve& curve,
                                         double sigma,
                                         const Vec3& surface_normal) {
  ProcessFrameSample f;
  f.sigma = sigma;
  f.position = evaluate(curve, sigma);
  f.tangent = compute_tangent(curve, sigma);
  f.normal = project_normal(surface_normal, f.tangent);
  f.binormal = f.tangent.cross(f.normal);
  f.rotation << f.tangent, f.normal, f.binormal;
  return f;
}

NormalField NormalField::constant(const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0.0) || !normal.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "constant surface normal must be non-zero");
  }
  NormalField field;
  field.normals_.push_back(normal / n);
  return field;
}

NormalField NormalField::per_point(std::vector<double> params,
                                   std::vector<Vec3> normals) {
  if (params.size() != normals.size() || params.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "per-point normals need one normal per parameter and >= 2 entries");
  }
  for (std::size_t k = 1; k < params.size(); ++k) {
    if (!(params[k] > params[k - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "per-point normal parameters must be strictly increasing");
    }
  }
  NormalField field;
  field.params_ = std::move(params);
  field.normals_ = std::move(normals);
  return field;
}

Vec3 NormalField::at(double u) const { return jet(u).v; }

VecJet NormalField::jet(double u) const {
  if (params_.empty()) return constant_jet(normals_.front());
  const double uc = std::clamp(u, params_.front(), params_.back());
  auto it = std::upper_bound(params_.begin(), params_.end(), uc);
  auto k = static_cast<std::size_t>(it - params_.begin());
  k = std::clamp<std::size_t>(k, 1, params_.size() - 1) - 1;
  const double h = params_[k + 1] - params_[k];
  const double x = (uc - params_[k]) / h;
  VecJet raw{(1.0 - x) * normals_[k] + x * normals_[k + 1],
             (normals_[k + 1] - normals_[k]) / h, Vec3::Zero()};
  if (raw.v.norm() < 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("interpolated surface normal vanishes at u = {}", u));
  }
  return normalized(raw).unit;
}

ProcessFrameJet process_frame_jet(const BSplineCurve& path,
                                  const BSplineCurve& d1,
                                  const BSplineCurve& d2,
                                  const BSplineCurve& d3, double u,
                                  const VecJet& surface_normal,
                                  double tangent_eps) {
  const Vec3 r1 = evaluate(d1, u);
  const Vec3 r2 = evaluate(d2, u);
  const VecJet position{evaluate(path, u), r1, r2};
  const VecJet velocity{r1, r2, evaluate(d3, u)};
  if (!(r1.norm() > tangent_eps)) {
    throw Error(ErrorCode::kVanishingTangent,
                fmt::format("|dr/du| = {} at u = {}", r1.norm(), u));
  }
  const VecJet t = normalized(velocity).unit;
  const VecJet& ns = surface_normal;
  const VecJet rest = ns - scale(dot(ns, t), t);
  if (rest.v.norm() < kNormalAngleEpsilon) {
    throw Error(ErrorCode::kNormalParallelToTangent,
                fmt::format("surface normal nearly parallel to the tangent at u = {}", u));
  }
  const VecJet n = normalized(rest).unit;
  const VecJet b = cross(t, n);
  return {position, columns(t, n, b)};
}

}  // namespace ftcp

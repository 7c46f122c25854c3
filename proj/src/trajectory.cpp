#include "ftcp/trajectory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftcp/errors.hpp"
#include "ftcp/frames.hpp"

namespace ftcp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec6 stack(const Vec3& a, const Vec3& b) {
  Vec6 out;
  out << a, b;
  return out;
}

}  // namespace

void unwrap_angles(std::span<double> angles) {
  for (std::size_t k = 1; k < angles.size(); ++k) {
    const double diff = angles[k] - angles[k - 1];
    angles[k] -= kTwoPi * std::round(diff / kTwoPi);
  }
}

ExactPosePath::ExactPosePath(const FixedTcpPath& path, int reference_samples)
    : path_(&path) {
  if (reference_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two reference samples");
  }
  const auto n = static_cast<std::size_t>(reference_samples);
  ref_sigma_.resize(n);
  ref_angles_.resize(n);
  std::vector<double> columns[3];
  for (auto& c : columns) c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double sigma = k + 1 == n ? path.length()
                                    : path.length() * static_cast<double>(k) /
                                          static_cast<double>(n - 1);
    ref_sigma_[k] = sigma;
    const Vec3 a = rotation_to_taitbryan(path.robot(sigma).rotation).vector();
    for (int c = 0; c < 3; ++c) columns[c][k] = a[c];
  }
  for (auto& c : columns) unwrap_angles(c);
  for (std::size_t k = 0; k < n; ++k) {
    ref_angles_[k] = Vec3(columns[0][k], columns[1][k], columns[2][k]);
  }
}

PoseDerivatives ExactPosePath::evaluate(double sigma) const {
  const PathJets j = path_->jets(sigma);
  VecJet angles = taitbryan_jet(j.robot_rotation);

  const auto it = std::upper_bound(ref_sigma_.begin(), ref_sigma_.end(), sigma);
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(it - ref_sigma_.begin()), 1,
                                         ref_sigma_.size() - 1) - 1;
  const double x = (sigma - ref_sigma_[k]) / (ref_sigma_[k + 1] - ref_sigma_[k]);
  const Vec3 ref = (1.0 - x) * ref_angles_[k] + x * ref_angles_[k + 1];
  for (int c = 0; c < 3; ++c) {
    angles.v[c] += kTwoPi * std::round((ref[c] - angles.v[c]) / kTwoPi);
  }
  return {stack(j.robot_position.v, angles.v), stack(j.robot_position.d1, angles.d1),
          stack(j.robot_position.d2, angles.d2)};
}

PoseSplines::PoseSplines(BSplineCurve position, BSplineCurve angles)
    : position_(std::move(position)),
      angles_(std::move(angles)),
      position_d1_(derivative_curve(position_, std::min(1, position_.degree()))),
      position_d2_(derivative_curve(position_, std::min(2, position_.degree()))),
      angles_d1_(derivative_curve(angles_, std::min(1, angles_.degree()))),
      angles_d2_(derivative_curve(angles_, std::min(2, angles_.degree()))) {
  const auto pk = position_.knots().knots();
  const auto ak = angles_.knots().knots();
  if (position_.degree() < 2 || position_.degree() != angles_.degree() ||
      !std::equal(pk.begin(), pk.end(), ak.begin(), ak.end())) {
    throw Error(ErrorCode::kInvalidArgument,
                "pose splines need a shared knot vector and degree >= 2");
  }
}

PoseDerivatives PoseSplines::evaluate(double sigma) const {
  const double u = sigma + position_.domain_begin();
  return {stack(ftcp::evaluate(position_, u), ftcp::evaluate(angles_, u)),
          stack(ftcp::evaluate(position_d1_, u), ftcp::evaluate(angles_d1_, u)),
          stack(ftcp::evaluate(position_d2_, u), ftcp::evaluate(angles_d2_, u))};
}

PoseSplineFit fit_pose_splines(std::span<const RobotPathSample> path,
                               int degree, int num_ctrl) {
  const auto n = path.size();
  if (static_cast<int>(n) < num_ctrl) {
    throw Error(ErrorCode::kUnderdeterminedFit,
                fmt::format("{} path samples cannot determine {} control points", n, num_ctrl));
  }
  if (num_ctrl < degree + 1 || degree < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("pose fit needs degree >= 2 and >= degree+1 control points"));
  }
  std::vector<double> params(n);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), 6);
  std::vector<double> angle_cols[3];
  for (auto& c : angle_cols) c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    params[k] = path[k].sigma;
    if (k > 0 && !(params[k] > params[k - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "path sigma values must increase");
    }
    const Vec3 a = rotation_to_taitbryan(path[k].rotation).vector();
    for (int c = 0; c < 3; ++c) angle_cols[c][k] = a[c];
    data.block<1, 3>(static_cast<Eigen::Index>(k), 0) = path[k].position.transpose();
  }
  for (auto& c : angle_cols) unwrap_angles(c);
  for (std::size_t k = 0; k < n; ++k) {
    for (int c = 0; c < 3; ++c) data(static_cast<Eigen::Index>(k), 3 + c) = angle_cols[c][k];
  }

  KnotVector kv = fitting_knots(params, degree, num_ctrl);
  const Eigen::MatrixXd ctrl = least_squares_control_points(kv, params, data, {});
  std::vector<Vec3> pos_ctrl(static_cast<std::size_t>(num_ctrl));
  std::vector<Vec3> ang_ctrl(static_cast<std::size_t>(num_ctrl));
  for (int i = 0; i < num_ctrl; ++i) {
    pos_ctrl[static_cast<std::size_t>(i)] = ctrl.block<1, 3>(i, 0).transpose();
    ang_ctrl[static_cast<std::size_t>(i)] = ctrl.block<1, 3>(i, 3).transpose();
  }
  PoseSplineFit fit{PoseSplines(BSplineCurve(kv, std::move(pos_ctrl)),
                                BSplineCurve(kv, std::move(ang_ctrl))),
                    {}};
  for (std::size_t k = 0; k < n; ++k) {
    const double u = params[k];
    const Vec3 p = evaluate(fit.splines.position(), u);
    const Vec3 a = evaluate(fit.splines.angles(), u);
    fit.report.max_position_deviation =
        std::max(fit.report.max_position_deviation, (p - path[k].position).norm());
    fit.report.max_angle_deviation =
        std::max(fit.report.max_angle_deviation,
                 geodesic_angle(taitbryan_to_rotation(TaitBryanAngles::from(a)),
                                path[k].rotation));
  }
  return fit;
}

Vec3 tcp_velocity(const Mat3& ee_rotation, const SetupConfig& setup,
                  const Vec3& path_tangent_dsigma, double sigma_dot) {
  if (sigma_dot == 0.0) return Vec3::Zero();
  return ee_rotation * setup.mount_rotation.transpose() * path_tangent_dsigma * sigma_dot;
}

TrajectorySample trajectory_at(const PosePath& path, const ScalarProfile& profile,
                               double t, const FixedTcpPath* contact) {
  const ProfileState st = eval_profile(profile, t);
  TrajectorySample s;
  s.t = t;
  s.sigma = std::clamp(st.position, 0.0, path.length());
  const PoseDerivatives pd = path.evaluate(s.sigma);
  s.pose = pd.z;
  s.velocity = pd.dz * st.velocity;
  s.acceleration = pd.ddz * (st.velocity * st.velocity) + pd.dz * st.acceleration;

  const TaitBryanAngles angles = TaitBryanAngles::from(s.pose.tail<3>());
  const Vec3 rates = s.velocity.tail<3>();
  s.omega = euler_rate_to_angular_velocity(angles, rates);
  s.alpha = euler_accel_to_angular_acceleration(angles, rates, s.acceleration.tail<3>());

  if (contact != nullptr && st.velocity != 0.0) {
    const PathJets j = contact->jets(std::min(s.sigma, contact->length()));
    s.tcp_velocity = tcp_velocity(taitbryan_to_rotation(angles), contact->setup(),
                                  j.process_position.d1, st.velocity);
  }
  return s;
}

std::vector<TrajectorySample> sample_trajectory(const PosePath& path,
                                                const ScalarProfile& profile,
                                                double rate_hz,
                                                const FixedTcpPath* contact) {
  if (!(rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  const double length = path.length();
  if (std::abs(profile.displacement() - length) > 1e-9 * std::max(1.0, length)) {
    throw Error(ErrorCode::kDomainMismatch,
                fmt::format("profile covers {} but the path sigma-domain has length {}",
                            profile.displacement(), length));
  }
  if (contact != nullptr && std::abs(contact->length() - length) > 1e-9 * std::max(1.0, length)) {
    throw Error(ErrorCode::kDomainMismatch, "contact path and pose path lengths differ");
  }
  const double total = profile.duration();
  const auto steps = static_cast<std::size_t>(std::floor(total * rate_hz));
  std::vector<TrajectorySample> out;
  out.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(static_cast<double>(k) / rate_hz, total);
    out.push_back(trajectory_at(path, profile, t, contact));
  }
  if (out.back().t < total) out.push_back(trajectory_at(path, profile, total, contact));
  return out;
}

std::vector<double> detect_cusps(std::span<const double> sigma,
                                 std::span<const Vec3> points,
                                 double threshold_rad) {
  if (sigma.size() != points.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sigma and point counts differ");
  }
  if (points.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "cusp detection needs >= 3 samples");
  }
  std::vector<double> cusps;
  double run_best = -1.0;
  double run_sigma = 0.0;
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const Vec3 before = points[i] - points[i - 1];
    const Vec3 after = points[i + 1] - points[i];
    double turn = 0.0;
    if (before.norm() > 0.0 && after.norm() > 0.0) {
      turn = std::atan2(before.cross(after).norm(), before.dot(after));
    }
    if (turn > threshold_rad) {
      if (turn > run_best) {
        run_best = turn;
        run_sigma = sigma[i];
      }
    } else if (run_best >= 0.0) {
      cusps.push_back(run_sigma);
      run_best = -1.0;
    }
  }
  if (run_best >= 0.0) cusps.push_back(run_sigma);
  return cusps;
}

}  // namespace ftcp

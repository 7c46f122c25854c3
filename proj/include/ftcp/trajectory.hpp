#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ftcp/fixed_tcp.hpp"
#include "ftcp/profile.hpp"
#include "ftcp/spline.hpp"

namespace ftcp {

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Pose z = [r_0E; phi_0E] (Tait-Bryan X-Y-Z) with its sigma-derivatives.
struct PoseDerivatives {
  Vec6 z = Vec6::Zero();
  Vec6 dz = Vec6::Zero();
  Vec6 ddz = Vec6::Zero();
};

// A robot path as a function of the path parameter sigma in [0, length()].
class PosePath {
 public:
  virtual ~PosePath() = default;
  virtual double length() const = 0;
  virtual PoseDerivatives evaluate(double sigma) const = 0;
};

// Adds multiples of 2 pi so consecutive angles differ by at most pi.
void unwrap_angles(std::span<double> angles);

// The exact composition of processing path and setup. Angles are kept
// continuous by matching the branch of a reference set of unwrapped samples.
class ExactPosePath final : public PosePath {
 public:
  ExactPosePath(const FixedTcpPath& path, int reference_samples);

  double length() const override { return path_->length(); }
  PoseDerivatives evaluate(double sigma) const override;

 private:
  const FixedTcpPath* path_;
  std::vector<double> ref_sigma_;
  std::vector<Vec3> ref_angles_;
};

struct PoseFitReport {
  double max_position_deviation = 0.0;  // m, at the fitted samples
  double max_angle_deviation = 0.0;     // rad, geodesic, at the fitted samples
};

// Position and unwrapped angle splines over sigma sharing one knot vector.
class PoseSplines final : public PosePath {
 public:
  PoseSplines(BSplineCurve position, BSplineCurve angles);

  double length() const override { return position_.domain_end() - position_.domain_begin(); }
  PoseDerivatives evaluate(double sigma) const override;

  const BSplineCurve& position() const noexcept { return position_; }
  const BSplineCurve& angles() const noexcept { return angles_; }

 private:
  BSplineCurve position_;
  BSplineCurve angles_;
  BSplineCurve position_d1_, position_d2_;
  BSplineCurve angles_d1_, angles_d2_;
};

struct PoseSplineFit {
  PoseSplines splines;
  PoseFitReport report;
};

// Least-squares fit of the six pose coordinates over the samples' sigma
// values (which must start at 0 and increase).
PoseSplineFit fit_pose_splines(std::span<const RobotPathSample> path,
                               int degree, int num_ctrl);

struct TrajectorySample {
  double t = 0.0;
  double sigma = 0.0;
  Vec6 pose = Vec6::Zero();          // z_E
  Vec6 velocity = Vec6::Zero();      // dz_E/dt
  Vec6 acceleration = Vec6::Zero();  // d2z_E/dt2
  Vec3 omega = Vec3::Zero();         // omega_0E
  Vec3 alpha = Vec3::Zero();         // angular acceleration
  Vec3 tcp_velocity = Vec3::Zero();  // v_0T
};

// Velocity of the process frame along the path at the TCP, in inertial axes:
// R_IP * dr_PF/dsigma * sigma_dot with R_IP = R_IE R_PE^T.
Vec3 tcp_velocity(const Mat3& ee_rotation, const SetupConfig& setup,
                  const Vec3& path_tangent_dsigma, double sigma_dot);

// Combines pose path and time law with the chain rule
//   zdot = z' sigma_dot,  zddot = z'' sigma_dot^2 + z' sigma_ddot.
// Samples at k / rate_hz and at the final time. With `contact` given, v_0T is
// filled from its processing path.
std::vector<TrajectorySample> sample_trajectory(const PosePath& path,
                                                const ScalarProfile& profile,
                                                double rate_hz,
                                                const FixedTcpPath* contact = nullptr);

// Single-time evaluation used by sample_trajectory.
TrajectorySample trajectory_at(const PosePath& path, const ScalarProfile& profile,
                               double t, const FixedTcpPath* contact = nullptr);

// Sigma values where the direction of travel between adjacent samples turns
// by more than `threshold_rad`. Runs of consecutive detections are merged into
// the sample with the largest turn.
std::vector<double> detect_cusps(std::span<const double> sigma,
                                 std::span<const Vec3> points,
                                 double threshold_rad);

}  // namespace ftcp

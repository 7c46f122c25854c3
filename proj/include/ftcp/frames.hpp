#pragma once

#include <span>
#include <vector>

#include "ftcp/jet.hpp"
#include "ftcp/spline.hpp"

namespace ftcp {

// Rotations are plain 3x3 matrices; these helpers enforce R R^T = I and
// det R = 1 where rotations enter the library.
bool is_rotation(const Mat3& r, double tol = 1e-9);
void require_rotation(const Mat3& r, const char* what);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

Mat3 skew(const Vec3& w);
// Axial vector of the skew-symmetric part of m.
Vec3 vee(const Mat3& m);

// Angle of the relative rotation a^T b, in [0, pi].
double geodesic_angle(const Mat3& a, const Mat3& b);

// X-Y-Z Tait-Bryan angles with R = R_x(alpha) R_y(beta) R_z(gamma).
struct TaitBryanAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Vec3 vector() const { return {alpha, beta, gamma}; }
  static TaitBryanAngles from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

inline constexpr double kGimbalLockTolerance = 1e-6;

Mat3 taitbryan_to_rotation(const TaitBryanAngles& angles);

// Branch |beta| <= pi/2, alpha and gamma in (-pi, pi]. Throws GimbalLock when
// beta is within kGimbalLockTolerance of +-pi/2.
TaitBryanAngles rotation_to_taitbryan(const Mat3& r);

// Matrix T(phi) with omega = T(phi) * phi_dot, columns
// e_1, R_x(alpha) e_2, R_x(alpha) R_y(beta) e_3.
Mat3 angular_velocity_map(const TaitBryanAngles& angles);
// dT/dt along an angle trajectory with the given rates.
Mat3 angular_velocity_map_rate(const TaitBryanAngles& angles, const Vec3& rates);

Vec3 euler_rate_to_angular_velocity(const TaitBryanAngles& angles,
                                    const Vec3& rates);
// d(omega)/dt = dT/dt * phi_dot + T * phi_ddot
Vec3 euler_accel_to_angular_acceleration(const TaitBryanAngles& angles,
                                         const Vec3& rates, const Vec3& accels);

// Tait-Bryan angles of a rotation jet, with exact first and second
// derivatives along the jet parameter. Angles are wrapped.
VecJet taitbryan_jet(const MatJet& r);

// Threshold below which |dr/du| counts as vanishing: 1e-8 times the curve's
// length scale per unit parameter.
double tangent_threshold(const BSplineCurve& curve);

Vec3 compute_tangent(const BSplineCurve& curve, double sigma);

// n_s with its component along t removed, renormalized. Throws
// NormalParallelToTangent when the remainder is shorter than 1e-3.
inline constexpr double kNormalAngleEpsilon = 1e-3;
Vec3 project_normal(const Vec3& surface_normal, const Vec3& tangent);

struct ProcessFrameSample {
  double sigma = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  Vec3 normal = Vec3::UnitY();
  Vec3 binormal = Vec3::UnitZ();
  Mat3 rotation = Mat3::Identity();  // columns [t, n, b]
};

ProcessFrameSample compute_process_frame(const BSplineCurve& curve,
                                         double sigma,
                                         const Vec3& surface_normal);

// Prescribed surface normal along the path: one constant vector, or
// per-point normals at increasing parameters, linearly interpolated and
// renormalized.
class NormalField {
 public:
  static NormalField constant(const Vec3& normal);
  static NormalField per_point(std::vector<double> params,
                               std::vector<Vec3> normals);

  Vec3 at(double u) const;
  // Normalized interpolant with its u-derivatives (one-sided at data points).
  VecJet jet(double u) const;
  // Parameters where the interpolant has kinks.
  std::span<const double> breakpoints() const noexcept { return params_; }

 private:
  std::vector<double> params_;
  std::vector<Vec3> normals_;
};

// Process frame with derivatives: the path point r(u), its rotation
// [t, n, b], each with exact u-derivatives up to second order. `d1`..`d3` are
// the derivative curves of the path.
struct ProcessFrameJet {
  VecJet position;
  MatJet rotation;
};

ProcessFrameJet process_frame_jet(const BSplineCurve& path,
                                  const BSplineCurve& d1,
                                  const BSplineCurve& d2,
                                  const BSplineCurve& d3, double u,
                                  const VecJet& surface_normal,
                                  double tangent_eps);

}  // namespace ftcp

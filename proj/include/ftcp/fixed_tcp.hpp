#pragma once

#include <span>
#include <vector>

#include "ftcp/frames.hpp"
#include "ftcp/spline.hpp"

namespace ftcp {

// Rigid setup of the fixed-tool cell. The part is held by the end effector
// with a constant mount pose; the tool sits at a constant pose in the robot's
// inertial frame.
struct SetupConfig {
  Vec3 mount_position = Vec3::Zero();       // r_PE, part frame
  Mat3 mount_rotation = Mat3::Identity();   // R_PE
  Vec3 tool_position = Vec3::Zero();        // r_0T, inertial frame
  Mat3 tool_rotation = Mat3::Identity();    // R_IT

  void validate() const;
};

// End-effector pose relative to the tool frame.
struct RelativePose {
  Vec3 position_in_tool;  // r_TE expressed in F_T
  Mat3 rotation;          // R_TE
};

// The current path point is identified with the tool frame (r_PT = r_PF,
// R_PT = R_PF).
RelativePose relative_pose(const ProcessFrameSample& frame,
                           const SetupConfig& setup);

struct RobotPathSample {
  double sigma = 0.0;
  Vec3 position = Vec3::Zero();       // r_0E, inertial frame
  Mat3 rotation = Mat3::Identity();   // R_IE
};

RobotPathSample robot_pose(const ProcessFrameSample& frame,
                           const SetupConfig& setup);

struct FixedTcpReport {
  double max_position_drift = 0.0;     // m
  double max_orientation_drift = 0.0;  // rad
  std::size_t worst_position_index = 0;
  std::size_t worst_orientation_index = 0;
};

// Reconstructs the part pose from each end-effector pose and measures how far
// the current path frame is from the tool pose.
FixedTcpReport verify_fixed_tcp(std::span<const ProcessFrameSample> frames,
                                std::span<const RobotPathSample> robot,
                                const SetupConfig& setup);

// Part pose (R_IP, r_0P) implied by an end-effector pose.
struct PartPose {
  Mat3 rotation;
  Vec3 position;
};
PartPose part_pose_from_end_effector(const Vec3& ee_position,
                                     const Mat3& ee_rotation,
                                     const SetupConfig& setup);

enum class SpeedFrame { kTcp, kEndEffector };

// Everything along the path at one sigma, with exact sigma-derivatives.
struct PathJets {
  double sigma = 0.0;
  double u = 0.0;
  VecJet process_position;  // r_PF
  MatJet process_rotation;  // R_PF
  VecJet robot_position;    // r_0E
  MatJet robot_rotation;    // R_IE
};

// The processing path composed with the fixed-tool setup, parameterized by
// arc length sigma of either the processing path or the resulting robot path.
class FixedTcpPath {
 public:
  FixedTcpPath(BSplineCurve processing, NormalField normals, SetupConfig setup,
               SpeedFrame speed_frame, int table_samples = 1024);

  double length() const noexcept { return table_.length(); }
  SpeedFrame speed_frame() const noexcept { return speed_frame_; }
  const BSplineCurve& processing() const noexcept { return path_; }
  const SetupConfig& setup() const noexcept { return setup_; }
  const NormalField& normals() const noexcept { return normals_; }
  const ArcLengthTable& table() const noexcept { return table_; }

  // Curve parameter u at arc length sigma.
  double parameter_at(double sigma) const;

  ProcessFrameSample frame(double sigma) const;
  RobotPathSample robot(double sigma) const;
  PathJets jets(double sigma) const;

 private:
  struct UJets {
    VecJet process_position;
    MatJet process_rotation;
    VecJet robot_position;
    MatJet robot_rotation;
  };
  UJets jets_in_u(double u) const;
  SpeedSample speed(double u) const;

  BSplineCurve path_;
  BSplineCurve d1_;
  BSplineCurve d2_;
  BSplineCurve d3_;
  NormalField normals_;
  SetupConfig setup_;
  SpeedFrame speed_frame_;
  double tangent_eps_;
  ArcLengthTable table_;
};

}  // namespace ftcp

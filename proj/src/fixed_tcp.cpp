#include "ftcp/fixed_tcp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "ftcp/errors.hpp"

namespace ftcp {

void SetupConfig::validate() const {
  if (!mount_position.allFinite() || !tool_position.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "setup positions must be finite");
  }
  require_rotation(mount_rotation, "mount rotation R_PE");
  require_rotation(tool_rotation, "tool rotation R_IT");
}

RelativePose relative_pose(const ProcessFrameSample& frame,
                           const SetupConfig& setup) {
  const Mat3 tool_from_part = frame.rotation.transpose();  // R_TP
  const Vec3 te_in_part = setup.mount_position - frame.position;
  return {tool_from_part * te_in_part, tool_from_part * setup.mount_rotation};
}

RobotPathSample robot_pose(const ProcessFrameSample& frame,
                           const SetupConfig& setup) {
  const RelativePose rel = relative_pose(frame, setup);
  return {frame.sigma, setup.tool_position + setup.tool_rotation * rel.position_in_tool,
          setup.tool_rotation * rel.rotation};
}

PartPose part_pose_from_end_effector(const Vec3& ee_position,
                                     const Mat3& ee_rotation,
                                     const SetupConfig& setup) {
  const Mat3 r_ip = ee_rotation * setup.mount_rotation.transpose();
  return {r_ip, ee_position - r_ip * setup.mount_position};
}

FixedTcpReport verify_fixed_tcp(std::span<const ProcessFrameSample> frames,
                                std::span<const RobotPathSample> robot,
                                const SetupConfig& setup) {
  if (frames.size() != robot.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} frames but {} robot samples", frames.size(), robot.size()));
  }
  if (frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no samples to verify");
  }
  FixedTcpReport report;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const PartPose part = part_pose_from_end_effector(robot[k].position, robot[k].rotation, setup);
    const Vec3 contact = part.position + part.rotation * frames[k].position;
    const double dp = (contact - setup.tool_position).norm();
    const double dr = geodesic_angle(part.rotation * frames[k].rotation, setup.tool_rotation);
    if (dp > report.max_position_drift) {
      report.max_position_drift = dp;
      report.worst_position_index = k;
    }
    if (dr > report.max_orientation_drift) {
      report.max_orientation_drift = dr;
      report.worst_orientation_index = k;
    }
  }
  return report;
}

namespace {

BSplineCurve derivative_or_zero(const BSplineCurve& curve, int order) {
  if (order <= curve.degree()) return derivative_curve(curve, order);
  return BSplineCurve(KnotVector({curve.domain_begin(), curve.domain_end()}, 0),
                      {Vec3::Zero()});
}

}  // namespace

FixedTcpPath::FixedTcpPath(BSplineCurve processing, NormalField normals,
                           SetupConfig setup, SpeedFrame speed_frame,
                           int table_samples)
    : path_(std::move(processing)),
      d1_(derivative_or_zero(path_, 1)),
      d2_(derivative_or_zero(path_, 2)),
      d3_(derivative_or_zero(path_, 3)),
      normals_(std::move(normals)),
      setup_(std::move(setup)),
      speed_frame_(speed_frame),
      tangent_eps_(tangent_threshold(path_)) {
  if (path_.degree() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "processing path needs degree >= 1");
  }
  setup_.validate();
  std::vector<double> bp = path_.knots().breakpoints();
  for (double u : normals_.breakpoints()) {
    if (u > path_.domain_begin() && u < path_.domain_end()) bp.push_back(u);
  }
  std::sort(bp.begin(), bp.end());
  table_ = ArcLengthTable::build([this](double u) { return speed(u); }, bp, table_samples);
}

SpeedSample FixedTcpPath::speed(double u) const {
  Vec3 v;
  Vec3 a;
  if (speed_frame_ == SpeedFrame::kTcp) {
    v = evaluate(d1_, u);
    a = evaluate(d2_, u);
  } else {
    const UJets j = jets_in_u(u);
    v = j.robot_position.d1;
    a = j.robot_position.d2;
  }
  const double n = v.norm();
  return {n, n > 0.0 ? v.dot(a) / n : 0.0};
}

FixedTcpPath::UJets FixedTcpPath::jets_in_u(double u) const {
  const ProcessFrameJet f =
      process_frame_jet(path_, d1_, d2_, d3_, u, normals_.jet(u), tangent_eps_);
  const MatJet rt = transpose(f.rotation);
  const VecJet lever{setup_.mount_position - f.position.v, -f.position.d1, -f.position.d2};
  const VecJet in_tool = mul(rt, lever);
  const Mat3& r_it = setup_.tool_rotation;
  const Mat3& r_pe = setup_.mount_rotation;
  UJets out{f.position, f.rotation, {}, {}};
  out.robot_position = {setup_.tool_position + r_it * in_tool.v, r_it * in_tool.d1,
                        r_it * in_tool.d2};
  out.robot_rotation = {r_it * rt.v * r_pe, r_it * rt.d1 * r_pe, r_it * rt.d2 * r_pe};
  return out;
}

double FixedTcpPath::parameter_at(double sigma) const {
  if (sigma < 0.0 || sigma > length()) {
    throw Error(ErrorCode::kOutOfDomain,
                fmt::format("sigma = {} outside [0, {}]", sigma, length()));
  }
  return table_.u_at(sigma);
}

ProcessFrameSample FixedTcpPath::frame(double sigma) const {
  const double u = parameter_at(sigma);
  const Vec3 d = evaluate(d1_, u);
  const double n = d.norm();
  if (!(n > tangent_eps_)) {
    throw Error(ErrorCode::kVanishingTangent, fmt::format("|dr/du| = {} at u = {}", n, u));
  }
  ProcessFrameSample f;
  f.sigma = sigma;
  f.position = evaluate(path_, u);
  f.tangent = d / n;
  f.normal = project_normal(normals_.at(u), f.tangent);
  f.binormal = f.tangent.cross(f.normal);
  f.rotation << f.tangent, f.normal, f.binormal;
  return f;
}

RobotPathSample FixedTcpPath::robot(double sigma) const {
  return robot_pose(frame(sigma), setup_);
}

PathJets FixedTcpPath::jets(double sigma) const {
  const double u = parameter_at(sigma);
  const UJets j = jets_in_u(u);
  const VecJet& ref = speed_frame_ == SpeedFrame::kTcp ? j.process_position : j.robot_position;
  const double spd = ref.d1.norm();
  if (!(spd > tangent_eps_)) {
    throw Error(ErrorCode::kVanishingTangent,
                fmt::format("path speed {} vanishes at sigma = {}", spd, sigma));
  }
  const double dspd = ref.d1.dot(ref.d2) / spd;
  const double du = 1.0 / spd;
  const double ddu = -dspd / (spd * spd * spd);
  return {sigma,
          u,
          chain(j.process_position, du, ddu),
          chain(j.process_rotation, du, ddu),
          chain(j.robot_position, du, ddu),
          chain(j.robot_rotation, du, ddu)};
}

}  // namespace ftcp

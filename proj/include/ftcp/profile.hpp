#pragma once

#include <vector>

namespace ftcp {

struct MotionLimits {
  double v_max = 0.0;  // m/s
  double a_max = 0.0;  // m/s^2
  double j_max = 0.0;  // m/s^3

  void validate() const;
};

struct ProfileState {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double jerk = 0.0;
};

// One phase of the time law. Jerk phases are sin^2 pulses
// j(tau) = jerk_amplitude * sin^2(pi tau / duration); other phases have
// constant acceleration (jerk_amplitude == 0).
struct ProfileSegment {
  enum class Kind { kJerkPulse, kConstant };
  Kind kind = Kind::kConstant;
  double start_time = 0.0;
  double duration = 0.0;
  double jerk_amplitude = 0.0;
  ProfileState start;  // jerk field unused
};

// Rest-to-rest time law sigma(t) built from up to seven phases:
// jerk up, constant acceleration, jerk down, cruise, and the mirrored braking
// phases. Zero-length phases are dropped.
class ScalarProfile {
 public:
  ScalarProfile(std::vector<ProfileSegment> segments, double displacement,
                MotionLimits limits, double peak_velocity,
                double peak_acceleration);

  double duration() const noexcept { return duration_; }
  double displacement() const noexcept { return displacement_; }
  const MotionLimits& limits() const noexcept { return limits_; }
  double peak_velocity() const noexcept { return peak_velocity_; }
  double peak_acceleration() const noexcept { return peak_acceleration_; }
  const std::vector<ProfileSegment>& segments() const noexcept { return segments_; }

  // Time window of the constant-velocity phase; empty (begin == end) if the
  // profile never cruises.
  double cruise_begin() const noexcept { return cruise_begin_; }
  double cruise_end() const noexcept { return cruise_end_; }

 private:
  std::vector<ProfileSegment> segments_;
  double displacement_;
  MotionLimits limits_;
  double peak_velocity_;
  double peak_acceleration_;
  double duration_ = 0.0;
  double cruise_begin_ = 0.0;
  double cruise_end_ = 0.0;
};

// Time-optimal profile within the sin^2 pulse family: every jerk pulse runs
// at j_max, the acceleration plateau at a_max and the cruise at v_max where
// the displacement allows it.
ScalarProfile plan_profile(double displacement, const MotionLimits& limits);

ProfileState eval_profile(const ScalarProfile& profile, double t);

// State at time tau into a single segment.
ProfileState eval_segment(const ProfileSegment& segment, double tau);

}  // namespace ftcp

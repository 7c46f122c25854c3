#include "ftcp/profile.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftcp/errors.hpp"

namespace ftcp {

void MotionLimits::validate() const {
  for (double v : {v_max, a_max, j_max}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("motion limits must be positive (v={}, a={}, j={})",
                              v_max, a_max, j_max));
    }
  }
}

namespace {

// Integrals of sin^2(x/2) with x = w tau. The closed forms cancel badly for
// small x, so a Taylor series takes over there.
struct PulseIntegrals {
  double accel;
  double vel;
  double pos;
};

PulseIntegrals pulse_integrals(double w, double tau) {
  const double x = w * tau;
  if (x < 0.05) {
    const double x2 = x * x;
    const double x3 = x2 * x;
    const double x4 = x2 * x2;
    const double x5 = x4 * x;
    const double a = x3 * (1.0 / 6 - x2 / 120 + x4 / 5040 - x4 * x2 / 362880) / (2 * w);
    const double v = x4 * (1.0 / 24 - x2 / 720 + x4 / 40320 - x4 * x2 / 3628800) / (2 * w * w);
    const double s = x5 * (1.0 / 120 - x2 / 5040 + x4 / 362880 - x4 * x2 / 39916800) /
                     (2 * w * w * w);
    return {a, v, s};
  }
  const double sx = std::sin(x);
  const double cx = std::cos(x);
  return {(x - sx) / (2 * w), (0.5 * x * x + cx - 1.0) / (2 * w * w),
          (x * x * x / 6 + sx - x) / (2 * w * w * w)};
}

struct AccelPhase {
  double accel;        // plateau acceleration A
  double pulse;        // Tj
  double plateau;      // Ta
  double distance() const;
  double velocity() const { return accel * (pulse + plateau); }
};

// From rest to velocity v with pulses at amplitude j_max.
AccelPhase accel_phase(double v, const MotionLimits& lim) {
  const double a_full = lim.a_max;
  if (v >= 2.0 * a_full * a_full / lim.j_max) {
    const double tj = 2.0 * a_full / lim.j_max;
    return {a_full, tj, std::max(0.0, v / a_full - tj)};
  }
  const double a = std::sqrt(v * lim.j_max / 2.0);
  return {a, 2.0 * a / lim.j_max, 0.0};
}

// The acceleration profile is symmetric in time, so the mean velocity is v/2.
double AccelPhase::distance() const {
  return 0.5 * velocity() * (2.0 * pulse + plateau);
}

double peak_velocity_for(double displacement, const MotionLimits& lim) {
  const double half = 0.5 * displacement;
  if (accel_phase(lim.v_max, lim).distance() <= half) return lim.v_max;

  double v;
  const double v_switch = 2.0 * lim.a_max * lim.a_max / lim.j_max;
  const double v_pulses_only = std::cbrt(displacement * displacement * lim.j_max / 8.0);
  if (v_pulses_only < v_switch) {
    v = v_pulses_only;
  } else {
    const double tj = 2.0 * lim.a_max / lim.j_max;
    v = 0.5 * lim.a_max * (-tj + std::sqrt(tj * tj + 4.0 * displacement / lim.a_max));
  }
  v = std::min(v, lim.v_max);
  if (std::abs(accel_phase(v, lim).distance() - half) <= 1e-12 * displacement) return v;

  double lo = 0.0;
  double hi = lim.v_max;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * lim.v_max; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (accel_phase(mid, lim).distance() < half) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ProfileState eval_segment(const ProfileSegment& seg, double tau) {
  const ProfileState& s0 = seg.start;
  ProfileState out;
  out.position = s0.position + s0.velocity * tau + 0.5 * s0.acceleration * tau * tau;
  out.velocity = s0.velocity + s0.acceleration * tau;
  out.acceleration = s0.acceleration;
  if (seg.kind == ProfileSegment::Kind::kJerkPulse) {
    const double j = seg.jerk_amplitude;
    const double w = 2.0 * std::numbers::pi / seg.duration;
    const PulseIntegrals in = pulse_integrals(w, tau);
    const double sh = std::sin(0.5 * w * tau);
    out.jerk = j * sh * sh;
    out.acceleration += j * in.accel;
    out.velocity += j * in.vel;
    out.position += j * in.pos;
  }
  return out;
}

ScalarProfile::ScalarProfile(std::vector<ProfileSegment> segments,
                             double displacement, MotionLimits limits,
                             double peak_velocity, double peak_acceleration)
    : segments_(std::move(segments)),
      displacement_(displacement),
      limits_(limits),
      peak_velocity_(peak_velocity),
      peak_acceleration_(peak_acceleration) {
  if (segments_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "profile without segments");
  }
  const ProfileSegment& last = segments_.back();
  duration_ = last.start_time + last.duration;
  for (const auto& seg : segments_) {
    if (seg.kind == ProfileSegment::Kind::kConstant && seg.start.acceleration == 0.0 &&
        seg.start.velocity > 0.0) {
      cruise_begin_ = seg.start_time;
      cruise_end_ = seg.start_time + seg.duration;
    }
  }
}

ScalarProfile plan_profile(double displacement, const MotionLimits& limits) {
  if (!(displacement > 0.0) || !std::isfinite(displacement)) {
    throw Error(ErrorCode::kNonpositiveDisplacement,
                fmt::format("displacement {} must be positive", displacement));
  }
  limits.validate();

  const double v_peak = peak_velocity_for(displacement, limits);
  const AccelPhase acc = accel_phase(v_peak, limits);
  const double cruise = std::max(0.0, (displacement - 2.0 * acc.distance()) / v_peak);
  const double j = limits.j_max;

  using Kind = ProfileSegment::Kind;
  const struct {
    Kind kind;
    double duration;
    double jerk;
  } phases[] = {
      {Kind::kJerkPulse, acc.pulse, j},   {Kind::kConstant, acc.plateau, 0.0},
      {Kind::kJerkPulse, acc.pulse, -j},  {Kind::kConstant, cruise, 0.0},
      {Kind::kJerkPulse, acc.pulse, -j},  {Kind::kConstant, acc.plateau, 0.0},
      {Kind::kJerkPulse, acc.pulse, j},
  };

  std::vector<ProfileSegment> segments;
  ProfileState state;
  double t = 0.0;
  for (const auto& ph : phases) {
    if (!(ph.duration > 0.0)) continue;
    ProfileSegment seg{ph.kind, t, ph.duration, ph.jerk, state};
    state = eval_segment(seg, ph.duration);
    state.jerk = 0.0;
    // The closed-form ends of the pulses are exact up to rounding; snap the
    // quantities that must vanish.
    if (ph.kind == Kind::kJerkPulse && ph.jerk * seg.start.acceleration < 0.0) {
      state.acceleration = 0.0;
    }
    t += ph.duration;
    segments.push_back(seg);
  }
  return ScalarProfile(std::move(segments), displacement, limits, v_peak, acc.accel);
}

ProfileState eval_profile(const ScalarProfile& profile, double t) {
  if (!(t >= 0.0 && t <= profile.duration())) {
    throw Error(ErrorCode::kOutOfTimeRange,
                fmt::format("t = {} outside [0, {}]", t, profile.duration()));
  }
  if (t == profile.duration()) return {profile.displacement(), 0.0, 0.0, 0.0};
  const auto& segs = profile.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double value, const ProfileSegment& s) {
                               return value < s.start_time;
                             });
  const ProfileSegment& seg = *std::prev(it);
  const double tau = std::clamp(t - seg.start_time, 0.0, seg.duration);
  return eval_segment(seg, tau);
}

}  // namespace ftcp

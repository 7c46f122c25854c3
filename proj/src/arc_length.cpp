#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "ftcp/errors.hpp"
#include "ftcp/spline.hpp"

namespace ftcp {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 4> kGaussNodes = {
    0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
    0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
    0.1012285362903763};

double integrate_speed(const SpeedFunction& speed, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    const double dx = half * kGaussNodes[i];
    sum += kGaussWeights[i] * (speed(mid - dx).speed + speed(mid + dx).speed);
  }
  return sum * half;
}

constexpr std::size_t kMaxNodes = std::size_t{1} << 22;

}  // namespace

ArcLengthTable ArcLengthTable::build(const SpeedFunction& speed,
                                     std::span<const double> breakpoints,
                                     int min_samples, double rel_tol) {
  if (min_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "arc-length table needs >= 2 samples");
  }
  if (breakpoints.size() < 2 || !std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      !(breakpoints.front() < breakpoints.back())) {
    throw Error(ErrorCode::kInvalidArgument, "invalid arc-length breakpoints");
  }
  std::vector<double> bp;
  std::unique_copy(breakpoints.begin(), breakpoints.end(), std::back_inserter(bp));
  const std::size_t spans = bp.size() - 1;
  std::size_t per_span = std::max<std::size_t>(
      1, (static_cast<std::size_t>(min_samples) - 1 + spans - 1) / spans);

  ArcLengthTable table;
  double previous = -1.0;
  while (true) {
    std::vector<double> u;
    u.reserve(spans * per_span + 1);
    for (std::size_t k = 0; k < spans; ++k) {
      for (std::size_t i = 0; i < per_span; ++i) {
        u.push_back(bp[k] + (bp[k + 1] - bp[k]) * static_cast<double>(i) /
                                static_cast<double>(per_span));
      }
    }
    u.push_back(bp.back());
    const std::size_t intervals = u.size() - 1;
    std::vector<double> s(u.size(), 0.0);
    for (std::size_t k = 1; k < u.size(); ++k) {
      s[k] = s[k - 1] + integrate_speed(speed, u[k - 1], u[k]);
    }

    // Node speeds and their derivatives. Breakpoints may carry a kink in the
    // speed's derivative, so intervals there sample it from their own side.
    std::vector<SpeedSample> node(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) node[k] = speed(u[k]);
    std::vector<double> slope(4 * intervals);
    for (std::size_t k = 0; k < intervals; ++k) {
      const double h = u[k + 1] - u[k];
      double d0 = node[k].dspeed;
      double d1 = node[k + 1].dspeed;
      if (k % per_span == 0) d0 = speed(u[k] + 1e-9 * h).dspeed;
      if ((k + 1) % per_span == 0) d1 = speed(u[k + 1] - 1e-9 * h).dspeed;
      slope[4 * k] = node[k].speed;
      slope[4 * k + 1] = node[k + 1].speed;
      slope[4 * k + 2] = d0;
      slope[4 * k + 3] = d1;
    }
    table.u_ = std::move(u);
    table.s_ = std::move(s);
    table.slope_ = std::move(slope);

    const double total = table.s_.back();
    bool converged = previous >= 0.0 && std::abs(total - previous) <= rel_tol * total;
    // The interpolant's slope has to reproduce the speed between nodes too,
    // otherwise u(s) and the exact speed disagree on ds/du.
    const double speed_floor = 1e-6 * total / (bp.back() - bp.front());
    for (std::size_t k = 0; converged && k < intervals; ++k) {
      const double mid = 0.5 * (table.u_[k] + table.u_[k + 1]);
      const double v = speed(mid).speed;
      converged = std::abs(table.hermite_slope(k, mid) - v) <= rel_tol * std::max(v, speed_floor) &&
                  table.hermite_slope(k, mid) > 0.0;
    }
    if (converged || table.u_.size() * 2 > kMaxNodes) break;
    previous = total;
    per_span *= 2;
  }
  if (!(table.length() > 0.0)) {
    throw Error(ErrorCode::kDegeneratePolygon, "curve has zero length");
  }
  return table;
}

// Quintic Hermite interpolant matching s, ds/du and d2s/du2 at both ends.
double ArcLengthTable::hermite(std::size_t k, double u) const {
  const double h = u_[k + 1] - u_[k];
  const double x = (u - u_[k]) / h;
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
  const double* m = &slope_[4 * k];
  return s_[k] * (1 - 10 * x3 + 15 * x4 - 6 * x5) + h * m[0] * (x - 6 * x3 + 8 * x4 - 3 * x5) +
         h * h * m[2] * (0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5) +
         h * h * m[3] * (0.5 * x3 - x4 + 0.5 * x5) + h * m[1] * (-4 * x3 + 7 * x4 - 3 * x5) +
         s_[k + 1] * (10 * x3 - 15 * x4 + 6 * x5);
}

double ArcLengthTable::hermite_slope(std::size_t k, double u) const {
  const double h = u_[k + 1] - u_[k];
  const double x = (u - u_[k]) / h;
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
  const double* m = &slope_[4 * k];
  return (s_[k + 1] - s_[k]) / h * (30 * x2 - 60 * x3 + 30 * x4) +
         m[0] * (1 - 18 * x2 + 32 * x3 - 15 * x4) +
         h * m[2] * (x - 4.5 * x2 + 6 * x3 - 2.5 * x4) + h * m[3] * (1.5 * x2 - 4 * x3 + 2.5 * x4) +
         m[1] * (-12 * x2 + 28 * x3 - 15 * x4);
}

double ArcLengthTable::s_at(double u) const {
  if (u < u_.front() || u > u_.back()) {
    throw Error(ErrorCode::kOutOfDomain,
                fmt::format("u = {} outside [{}, {}]", u, u_.front(), u_.back()));
  }
  if (u == u_.back()) return s_.back();
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  const auto k = static_cast<std::size_t>(it - u_.begin()) - 1;
  return hermite(k, u);
}

double ArcLengthTable::u_at(double s) const {
  if (s <= 0.0) return u_.front();
  if (s >= s_.back()) return u_.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const auto k = static_cast<std::size_t>(it - s_.begin()) - 1;
  if (s_[k + 1] == s_[k]) return u_[k];

  // Newton safeguarded by bisection on the bracketing interval.
  double lo = u_[k];
  double hi = u_[k + 1];
  const double h = hi - lo;
  double x = lo + (s - s_[k]) / (s_[k + 1] - s_[k]) * h;
  for (int iter = 0; iter < 100; ++iter) {
    const double f = hermite(k, x) - s;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double deriv = hermite_slope(k, x);
    double next = deriv > 0.0 ? x - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 0.0) {
      return next;
    }
    x = next;
  }
  return x;
}

ArcLengthTable arc_length_table(const BSplineCurve& curve, int samples) {
  const BSplineCurve d1 = derivative_curve(curve, 1);
  std::optional<BSplineCurve> d2;
  if (curve.degree() >= 2) d2 = derivative_curve(curve, 2);
  const SpeedFunction speed = [&](double u) {
    const Vec3 v = evaluate(d1, u);
    const double n = v.norm();
    SpeedSample out{n, 0.0};
    if (d2 && n > 0.0) out.dspeed = v.dot(evaluate(*d2, u)) / n;
    return out;
  };
  const auto bp = curve.knots().breakpoints();
  return ArcLengthTable::build(speed, bp, samples);
}

}  // namespace ftcp

#pragma once

// Reference computations for the tests. They are written from the textbook
// definitions and deliberately avoid calling into the library.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// N_{i,p}(u) straight from the recursive definition. The right end of the
// domain is assigned to the last non-empty span.
inline double basis(const std::vector<double>& U, int i, int p, double u) {
  const double b = U.back();
  if (p == 0) {
    if (U[i] <= u && u < U[i + 1]) return 1.0;
    if (u == b && U[i] < U[i + 1] && U[i + 1] == b) return 1.0;
    return 0.0;
  }
  double left = 0.0;
  double right = 0.0;
  if (U[i + p] != U[i]) left = (u - U[i]) / (U[i + p] - U[i]) * basis(U, i, p - 1, u);
  if (U[i + p + 1] != U[i + 1]) {
    right = (U[i + p + 1] - u) / (U[i + p + 1] - U[i + 1]) * basis(U, i + 1, p - 1, u);
  }
  return left + right;
}

inline Eigen::Vector3d curve_point(const std::vector<double>& U, int p,
                                   const std::vector<Eigen::Vector3d>& ctrl, double u) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 0; i < static_cast<int>(ctrl.size()); ++i) out += basis(U, i, p, u) * ctrl[i];
  return out;
}

// Weighted least squares through the explicit normal equations
// (A^T W A) X = A^T W D, with A from the recursive basis.
inline Eigen::MatrixXd normal_equation_fit(const std::vector<double>& U, int p, int m,
                                           const std::vector<double>& params,
                                           const Eigen::MatrixXd& data,
                                           const std::vector<double>& weights) {
  const int n = static_cast<int>(params.size());
  Eigen::MatrixXd a(n, m);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) a(j, i) = basis(U, i, p, params[j]);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n && !weights.empty(); ++j) w(j) = weights[j];
  const Eigen::MatrixXd atw = a.transpose() * w.asDiagonal();
  return (atw * a).ldlt().solve(atw * data);
}

// Cumulative chord length, normalized to [a, b].
inline std::vector<double> chord_params(const std::vector<Eigen::Vector3d>& pts, double a,
                                        double b) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t j = 1; j < pts.size(); ++j) cum[j] = cum[j - 1] + (pts[j] - pts[j - 1]).norm();
  std::vector<double> out(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) out[j] = a + (b - a) * cum[j] / cum.back();
  return out;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

inline Eigen::Matrix3d rx(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
inline Eigen::Matrix3d ry(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
inline Eigen::Matrix3d rz(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

inline Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& p) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = p;
  return t;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

// Rest-to-rest triple integration of a jerk signal with classical RK4 on
// state (s, v, a).
struct Integrated {
  double s = 0.0, v = 0.0, a = 0.0;
};
inline Integrated integrate_jerk(const std::function<double(double)>& jerk, double t0,
                                 double t1, Integrated start, int steps) {
  const double h = (t1 - t0) / steps;
  Integrated y = start;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    auto f = [&](double tt, const Integrated& x) {
      return Integrated{x.v, x.a, jerk(tt)};
    };
    auto add = [](const Integrated& x, const Integrated& d, double c) {
      return Integrated{x.s + c * d.s, x.v + c * d.v, x.a + c * d.a};
    };
    const Integrated k1 = f(t, y);
    const Integrated k2 = f(t + h / 2, add(y, k1, h / 2));
    const Integrated k3 = f(t + h / 2, add(y, k2, h / 2));
    const Integrated k4 = f(t + h, add(y, k3, h));
    y.s += h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
    y.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    y.a += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
  }
  return y;
}

}  // namespace oracle

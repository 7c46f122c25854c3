#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace ftcp {

// A quantity together with its first and second derivative along a single
// scalar parameter. Used to push exact derivatives through the frame and
// pose chain.
template <typename T>
struct Jet {
  T v;
  T d1;
  T d2;
};

using ScalarJet = Jet<double>;
using VecJet = Jet<Eigen::Vector3d>;
using MatJet = Jet<Eigen::Matrix3d>;

// Second-order Leibniz rule for any bilinear operation f.
template <typename A, typename B, typename F>
auto bilinear(const Jet<A>& a, const Jet<B>& b, F f) {
  using R = decltype(f(a.v, b.v));
  return Jet<R>{f(a.v, b.v), R(f(a.d1, b.v) + f(a.v, b.d1)),
                R(f(a.d2, b.v) + 2.0 * f(a.d1, b.d1) + f(a.v, b.d2))};
}

template <typename T>
Jet<T> operator+(const Jet<T>& a, const Jet<T>& b) {
  return {T(a.v + b.v), T(a.d1 + b.d1), T(a.d2 + b.d2)};
}

template <typename T>
Jet<T> operator-(const Jet<T>& a, const Jet<T>& b) {
  return {T(a.v - b.v), T(a.d1 - b.d1), T(a.d2 - b.d2)};
}

template <typename T>
Jet<T> constant_jet(const T& value) {
  T zero = value;
  if constexpr (std::is_arithmetic_v<T>) {
    zero = 0.0;
  } else {
    zero.setZero();
  }
  return {value, zero, zero};
}

inline ScalarJet dot(const VecJet& a, const VecJet& b) {
  return bilinear(a, b, [](const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    return x.dot(y);
  });
}

inline VecJet cross(const VecJet& a, const VecJet& b) {
  return bilinear(a, b, [](const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    return Eigen::Vector3d(x.cross(y));
  });
}

inline VecJet scale(const ScalarJet& s, const VecJet& a) {
  return bilinear(s, a, [](double x, const Eigen::Vector3d& y) {
    return Eigen::Vector3d(x * y);
  });
}

inline MatJet mul(const MatJet& a, const MatJet& b) {
  return bilinear(a, b, [](const Eigen::Matrix3d& x, const Eigen::Matrix3d& y) {
    return Eigen::Matrix3d(x * y);
  });
}

inline VecJet mul(const MatJet& a, const VecJet& b) {
  return bilinear(a, b, [](const Eigen::Matrix3d& x, const Eigen::Vector3d& y) {
    return Eigen::Vector3d(x * y);
  });
}

inline MatJet transpose(const MatJet& a) {
  return {a.v.transpose(), a.d1.transpose(), a.d2.transpose()};
}

inline MatJet columns(const VecJet& c0, const VecJet& c1, const VecJet& c2) {
  MatJet m;
  m.v << c0.v, c1.v, c2.v;
  m.d1 << c0.d1, c1.d1, c2.d1;
  m.d2 << c0.d2, c1.d2, c2.d2;
  return m;
}

// v / |v| together with |v|.
struct NormalizedJet {
  VecJet unit;
  ScalarJet norm;
};

inline NormalizedJet normalized(const VecJet& v) {
  const double n = v.v.norm();
  const Eigen::Vector3d w = v.v / n;
  const double n1 = w.dot(v.d1);
  const double n2 = (v.d1.squaredNorm() + v.v.dot(v.d2) - n1 * n1) / n;
  const Eigen::Vector3d w1 = (v.d1 - w * n1) / n;
  const Eigen::Vector3d w2 = (v.d2 - 2.0 * n1 * w1 - n2 * w) / n;
  return {{w, w1, w2}, {n, n1, n2}};
}

// Re-expresses a jet in u as a jet in s given u(s) with du/ds and d2u/ds2.
template <typename T>
Jet<T> chain(const Jet<T>& f, double du, double ddu) {
  return {f.v, T(f.d1 * du), T(f.d2 * (du * du) + f.d1 * ddu)};
}

}  // namespace ftcp

#pragma once

// Points of the Riemann sphere, Mobius transformations, cross-ratios and the
// volume of ideal tetrahedra.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "spinglue/error.hpp"

namespace spinglue {

using Complex = std::complex<double>;

// Points closer than this (normalized bracket) are treated as coincident.
inline constexpr double kCoincidenceTolerance = 1e-12;

// A point a/b of C u {inf} in homogeneous coordinates.
struct IdealPoint {
  Complex a{0.0, 0.0};
  Complex b{1.0, 0.0};

  static IdealPoint finite(Complex z) noexcept { return {z, Complex{1.0, 0.0}}; }
  static IdealPoint infinity() noexcept { return {Complex{1.0, 0.0}, Complex{0.0, 0.0}}; }

  double norm() const noexcept { return std::sqrt(std::norm(a) + std::norm(b)); }
  bool is_infinite(double tol = kCoincidenceTolerance) const noexcept { return std::abs(b) <= tol * norm(); }
  // a/b; only meaningful for finite points.
  Complex value() const { return a / b; }
};

// a*b' - a'*b; vanishes exactly when the points agree.
inline Complex bracket(const IdealPoint& p, const IdealPoint& q) noexcept { return p.a * q.b - p.b * q.a; }

inline double normalized_bracket(const IdealPoint& p, const IdealPoint& q) noexcept {
  return std::abs(bracket(p, q)) / (p.norm() * q.norm());
}

inline bool same_point(const IdealPoint& p, const IdealPoint& q, double tol = kCoincidenceTolerance) noexcept {
  return normalized_bracket(p, q) < tol;
}

// (vi - vk)/(vi - vl) * (vj - vl)/(vj - vk), exact at infinity.
inline Complex cross_ratio(const IdealPoint& vi, const IdealPoint& vj, const IdealPoint& vk, const IdealPoint& vl) {
  const std::array<const IdealPoint*, 4> pts{&vi, &vj, &vk, &vl};
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = s + 1; t < 4; ++t)
      if (same_point(*pts[s], *pts[t])) throw DegenerateError("cross-ratio of coincident ideal points");
  return bracket(vi, vk) * bracket(vj, vl) / (bracket(vi, vl) * bracket(vj, vk));
}

struct ShapeTriple {
  Complex z0, z1, z2;
  Complex operator[](int slot) const noexcept { return slot == 0 ? z0 : (slot == 1 ? z1 : z2); }
};

inline constexpr double kShapeEpsilon = 1e-14;

inline bool is_degenerate_shape(Complex z, double guard = kShapeEpsilon) noexcept {
  return !std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) <= guard || std::abs(z - 1.0) <= guard;
}

// (z, 1/(1-z), 1-1/z)
inline ShapeTriple shape_triple(Complex z) {
  if (is_degenerate_shape(z)) throw DegenerateError("degenerate shape parameter");
  return {z, 1.0 / (1.0 - z), 1.0 - 1.0 / z};
}

// The three shapes of an ordered ideal tetrahedron, one per opposite edge
// pair {01|23}, {02|13}, {03|12}, each read at the edge from vertex 0 with
// the remaining vertices taken in even-permutation order.
inline ShapeTriple tetrahedron_shapes(const std::array<IdealPoint, 4>& v) {
  return {cross_ratio(v[0], v[1], v[2], v[3]), cross_ratio(v[0], v[2], v[3], v[1]),
          cross_ratio(v[0], v[3], v[1], v[2])};
}

// Vertices (0, 1, inf, 1/(1-z)) realize slot-0 shape z.
inline std::array<IdealPoint, 4> tetrahedron_points(Complex z) {
  if (is_degenerate_shape(z)) throw DegenerateError("degenerate shape parameter");
  return {IdealPoint::finite(0.0), IdealPoint::finite(1.0), IdealPoint::infinity(), IdealPoint{1.0, 1.0 - z}};
}

// ---------------------------------------------------------------------------
// Lobachevsky function

namespace detail {

// zeta(2k) for k = 1..N, exact for small k and by direct summation with an
// Euler-Maclaurin tail otherwise.
template <std::size_t N>
std::array<double, N + 1> even_zeta_table() {
  constexpr double pi = std::numbers::pi;
  std::array<double, N + 1> zeta{};
  zeta[1] = pi * pi / 6.0;
  zeta[2] = std::pow(pi, 4) / 90.0;
  zeta[3] = std::pow(pi, 6) / 945.0;
  constexpr int cutoff = 64;
  for (std::size_t k = 4; k <= N; ++k) {
    const double s = 2.0 * static_cast<double>(k);
    double sum = 0.0;
    for (int n = cutoff - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    const double c = cutoff;
    sum += std::pow(c, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(c, -s) + s / 12.0 * std::pow(c, -s - 1.0);
    zeta[k] = sum;
  }
  return zeta;
}

}  // namespace detail

// Lambda(theta) = -int_0^theta log|2 sin t| dt.
//
// Reduced to |theta| <= pi/2 by oddness and pi-periodicity, then
//   Lambda(x) = x - x log(2x) + x * sum_k zeta(2k) / (k (2k+1)) (x/pi)^(2k),
// which converges at least like 4^-k on the reduced range.
inline double lobachevsky(double theta) {
  if (!std::isfinite(theta)) throw DegenerateError("Lobachevsky function of a non-finite angle");
  constexpr double pi = std::numbers::pi;
  constexpr std::size_t kTerms = 40;
  static const auto zeta = detail::even_zeta_table<kTerms>();

  double x = theta - pi * std::round(theta / pi);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x == 0.0) return 0.0;

  const double ratio = (x / pi) * (x / pi);
  double power = 1.0;
  double series = 0.0;
  for (std::size_t k = 1; k <= kTerms; ++k) {
    power *= ratio;
    const double kk = static_cast<double>(k);
    const double term = zeta[k] * power / (kk * (2.0 * kk + 1.0));
    series += term;
    if (term < 1e-18 * series) break;
  }
  return sign * (x - x * std::log(2.0 * x) + x * series);
}

// Signed volume of the ideal tetrahedron with shape z; positive when Im z > 0.
inline double ideal_volume(Complex z) {
  const ShapeTriple s = shape_triple(z);
  return lobachevsky(std::arg(s.z0)) + lobachevsky(std::arg(s.z1)) + lobachevsky(std::arg(s.z2));
}

// ---------------------------------------------------------------------------
// Mobius transformations

// A 2x2 complex matrix [[m00, m01], [m10, m11]] acting on C u {inf}. Values
// produced by the library are normalized to determinant 1, so a
// transformation is represented by two matrices differing by sign.
struct Mobius {
  Complex m00{1.0}, m01{0.0}, m10{0.0}, m11{1.0};

  static Mobius identity() noexcept { return {}; }

  Complex det() const noexcept { return m00 * m11 - m01 * m10; }
  Complex trace() const noexcept { return m00 + m11; }

  Mobius normalized() const {
    const Complex d = det();
    if (std::abs(d) < 1e-300 || !std::isfinite(std::abs(d))) throw DegenerateError("singular Mobius matrix");
    const Complex s = std::sqrt(d);
    return {m00 / s, m01 / s, m10 / s, m11 / s};
  }

  // Inverse of a determinant-1 matrix.
  Mobius inverse() const noexcept { return {m11, -m01, -m10, m00}; }

  Mobius operator*(const Mobius& o) const noexcept {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11, m10 * o.m00 + m11 * o.m10,
            m10 * o.m01 + m11 * o.m11};
  }

  std::array<Complex, 4> entries() const noexcept { return {m00, m01, m10, m11}; }
};

inline IdealPoint mobius_apply(const Mobius& m, const IdealPoint& p) noexcept {
  return {m.m00 * p.a + m.m01 * p.b, m.m10 * p.a + m.m11 * p.b};
}

// Largest entrywise distance between a and s*b, minimized over s = +-1.
inline double sign_aligned_distance(const Mobius& a, const Mobius& b) noexcept {
  const auto ea = a.entries();
  const auto eb = b.entries();
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    plus = std::max(plus, std::abs(ea[i] - eb[i]));
    minus = std::max(minus, std::abs(ea[i] + eb[i]));
  }
  return std::min(plus, minus);
}

inline double distance_to_identity(const Mobius& m) noexcept { return sign_aligned_distance(m, Mobius::identity()); }

inline bool same_mobius(const Mobius& a, const Mobius& b, double tol) {
  return sign_aligned_distance(a.normalized(), b.normalized()) < tol;
}

// Determinant-1 matrix sending p1 -> 0, p2 -> inf, p3 -> 1.
inline Mobius mobius_to_standard(const IdealPoint& p1, const IdealPoint& p2, const IdealPoint& p3) {
  if (same_point(p1, p2) || same_point(p1, p3) || same_point(p2, p3))
    throw DegenerateError("coincident points in a Mobius correspondence");
  const Complex k1 = bracket(p3, p2);
  const Complex k2 = bracket(p3, p1);
  return Mobius{k1 * p1.b, -k1 * p1.a, k2 * p2.b, -k2 * p2.a}.normalized();
}

// The unique transformation with src[i] -> dst[i].
inline Mobius mobius_from_correspondence(const std::array<IdealPoint, 3>& src, const std::array<IdealPoint, 3>& dst) {
  const Mobius from = mobius_to_standard(src[0], src[1], src[2]);
  const Mobius to = mobius_to_standard(dst[0], dst[1], dst[2]);
  return (to.inverse() * from).normalized();
}

// Fixed points: one for parabolic elements, two otherwise.
inline std::vector<IdealPoint> fixed_points(const Mobius& m_in) {
  const Mobius m = m_in.normalized();
  if (distance_to_identity(m) < kCoincidenceTolerance) throw DegenerateError("identity fixes every point");
  const Complex tr = m.trace();
  const Complex disc = tr * tr - 4.0;
  auto eigenvector = [&](Complex lambda) {
    const IdealPoint u{m.m01, lambda - m.m00};
    const IdealPoint v{lambda - m.m11, m.m10};
    return u.norm() >= v.norm() ? u : v;
  };
  if (std::abs(disc) < 1e-14) return {eigenvector(tr / 2.0)};
  const Complex root = std::sqrt(disc);
  const IdealPoint p = eigenvector((tr + root) / 2.0);
  const IdealPoint q = eigenvector((tr - root) / 2.0);
  if (same_point(p, q)) return {p};
  return {p, q};
}

}  // namespace spinglue

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "uavplan/error.hpp"

namespace uavplan {

/// Ground position in meters (x east, y north). Also used for plain 2-vectors.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  Point2 operator*(Point2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  Sym2 inverse() const {
    const double d = det();
    return {yy / d, -xy / d, xx / d};
  }

  friend bool operator==(const Sym2&, const Sym2&) = default;
};

/// Eigen-decomposition of a symmetric 2x2 matrix: `low <= high`, and
/// `angle_high` is the direction of the eigenvector belonging to `high`.
struct SymEigen {
  double low;
  double high;
  double angle_high;
};

inline SymEigen eigen(const Sym2& m) {
  const double mean = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double radius = std::hypot(half_diff, m.xy);
  return {mean - radius, mean + radius, 0.5 * std::atan2(m.xy, half_diff)};
}

/// Wraps an angle into [0, pi).
inline double wrap_half_turn(double angle) {
  double a = std::fmod(angle, std::numbers::pi);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a = 0.0;
  return a;
}

struct SemiAxes {
  double major;
  double minor;
};

/// Closed ellipse {x : ||A x - b|| <= 1} with A symmetric positive definite.
struct Ellipse {
  Sym2 A;
  Point2 b;

  static Ellipse from_axes(Point2 center, double major, double minor, double orientation) {
    const double c = std::cos(orientation);
    const double s = std::sin(orientation);
    const double inv_major = 1.0 / major;
    const double inv_minor = 1.0 / minor;
    Sym2 a{inv_major * c * c + inv_minor * s * s,
           (inv_major - inv_minor) * c * s,
           inv_major * s * s + inv_minor * c * c};
    return {a, a * center};
  }

  static Ellipse circle(Point2 center, double radius) {
    return from_axes(center, radius, radius, 0.0);
  }

  Point2 center() const { return A.inverse() * b; }

  SemiAxes semi_axes() const {
    const auto e = eigen(A);
    return {1.0 / e.low, 1.0 / e.high};
  }

  /// Direction of the major axis, in [0, pi).
  double orientation() const {
    return wrap_half_turn(eigen(A).angle_high + 0.5 * std::numbers::pi);
  }

  double area() const { return std::numbers::pi / A.det(); }

  /// ||A p - b||; at most one on the closed ellipse.
  double level(Point2 p) const { return norm(A * p - b); }

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

inline bool contains(const Ellipse& e, Point2 p) { return e.level(p) <= 1.0; }

/// Largest horizontal distance from the ellipse center to any member.
inline double edge_distance(const Ellipse& e, std::span<const Point2> members) {
  if (members.empty()) throw InvalidArgument("edge_distance: no members");
  const Point2 c = e.center();
  double best = 0.0;
  for (const auto& p : members) best = std::max(best, distance(p, c));
  return best;
}

struct FitConfig {
  double tolerance = 1e-7;
  int max_iterations = 10000;
  double min_semi_axis = 1.0;
};

namespace detail {

struct Sym3 {
  // upper triangle, row major: 00 01 02 11 12 22
  double m[6] = {};
};

inline bool invert(const Sym3& s, Sym3& out) {
  const double a = s.m[0], b = s.m[1], c = s.m[2], d = s.m[3], e = s.m[4], f = s.m[5];
  const double c00 = d * f - e * e;
  const double c01 = c * e - b * f;
  const double c02 = b * e - c * d;
  const double det = a * c00 + b * c01 + c * c02;
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
  const double inv = 1.0 / det;
  out.m[0] = c00 * inv;
  out.m[1] = c01 * inv;
  out.m[2] = c02 * inv;
  out.m[3] = (a * f - c * c) * inv;
  out.m[4] = (b * c - a * e) * inv;
  out.m[5] = (a * d - b * b) * inv;
  return true;
}

inline double quad_form(const Sym3& s, double x, double y) {
  // z = (x, y, 1)
  return s.m[0] * x * x + 2.0 * s.m[1] * x * y + 2.0 * s.m[2] * x + s.m[3] * y * y +
         2.0 * s.m[4] * y + s.m[5];
}

struct Shape {
  Point2 center;
  double major;
  double minor;
  double orientation;
};

// Collinear input: the segment spanned by the points, zero minor axis.
inline Shape segment_shape(std::span<const Point2> q, double direction) {
  const Point2 u{std::cos(direction), std::sin(direction)};
  const Point2 v{-u.y, u.x};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double perp = 0.0;
  for (const auto& p : q) {
    const double t = dot(p, u);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    perp += dot(p, v);
  }
  perp /= static_cast<double>(q.size());
  const double mid = 0.5 * (lo + hi);
  return {mid * u + perp * v, 0.5 * (hi - lo), 0.0, direction};
}

// Minimum-area enclosing ellipse of full-rank normalized points via
// barycentric weight updates on the lifted problem, with away steps.
inline Shape weighted_shape(std::span<const Point2> q, const FitConfig& cfg) {
  const std::size_t n = q.size();
  constexpr double lifted_dim = 3.0;
  std::vector<double> u(n, 1.0 / static_cast<double>(n));
  std::vector<double> g(n);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Sym3 x;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = u[i];
      const double px = q[i].x, py = q[i].y;
      x.m[0] += w * px * px;
      x.m[1] += w * px * py;
      x.m[2] += w * px;
      x.m[3] += w * py * py;
      x.m[4] += w * py;
      x.m[5] += w;
    }
    Sym3 xi;
    if (!invert(x, xi)) break;

    std::size_t up = 0, down = n;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = quad_form(xi, q[i].x, q[i].y);
      if (g[i] > g[up]) up = i;
      if (u[i] > 0.0 && (down == n || g[i] < g[down])) down = i;
    }

    // A drop step truncated at zero weight says nothing about convergence, so
    // the stopping test uses the untruncated step length.
    std::size_t j = up;
    double step = (g[up] - lifted_dim) / (lifted_dim * (g[up] - 1.0));
    double natural = step;
    if (down != n && lifted_dim - g[down] > g[up] - lifted_dim && u[down] < 1.0) {
      j = down;
      const double floor_step = -u[down] / (1.0 - u[down]);
      natural = g[down] > 1.0 ? (g[down] - lifted_dim) / (lifted_dim * (g[down] - 1.0))
                              : -std::numeric_limits<double>::infinity();
      step = std::max(natural, floor_step);
    }
    if (std::abs(natural) < cfg.tolerance) break;

    for (std::size_t i = 0; i < n; ++i) u[i] = std::max((1.0 - step) * u[i], 0.0);
    u[j] += step;
    if (u[j] < 0.0) u[j] = 0.0;
  }

  Point2 c{};
  for (std::size_t i = 0; i < n; ++i) c = c + u[i] * q[i];
  Sym2 cov{};
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 d = q[i] - c;
    cov.xx += u[i] * d.x * d.x;
    cov.xy += u[i] * d.x * d.y;
    cov.yy += u[i] * d.y * d.y;
  }
  // Shape matrix is cov^{-1} / 2; its eigenvalues are 1 / (2 lambda(cov)).
  const auto e = eigen(cov);
  const double major = std::sqrt(2.0 * std::max(e.high, 0.0));
  const double minor = std::sqrt(2.0 * std::max(e.low, 0.0));
  return {c, major, minor, e.angle_high};
}

// Golden-section minimizer on [lo, hi]; returns {argmin, min}.
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iterations) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Smallest ellipse with minor semi-axis exactly `floor` covering `pts`, near
// the unconstrained fit `start` whose minor axis fell below the floor. For a
// fixed angle the squared major axis max u^2 / (1 - v^2 / floor^2) is convex
// in the center, so nested golden sections find it; the angle is searched
// over the range that keeps the points inside the strip |v| < floor.
inline Shape floored_shape(std::span<const Point2> pts, const Shape& start, double floor) {
  const double f2 = floor * floor;
  std::vector<double> u(pts.size()), v(pts.size());
  const auto best_for_angle = [&](double theta, Point2* center) {
    const Point2 e1{std::cos(theta), std::sin(theta)}, e2{-e1.y, e1.x};
    double ulo = std::numeric_limits<double>::infinity(), uhi = -ulo, vlo = ulo, vhi = -ulo;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2 d = pts[i] - start.center;
      u[i] = dot(d, e1);
      v[i] = dot(d, e2);
      ulo = std::min(ulo, u[i]);
      uhi = std::max(uhi, u[i]);
      vlo = std::min(vlo, v[i]);
      vhi = std::max(vhi, v[i]);
    }
    if (vhi - vlo >= 2.0 * floor) return std::numeric_limits<double>::infinity();
    const auto a2 = [&](double s, double t) {
      double worst = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double dv = v[i] - t;
        const double room = 1.0 - dv * dv / f2;
        if (!(room > 0.0)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, (u[i] - s) * (u[i] - s) / room);
      }
      return worst;
    };
    const auto over_t = [&](double s) { return golden_min([&](double t) { return a2(s, t); }, vhi - floor, vlo + floor, 60); };
    const auto [s, value] = golden_min([&](double s) { return over_t(s).second; }, ulo, uhi, 60);
    if (center) *center = start.center + s * e1 + over_t(s).first * e2;
    return value;
  };

  const double spread = 2.0 * start.major;
  const double reach = spread > 2.0 * floor ? std::asin(2.0 * floor / spread) : 0.5 * std::numbers::pi;
  const double theta =
      golden_min([&](double th) { return best_for_angle(th, nullptr); }, start.orientation - reach,
                 start.orientation + reach, 60)
          .first;
  Point2 center;
  const double a2 = best_for_angle(theta, &center);
  if (!std::isfinite(a2)) return start;
  return {center, std::max(std::sqrt(a2), floor), floor, theta};
}

// Uniformly enlarges `e` about its center until every point passes `contains`.
inline Ellipse enlarge_to_cover(Ellipse e, std::span<const Point2> points) {
  for (int pass = 0; pass < 64; ++pass) {
    double worst = 0.0;
    for (const auto& p : points) worst = std::max(worst, e.level(p));
    if (worst <= 1.0) return e;
    const double shrink = (1.0 / worst) * (1.0 - 4.0 * pass * std::numeric_limits<double>::epsilon());
    e.A = {e.A.xx * shrink, e.A.xy * shrink, e.A.yy * shrink};
    e.b = shrink * e.b;
  }
  return e;
}

}  // namespace detail

/// Minimum-area ellipse enclosing `points`. Semi-axes are floored at
/// `cfg.min_semi_axis`, so degenerate inputs still get positive area.
inline Ellipse mvee(std::span<const Point2> points, const FitConfig& cfg = {}) {
  if (points.empty()) throw InvalidArgument("no points");
  if (!(cfg.tolerance > 0.0) || !(cfg.min_semi_axis > 0.0))
    throw InvalidArgument("invalid fit configuration");
  for (const auto& p : points)
    if (!is_finite(p)) throw InvalidArgument("invalid point");

  Point2 mean{};
  for (const auto& p : points) mean = mean + p;
  mean = (1.0 / static_cast<double>(points.size())) * mean;

  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, norm(p - mean));

  detail::Shape shape{mean, 0.0, 0.0, 0.0};
  if (scale > 0.0) {
    std::vector<Point2> q;
    q.reserve(points.size());
    for (const auto& p : points) q.push_back((1.0 / scale) * (p - mean));

    Sym2 scatter{};
    for (const auto& p : q) {
      scatter.xx += p.x * p.x;
      scatter.xy += p.x * p.y;
      scatter.yy += p.y * p.y;
    }
    const auto e = eigen(scatter);
    detail::Shape normalized = e.low <= 1e-10 * e.high
                                   ? detail::segment_shape(q, e.angle_high)
                                   : detail::weighted_shape(q, cfg);
    shape = {mean + scale * normalized.center, scale * normalized.major,
             scale * normalized.minor, normalized.orientation};
  }

  // A minor axis under the floor is raised to it; with three or more points
  // the other parameters are then re-optimized under that constraint.
  if (shape.minor < cfg.min_semi_axis && shape.major > cfg.min_semi_axis && points.size() > 2) {
    const auto refined = detail::floored_shape(points, shape, cfg.min_semi_axis);
    if (refined.major < shape.major) shape = refined;
  }
  const double major = std::max(shape.major, cfg.min_semi_axis);
  const double minor = std::max(shape.minor, cfg.min_semi_axis);
  Ellipse fit = major >= minor
                    ? Ellipse::from_axes(shape.center, major, minor, shape.orientation)
                    : Ellipse::from_axes(shape.center, minor, major,
                                         shape.orientation + 0.5 * std::numbers::pi);
  return detail::enlarge_to_cover(fit, points);
}

inline Ellipse mvee(const std::vector<Point2>& points, const FitConfig& cfg = {}) {
  return mvee(std::span<const Point2>(points), cfg);
}

}  // namespace uavplan

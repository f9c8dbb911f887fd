#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "packbound/errors.hpp"
#include "packbound/random.hpp"

namespace packbound {

/// Absolute orientation/clipping tolerance for bodies scaled to unit diameter.
inline constexpr double kGeomEps = 1e-12;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Shoelace area, positive for counterclockwise order.
inline double signed_area(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    sum += a.x * b.y - b.x * a.y;
  }
  return 0.5 * sum;
}

inline double max_pairwise_distance(std::span<const Point2> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, norm(pts[i] - pts[j]));
    }
  }
  return best;
}

/// Convexity test tolerant to collinear vertices. Accepts either orientation;
/// also rejects self-overlapping (star-shaped) vertex cycles whose turns all
/// share a sign.
inline bool is_convex(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) {
    throw InvalidInput("is_convex: need at least 3 points");
  }
  const double scale = std::max(max_pairwise_distance(pts), 1e-300);
  const double tol = kGeomEps * scale * scale;
  const double orientation = signed_area(pts) >= 0.0 ? 1.0 : -1.0;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = pts[(i + 1) % n] - pts[i];
    const Point2 e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
    const double c = orientation * cross(e0, e1);
    if (c < -tol) {
      return false;
    }
    if (norm(e0) > 0.0 && norm(e1) > 0.0) {
      turning += std::atan2(orientation * cross(e0, e1), dot(e0, e1));
    }
  }
  // A simple convex cycle turns exactly once.
  return std::abs(turning - 2.0 * std::numbers::pi) < 1e-6;
}

/// Convex planar body, vertices stored counterclockwise.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
      throw InvalidInput("ConvexPolygon: need at least 3 vertices");
    }
    for (const Point2& p : vertices_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvalidInput("ConvexPolygon: non-finite coordinate");
      }
    }
    diameter_ = max_pairwise_distance(vertices_);
    const double scale2 = diameter_ * diameter_;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Point2 d = vertices_[(i + 1) % vertices_.size()] - vertices_[i];
      if (dot(d, d) <= kGeomEps * scale2) {
        throw InvalidInput("ConvexPolygon: consecutive vertices coincide");
      }
    }
    double a = signed_area(vertices_);
    if (a < 0.0) {
      std::reverse(vertices_.begin(), vertices_.end());
      a = -a;
    }
    if (!(a > kGeomEps * scale2)) {
      throw InvalidInput("ConvexPolygon: degenerate (zero area)");
    }
    if (!is_convex(vertices_)) {
      throw InvalidInput("ConvexPolygon: vertices are not in convex position");
    }
    area_ = a;
  }

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  double area() const noexcept { return area_; }
  double diameter() const noexcept { return diameter_; }

  Point2 centroid() const {
    double cx = 0.0;
    double cy = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = vertices_[i];
      const Point2& b = vertices_[(i + 1) % n];
      const double w = a.x * b.y - b.x * a.y;
      cx += (a.x + b.x) * w;
      cy += (a.y + b.y) * w;
    }
    return {cx / (6.0 * area_), cy / (6.0 * area_)};
  }

  friend bool operator==(const ConvexPolygon& a, const ConvexPolygon& b) {
    return a.vertices_ == b.vertices_;
  }

 private:
  std::vector<Point2> vertices_;
  double area_ = 0.0;
  double diameter_ = 0.0;
};

inline double area(const ConvexPolygon& p) { return p.area(); }
inline double diameter(const ConvexPolygon& p) { return p.diameter(); }

/// Rigid motion, optionally preceded by the point reflection x -> -x.
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double rotation, Point2 translation, bool reflected = false)
      : rotation_(normalize(rotation)), translation_(translation), reflected_(reflected) {}

  static Pose2 translation(Point2 t) { return Pose2(0.0, t); }

  double rotation() const noexcept { return rotation_; }
  Point2 offset() const noexcept { return translation_; }
  bool reflected() const noexcept { return reflected_; }

  Point2 apply(Point2 p) const {
    if (reflected_) {
      p = -p;
    }
    if (rotation_ != 0.0) {
      p = rotate(p, rotation_);
    }
    return p + translation_;
  }

  friend bool operator==(const Pose2&, const Pose2&) = default;

 private:
  static double normalize(double angle) {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) {
      r += kTwoPi;
    }
    return r >= kTwoPi ? 0.0 : r;
  }

  double rotation_ = 0.0;
  Point2 translation_{};
  bool reflected_ = false;
};

inline std::vector<Point2> posed_vertices(const ConvexPolygon& p, const Pose2& pose) {
  std::vector<Point2> out;
  out.reserve(p.size());
  for (const Point2& v : p.vertices()) {
    out.push_back(pose.apply(v));
  }
  // Point reflection and rotation both preserve orientation in the plane.
  return out;
}

inline ConvexPolygon transformed(const ConvexPolygon& p, const Pose2& pose) {
  return ConvexPolygon(posed_vertices(p, pose));
}

inline ConvexPolygon translated(const ConvexPolygon& p, Point2 t) {
  return transformed(p, Pose2::translation(t));
}

/// Image under v -> 2c - v.
inline ConvexPolygon point_reflect(const ConvexPolygon& p, Point2 c) {
  std::vector<Point2> out;
  out.reserve(p.size());
  for (const Point2& v : p.vertices()) {
    out.push_back(2.0 * c - v);
  }
  return ConvexPolygon(std::move(out));
}

inline ConvexPolygon scaled(const ConvexPolygon& p, double factor) {
  std::vector<Point2> out;
  out.reserve(p.size());
  for (const Point2& v : p.vertices()) {
    out.push_back(factor * v);
  }
  return ConvexPolygon(std::move(out));
}

namespace detail {

// Area of subject ∩ clip, both convex and counterclockwise, by clipping the
// subject against each edge half-plane of the clip polygon.
inline double clipped_area(std::span<const Point2> subject, std::span<const Point2> clip) {
  thread_local std::vector<Point2> cur;
  thread_local std::vector<Point2> next;
  cur.assign(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && cur.size() >= 3; ++e) {
    const Point2 a = clip[e];
    const Point2 dir = clip[(e + 1) % m] - a;
    const double tol = kGeomEps * norm(dir);
    next.clear();
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p = cur[i];
      const Point2 q = cur[(i + 1) % n];
      const double sp = cross(dir, p - a);
      const double sq = cross(dir, q - a);
      const bool p_in = sp >= -tol;
      const bool q_in = sq >= -tol;
      if (p_in) {
        next.push_back(p);
      }
      if (p_in != q_in) {
        const double t = std::clamp(sp / (sp - sq), 0.0, 1.0);
        next.push_back(p + t * (q - p));
      }
    }
    std::swap(cur, next);
  }
  if (cur.size() < 3) {
    return 0.0;
  }
  return std::max(0.0, signed_area(cur));
}

// Cheap rejection: bounding boxes disjoint (or only touching).
inline bool boxes_disjoint(std::span<const Point2> a, std::span<const Point2> b) {
  auto [ax0, ax1] = std::minmax_element(a.begin(), a.end(), [](Point2 p, Point2 q) { return p.x < q.x; });
  auto [bx0, bx1] = std::minmax_element(b.begin(), b.end(), [](Point2 p, Point2 q) { return p.x < q.x; });
  if (ax1->x <= bx0->x || bx1->x <= ax0->x) {
    return true;
  }
  auto [ay0, ay1] = std::minmax_element(a.begin(), a.end(), [](Point2 p, Point2 q) { return p.y < q.y; });
  auto [by0, by1] = std::minmax_element(b.begin(), b.end(), [](Point2 p, Point2 q) { return p.y < q.y; });
  return ay1->y <= by0->y || by1->y <= ay0->y;
}

}  // namespace detail

/// Area of the intersection of two posed convex polygons. Touching bodies give 0.
inline double convex_intersection_area(const ConvexPolygon& a, const Pose2& pose_a,
                                       const ConvexPolygon& b, const Pose2& pose_b) {
  if (pose_a == pose_b && a == b) {
    return a.area();
  }
  const std::vector<Point2> pa = posed_vertices(a, pose_a);
  const std::vector<Point2> pb = posed_vertices(b, pose_b);
  if (detail::boxes_disjoint(pa, pb)) {
    return 0.0;
  }
  return detail::clipped_area(pa, pb);
}

/// Regular m-gon centered at the origin, first vertex on the positive x-axis.
inline ConvexPolygon regular_polygon(int m, double circumradius) {
  if (m < 3) {
    throw InvalidInput("regular_polygon: m must be >= 3");
  }
  if (!(circumradius > 0.0)) {
    throw InvalidInput("regular_polygon: circumradius must be positive");
  }
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * std::numbers::pi * i / m;
    v.push_back({circumradius * std::cos(t), circumradius * std::sin(t)});
  }
  return ConvexPolygon(std::move(v));
}

/// Strict containment with a small inward margin (`tol`, a length).
inline bool contains_strictly(const ConvexPolygon& p, Point2 q, double tol) {
  const auto& v = p.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 e = v[(i + 1) % v.size()] - v[i];
    if (cross(e, q - v[i]) <= tol * norm(e)) {
      return false;
    }
  }
  return true;
}

struct Box2 {
  Point2 lo;
  Point2 hi;
};

inline Box2 bounding_box(std::span<const Point2> pts) {
  Box2 b{pts.front(), pts.front()};
  for (const Point2& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

inline Box2 bounding_box(const ConvexPolygon& p) { return bounding_box(p.vertices()); }

/// Seeded random convex m-gon: vertices on a randomly stretched and rotated
/// ellipse at jittered angles, recentred on its centroid and scaled to unit
/// diameter.
inline ConvexPolygon random_convex_polygon(int m, std::uint64_t seed) {
  if (m < 3) {
    throw InvalidInput("random_convex_polygon: m must be >= 3");
  }
  Rng rng(seed);
  const double aspect = rng.uniform(0.35, 1.0);
  const double tilt = rng.uniform(0.0, std::numbers::pi);
  std::vector<double> gaps(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& g : gaps) {
    g = 0.35 + rng.uniform();
    total += g;
  }
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Point2> v;
  v.reserve(gaps.size());
  double angle = phase;
  for (double g : gaps) {
    v.push_back(rotate({std::cos(angle), aspect * std::sin(angle)}, tilt));
    angle += 2.0 * std::numbers::pi * g / total;
  }
  ConvexPolygon raw(std::move(v));
  const Point2 c = raw.centroid();
  std::vector<Point2> out;
  out.reserve(raw.size());
  for (const Point2& p : raw.vertices()) {
    out.push_back((1.0 / raw.diameter()) * (p - c));
  }
  return ConvexPolygon(std::move(out));
}

}  // namespace packbound

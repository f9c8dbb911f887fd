#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "packbound/errors.hpp"
#include "packbound/geometry.hpp"
#include "packbound/nelder_mead.hpp"
#include "packbound/random.hpp"

namespace packbound {

/// Planar lattice with positively oriented basis (u, v).
class Lattice2 {
 public:
  Lattice2(Point2 u, Point2 v) : u_(u), v_(v) {
    if (!(cross(u, v) > 0.0) || !std::isfinite(cross(u, v))) {
      throw InvalidInput("Lattice2: basis must satisfy det(u, v) > 0");
    }
  }

  Point2 u() const noexcept { return u_; }
  Point2 v() const noexcept { return v_; }
  double det() const noexcept { return cross(u_, v_); }
  Point2 point(long i, long j) const { return static_cast<double>(i) * u_ + static_cast<double>(j) * v_; }

  /// Calls f(i, j, w) for every lattice vector w with |w - target| < radius.
  template <class F>
  void for_each_near(Point2 target, double radius, F&& f) const {
    const double d = det();
    // Coefficients of target in the basis, and how far they can move.
    const double ti = cross(target, v_) / d;
    const double tj = cross(u_, target) / d;
    const double di = radius * norm(v_) / d;
    const double dj = radius * norm(u_) / d;
    const long i0 = static_cast<long>(std::floor(ti - di));
    const long i1 = static_cast<long>(std::ceil(ti + di));
    const long j0 = static_cast<long>(std::floor(tj - dj));
    const long j1 = static_cast<long>(std::ceil(tj + dj));
    for (long i = i0; i <= i1; ++i) {
      for (long j = j0; j <= j1; ++j) {
        const Point2 w = point(i, j);
        if (norm(w - target) < radius) {
          f(i, j, w);
        }
      }
    }
  }

 private:
  Point2 u_;
  Point2 v_;
};

enum class PackingMode { Single, Double };

/// Copies {body + w} and, in double mode, {point_reflect(body, c) + w} over
/// all lattice vectors w.
struct DoubleLatticeConfig {
  ConvexPolygon body;
  Lattice2 lattice;
  Point2 reflection_center{};
  PackingMode mode = PackingMode::Double;

  ConvexPolygon reflected() const { return point_reflect(body, reflection_center); }
  int copies_per_cell() const { return mode == PackingMode::Double ? 2 : 1; }
};

/// copies-per-cell * area(body) / det(lattice). Validity is not checked.
inline double density(const DoubleLatticeConfig& cfg) {
  return cfg.copies_per_cell() * cfg.body.area() / cfg.lattice.det();
}

namespace detail {

struct OverlapSummary {
  double total = 0.0;  // per fundamental cell, each unordered pair once
  double worst = 0.0;  // largest single pairwise intersection
};

inline double circumradius_about(std::span<const Point2> pts, Point2 center) {
  double r = 0.0;
  for (const Point2& p : pts) r = std::max(r, norm(p - center));
  return r;
}

// Intersections of the reference copies K and K' = 2c - K with every other
// copy that can reach them. Copies are enclosed in discs of radius r about
// their centroids, so only lattice offsets within 2r matter.
inline OverlapSummary overlap_summary(std::span<const Point2> body, Point2 centroid, double radius,
                                      const Lattice2& lattice, Point2 c, PackingMode mode) {
  thread_local std::vector<Point2> moved;
  OverlapSummary s;
  const double reach = 2.0 * radius * (1.0 + 1e-9);
  auto shifted = [&](std::span<const Point2> base, Point2 w) -> std::span<const Point2> {
    moved.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) moved[i] = base[i] + w;
    return moved;
  };

  // Same family: K vs K + w over half the nonzero lattice vectors. The
  // reflected family has identical self-overlaps (it is a point reflection
  // of the first family followed by a translation).
  const double family_weight = mode == PackingMode::Double ? 2.0 : 1.0;
  lattice.for_each_near({0.0, 0.0}, reach, [&](long i, long j, Point2 w) {
    if (i < 0 || (i == 0 && j <= 0)) return;
    const auto other = shifted(body, w);
    if (boxes_disjoint(body, other)) return;
    const double a = clipped_area(body, other);
    s.total += family_weight * a;
    s.worst = std::max(s.worst, a);
  });
  if (mode == PackingMode::Single) {
    return s;
  }

  std::vector<Point2> refl(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) refl[i] = 2.0 * c - body[i];
  const Point2 refl_centroid = 2.0 * c - centroid;
  lattice.for_each_near(centroid - refl_centroid, reach, [&](long, long, Point2 w) {
    const auto other = shifted(refl, w);
    if (boxes_disjoint(body, other)) return;
    const double a = clipped_area(body, other);
    s.total += a;
    s.worst = std::max(s.worst, a);
  });
  return s;
}

inline OverlapSummary overlap_summary(const DoubleLatticeConfig& cfg) {
  const Point2 g = cfg.body.centroid();
  return overlap_summary(cfg.body.vertices(), g, circumradius_about(cfg.body.vertices(), g), cfg.lattice,
                         cfg.reflection_center, cfg.mode);
}

}  // namespace detail

/// Sum of pairwise intersection areas per lattice cell (each unordered pair
/// of copies counted once per period). Zero iff the packing is valid.
inline double total_overlap_area(const DoubleLatticeConfig& cfg) { return detail::overlap_summary(cfg).total; }

/// True iff no two distinct copies share more than kGeomEps * area(body).
inline bool is_valid_packing(const DoubleLatticeConfig& cfg) {
  return detail::overlap_summary(cfg).worst <= kGeomEps * cfg.body.area();
}

// ---------------------------------------------------------------------------
// Windows

struct WindowCount {
  double sigma = 0.0;
  long count = 0;
};

/// Vertex lists of every copy lying strictly inside (-sigma/2, sigma/2)^2.
inline std::vector<std::vector<Point2>> copies_in_window(const DoubleLatticeConfig& cfg, double sigma) {
  if (!(sigma > cfg.body.diameter())) {
    throw InvalidInput("window: sigma must exceed the body diameter");
  }
  const double half = 0.5 * sigma;
  std::vector<std::vector<Point2>> out;
  auto scan = [&](const std::vector<Point2>& base) {
    const Point2 g = ConvexPolygon(base).centroid();
    // A contained copy has its centroid inside the window.
    cfg.lattice.for_each_near(-g, half * std::numbers::sqrt2 * (1.0 + 1e-12) + 1e-12, [&](long, long, Point2 w) {
      for (const Point2& p : base) {
        const Point2 q = p + w;
        if (!(q.x > -half && q.x < half && q.y > -half && q.y < half)) return;
      }
      std::vector<Point2> copy(base.size());
      for (std::size_t i = 0; i < base.size(); ++i) copy[i] = base[i] + w;
      out.push_back(std::move(copy));
    });
  };
  scan(cfg.body.vertices());
  if (cfg.mode == PackingMode::Double) {
    scan(cfg.reflected().vertices());
  }
  return out;
}

/// N(sigma): copies entirely inside the open window (-sigma/2, sigma/2)^2.
inline WindowCount window_count(const DoubleLatticeConfig& cfg, double sigma) {
  return {sigma, static_cast<long>(copies_in_window(cfg, sigma).size())};
}

/// Inner density N(sigma) |K| / sigma^2.
inline double empirical_density(const DoubleLatticeConfig& cfg, double sigma) {
  return static_cast<double>(window_count(cfg, sigma).count) * cfg.body.area() / (sigma * sigma);
}

struct LemmaRow {
  double sigma = 0.0;
  long count = 0;
  double empirical = 0.0;
  double error = 0.0;     // |empirical - density|
  double envelope = 0.0;  // 4 diam density / sigma
  bool ok = false;
};

struct LemmaReport {
  double density = 0.0;
  std::vector<LemmaRow> rows;
  std::vector<double> offending;
  bool passed() const { return offending.empty(); }
};

/// Checks |empirical_density(sigma) - density| <= 4 diam(K) density / sigma
/// for each sigma. This boundary-layer envelope presumes the lattice cell is
/// small next to the window; sparse lattices are reported as offending.
inline LemmaReport lemma_limit_check(const DoubleLatticeConfig& cfg, std::span<const double> sigmas) {
  if (sigmas.empty()) {
    throw InvalidInput("lemma_limit_check: no window sizes given");
  }
  for (std::size_t i = 1; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > sigmas[i - 1])) throw InvalidInput("lemma_limit_check: sigmas must be increasing");
  }
  LemmaReport rep;
  rep.density = density(cfg);
  const double k_body = 4.0 * cfg.body.diameter() * rep.density;
  for (double sigma : sigmas) {
    LemmaRow row;
    row.sigma = sigma;
    row.count = window_count(cfg, sigma).count;
    row.empirical = static_cast<double>(row.count) * cfg.body.area() / (sigma * sigma);
    row.error = std::abs(row.empirical - rep.density);
    row.envelope = k_body / sigma;
    row.ok = row.error <= row.envelope;
    if (!row.ok) rep.offending.push_back(sigma);
    rep.rows.push_back(row);
  }
  return rep;
}

/// CSV `sigma,N,empirical_density`.
inline void write_window_csv(std::ostream& os, const LemmaReport& rep) {
  os << "sigma,N,empirical_density\n";
  char buf[96];
  for (const LemmaRow& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%ld,%.17g\n", r.sigma, r.count, r.empirical);
    os << buf;
  }
}

/// SVG with the window as a <rect> and one <path> per copy inside it.
inline void write_packing_svg(std::ostream& os, const DoubleLatticeConfig& cfg, double sigma) {
  const auto copies = copies_in_window(cfg, sigma);
  const double half = 0.5 * sigma;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g", -half, -half, sigma, sigma);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << buf << "\">\n";
  os << "<g transform=\"scale(1,-1)\" stroke-width=\"" << sigma / 500.0 << "\">\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.9g\" y=\"%.9g\" width=\"%.9g\" height=\"%.9g\"", -half, -half, sigma,
                sigma);
  os << buf << " fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& copy : copies) {
    os << "<path d=\"";
    for (std::size_t i = 0; i < copy.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.9g %.9g ", i == 0 ? "M" : "L", copy[i].x, copy[i].y);
      os << buf;
    }
    os << "Z\" fill=\"#9ecae1\" stroke=\"#08519c\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

// ---------------------------------------------------------------------------
// Optimization

struct OptimizeOptions {
  int restarts = 32;
  int iters = 400;
  std::uint64_t seed = 0;
  double penalty = 1e3;
  PackingMode mode = PackingMode::Double;
  /// Best starts refined afterwards on the overlap-free density.
  int polish_candidates = 4;
};

struct OptimizeResult {
  DoubleLatticeConfig config;
  double density = 0.0;
  int best_restart = -1;
};

namespace detail {

// Parameters: rotation of the body, u = (u1, 0), v = (v1, v2) and, in double
// mode, the reflection center c = (c1, c2). The body is held with its
// centroid at the origin and unit diameter.
class DoubleLatticeProblem {
 public:
  DoubleLatticeProblem(const ConvexPolygon& body, PackingMode mode, double penalty)
      : mode_(mode), penalty_(penalty) {
    const Point2 g = body.centroid();
    scale_ = body.diameter();
    for (const Point2& p : body.vertices()) base_.push_back((1.0 / scale_) * (p - g));
    area_ = body.area() / (scale_ * scale_);
    radius_ = circumradius_about(base_, {0.0, 0.0});
  }

  std::size_t dimension() const { return mode_ == PackingMode::Double ? 6 : 4; }
  double scale() const { return scale_; }
  std::size_t edge_count() const { return base_.size(); }

  double edge_angle(std::size_t e) const {
    const Point2 d = base_[(e + 1) % base_.size()] - base_[e];
    return std::atan2(d.y, d.x);
  }

  const std::vector<Point2>& rotated(double theta) const {
    rotated_.resize(base_.size());
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t i = 0; i < base_.size(); ++i) {
      rotated_[i] = {c * base_[i].x - s * base_[i].y, s * base_[i].x + c * base_[i].y};
    }
    return rotated_;
  }

  /// Valid packing built from the bounding box of the rotated body: columns
  /// of boxes, alternating the body and its reflection.
  std::vector<double> box_seed(double theta) const {
    const Box2 b = bounding_box(rotated(theta));
    const double w = b.hi.x - b.lo.x;
    const double h = b.hi.y - b.lo.y;
    if (mode_ == PackingMode::Single) {
      return {theta, w, 0.0, h};
    }
    // Reflecting about the midpoint of the box's right side puts the second
    // copy in the neighbouring box.
    return {theta, 2.0 * w, 0.0, h, b.hi.x, 0.5 * (b.lo.y + b.hi.y)};
  }

  bool admissible(const std::vector<double>& p) const { return p[1] > 0.0 && p[3] > 0.0; }

  OverlapSummary overlaps(const std::vector<double>& p, double dilation = 1.0) const {
    const auto& verts = rotated(p[0]);
    const Lattice2 lat({dilation * p[1], 0.0}, {dilation * p[2], dilation * p[3]});
    const Point2 c = mode_ == PackingMode::Double ? Point2{dilation * p[4], dilation * p[5]} : Point2{};
    return overlap_summary(verts, {0.0, 0.0}, radius_, lat, c, mode_);
  }

  double density_of(const std::vector<double>& p) const {
    return (mode_ == PackingMode::Double ? 2.0 : 1.0) * area_ / (p[1] * p[3]);
  }

  /// Negated penalized density, for minimization.
  double operator()(const std::vector<double>& p) const {
    if (!admissible(p)) return std::numeric_limits<double>::infinity();
    const double d = density_of(p);
    if (d > 4.0) return std::numeric_limits<double>::infinity();
    return -(d - penalty_ * overlaps(p).total / area_);
  }

  bool valid(const std::vector<double>& p, double dilation = 1.0) const {
    return overlaps(p, dilation).worst <= kGeomEps * area_;
  }

  /// Stricter than valid(): the summed overlap, not just the worst pair,
  /// stays far below the validity tolerance, so density cannot creep above 1.
  bool clear(const std::vector<double>& p, double dilation = 1.0) const {
    return overlaps(p, dilation).total <= 1e-3 * kGeomEps * area_;
  }

  /// Smallest dilation s >= 1 of the translational part that removes all
  /// overlap. Since the body contains the origin, K + s w is a subset of
  /// s (K + w), so validity is monotone in s.
  double repair_dilation(const std::vector<double>& p) const {
    if (clear(p)) return 1.0;
    double lo = 1.0;
    double hi = 1.0 + 1e-6;
    while (!clear(p, hi)) {
      lo = hi;
      hi = 1.0 + 2.0 * (hi - 1.0);
      if (hi > 64.0) return hi;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (clear(p, mid) ? hi : lo) = mid;
    }
    // Margin so that re-deriving the configuration in other coordinates
    // cannot tip it back over the tolerance.
    return hi * (1.0 + 1e-10);
  }

  DoubleLatticeConfig config(const std::vector<double>& p) const {
    std::vector<Point2> verts;
    for (const Point2& q : rotated(p[0])) verts.push_back(scale_ * q);
    const Lattice2 lat({scale_ * p[1], 0.0}, {scale_ * p[2], scale_ * p[3]});
    const Point2 c = mode_ == PackingMode::Double ? Point2{scale_ * p[4], scale_ * p[5]} : Point2{};
    return DoubleLatticeConfig{ConvexPolygon(std::move(verts)), lat, c, mode_};
  }

 private:
  PackingMode mode_;
  double penalty_;
  double scale_ = 1.0;
  double area_ = 0.0;
  double radius_ = 0.0;
  std::vector<Point2> base_;
  mutable std::vector<Point2> rotated_;
};

}  // namespace detail

/// Multi-start derivative-free search for a dense double-lattice (or, in
/// single mode, lattice) packing of a convex body.
///
/// Each start runs Nelder-Mead on density - penalty * overlap / area from a
/// bounding-box packing (edge-aligned for the first starts, randomly rotated
/// and perturbed afterwards); its end point is then dilated just enough to be
/// overlap-free. The best few starts are polished by Nelder-Mead on the
/// dilated density itself, which is continuous across contacts where the
/// penalized objective has ridges.
///
/// The returned body is the input moved rigidly (centroid at the origin,
/// possibly rotated); lattice and reflection center refer to that placement.
/// Deterministic for a fixed seed; ties go to the lowest restart index.
inline OptimizeResult optimize_double_lattice(const ConvexPolygon& body, const OptimizeOptions& opts = {}) {
  if (opts.restarts < 1) throw InvalidInput("optimize_double_lattice: restarts must be >= 1");
  if (opts.iters < 0) throw InvalidInput("optimize_double_lattice: iters must be >= 0");
  if (opts.polish_candidates < 0) throw InvalidInput("optimize_double_lattice: polish_candidates must be >= 0");
  detail::DoubleLatticeProblem problem(body, opts.mode, opts.penalty);
  Rng rng(opts.seed);

  auto dilated = [&](std::vector<double> p) {
    const double s = problem.repair_dilation(p);
    for (std::size_t d = 1; d < p.size(); ++d) p[d] *= s;
    return p;
  };
  auto step_sizes = [](const std::vector<double>& x, double rel) {
    std::vector<double> st(x.size());
    st[0] = rel;
    for (std::size_t d = 1; d < x.size(); ++d) st[d] = rel * std::max(0.2, std::abs(x[d]));
    st[2] = rel * x[1];
    return st;
  };

  struct Candidate {
    std::vector<double> params;
    double density;
    int restart;
  };
  std::vector<Candidate> candidates;
  {
    const std::vector<double> seed = dilated(problem.box_seed(-problem.edge_angle(0)));
    candidates.push_back({seed, problem.density_of(seed), -1});
  }

  for (int r = 0; r < opts.restarts; ++r) {
    const bool aligned = static_cast<std::size_t>(r) < problem.edge_count();
    const double theta = aligned ? -problem.edge_angle(static_cast<std::size_t>(r))
                                 : rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<double> x = problem.box_seed(theta);
    if (!aligned) {
      for (std::size_t d = 1; d < x.size(); ++d) x[d] *= rng.uniform(0.75, 1.1);
    }
    // Two passes: the second restarts a smaller simplex around the first optimum.
    const int first = opts.iters / 2;
    SimplexResult run = nelder_mead(problem, x, step_sizes(x, 0.15), first);
    run = nelder_mead(problem, run.x, step_sizes(run.x, 0.015), opts.iters - first);
    if (!problem.admissible(run.x)) continue;
    std::vector<double> p = dilated(run.x);
    if (!problem.clear(p)) continue;
    candidates.push_back({p, problem.density_of(p), r});
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.density > b.density; });
  const std::size_t polish = std::min(candidates.size(), static_cast<std::size_t>(opts.polish_candidates));
  auto repaired_objective = [&](const std::vector<double>& q) {
    if (!problem.admissible(q)) return std::numeric_limits<double>::infinity();
    const double s = problem.repair_dilation(q);
    return -problem.density_of(q) / (s * s);
  };
  for (std::size_t i = 0; i < polish; ++i) {
    Candidate& c = candidates[i];
    double rel = 0.02;
    for (int used = 0; used < opts.iters;) {
      const SimplexResult run = nelder_mead(repaired_objective, c.params, step_sizes(c.params, rel),
                                            opts.iters - used, 1e-13);
      used += std::max(1, run.iterations);
      std::vector<double> p = dilated(run.x);
      if (problem.clear(p) && problem.density_of(p) > c.density) {
        c.params = std::move(p);
        c.density = problem.density_of(c.params);
      } else {
        rel *= 0.3;
      }
    }
  }

  const Candidate* best = &candidates.front();
  for (const Candidate& c : candidates) {
    if (c.density > best->density || (c.density == best->density && c.restart < best->restart)) best = &c;
  }
  OptimizeResult out{problem.config(best->params), 0.0, best->restart};
  out.density = density(out.config);
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

enum class ConstantKind { Exact, LowerBound, Decimal };

inline std::string_view to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::Exact: return "exact";
    case ConstantKind::LowerBound: return "lower_bound";
    case ConstantKind::Decimal: return "decimal";
  }
  return "unknown";
}

struct KnownConstant {
  std::string id;
  double value = 0.0;
  ConstantKind kind = ConstantKind::Exact;
  std::string expression;
  std::string note;
};

/// Packing constants and floors by identifier. `cylinder-over:<id>` returns
/// the constant of the base body <id>.
inline KnownConstant known_constant(std::string_view id) {
  constexpr std::string_view kCylinder = "cylinder-over:";
  if (id.starts_with(kCylinder)) {
    KnownConstant base = known_constant(id.substr(kCylinder.size()));
    base.id = std::string(id);
    base.note = "cylinder over a plane body inherits the body's packing density";
    return base;
  }
  const double pi = std::numbers::pi;
  if (id == "unit-ball-3d") {
    return {std::string(id), pi / std::sqrt(18.0), ConstantKind::LowerBound, "pi/sqrt(18)", "known 3D lower bound"};
  }
  if (id == "regular-octahedron") {
    return {std::string(id), 18.0 / 19.0, ConstantKind::LowerBound, "18/19", "known 3D lower bound"};
  }
  if (id == "doubled-cone") {
    return {std::string(id), pi * std::sqrt(6.0) / 9.0, ConstantKind::LowerBound, "pi*sqrt(6)/9", "known 3D lower bound"};
  }
  if (id == "tetrahedron") {
    return {std::string(id), 0.856, ConstantKind::Decimal, "0.856...", "known 3D lower bound, truncated decimal"};
  }
  if (id == "square-2d") {
    return {std::string(id), 1.0, ConstantKind::Exact, "1", "tiles the plane"};
  }
  if (id == "disc-2d") {
    return {std::string(id), pi / std::sqrt(12.0), ConstantKind::Exact, "pi/sqrt(12)", "hexagonal packing"};
  }
  if (id == "convex-2d-floor") {
    return {std::string(id), std::sqrt(3.0) / 2.0, ConstantKind::LowerBound, "sqrt(3)/2",
            "floor for every convex planar body"};
  }
  throw InvalidInput("known_constant: unknown body id '" + std::string(id) + "'");
}

}  // namespace packbound

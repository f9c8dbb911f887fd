#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "packbound/errors.hpp"
#include "packbound/geometry.hpp"
#include "packbound/random.hpp"

namespace packbound {

struct Disc {
  Point2 center{};
  double radius = 1.0;
};

/// Axis-aligned rectangle [origin.x, origin.x + width] x [origin.y, origin.y + height].
struct Rectangle {
  double width = 1.0;
  double height = 1.0;
  Point2 origin{};
};

/// A planar test domain: convex polygon, disc, or axis-aligned rectangle.
class DomainSpec {
 public:
  using Shape = std::variant<ConvexPolygon, Disc, Rectangle>;

  explicit DomainSpec(Shape shape) : shape_(std::move(shape)) {
    if (const auto* d = std::get_if<Disc>(&shape_); d && !(d->radius > 0.0)) {
      throw InvalidInput("DomainSpec: disc radius must be positive");
    }
    if (const auto* r = std::get_if<Rectangle>(&shape_); r && !(r->width > 0.0 && r->height > 0.0)) {
      throw InvalidInput("DomainSpec: rectangle sides must be positive");
    }
  }

  static DomainSpec polygon(ConvexPolygon p) { return DomainSpec(std::move(p)); }
  static DomainSpec disc(Point2 center, double radius) { return DomainSpec(Disc{center, radius}); }
  static DomainSpec rectangle(double width, double height, Point2 origin = {}) {
    return DomainSpec(Rectangle{width, height, origin});
  }
  static DomainSpec unit_square() { return rectangle(1.0, 1.0); }
  static DomainSpec unit_disc() { return disc({0.0, 0.0}, 1.0); }

  const Shape& shape() const noexcept { return shape_; }
  bool is_convex_polygon() const { return !std::holds_alternative<Disc>(shape_); }

  double area() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConvexPolygon>) {
            return s.area();
          } else if constexpr (std::is_same_v<T, Disc>) {
            return std::numbers::pi * s.radius * s.radius;
          } else {
            return s.width * s.height;
          }
        },
        shape_);
  }

  double diameter() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConvexPolygon>) {
            return s.diameter();
          } else if constexpr (std::is_same_v<T, Disc>) {
            return 2.0 * s.radius;
          } else {
            return std::hypot(s.width, s.height);
          }
        },
        shape_);
  }

  Box2 bounds() const {
    return std::visit(
        [](const auto& s) -> Box2 {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConvexPolygon>) {
            return bounding_box(s);
          } else if constexpr (std::is_same_v<T, Disc>) {
            return {{s.center.x - s.radius, s.center.y - s.radius},
                    {s.center.x + s.radius, s.center.y + s.radius}};
          } else {
            return {s.origin, {s.origin.x + s.width, s.origin.y + s.height}};
          }
        },
        shape_);
  }

  /// True iff q lies inside with clearance greater than `tol`.
  bool contains_strictly(Point2 q, double tol) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConvexPolygon>) {
            return packbound::contains_strictly(s, q, tol);
          } else if constexpr (std::is_same_v<T, Disc>) {
            return norm(q - s.center) < s.radius - tol;
          } else {
            return q.x > s.origin.x + tol && q.x < s.origin.x + s.width - tol &&
                   q.y > s.origin.y + tol && q.y < s.origin.y + s.height - tol;
          }
        },
        shape_);
  }

  /// Homothety about the origin.
  DomainSpec scaled(double t) const {
    if (!(t > 0.0)) {
      throw InvalidInput("DomainSpec::scaled: factor must be positive");
    }
    return std::visit(
        [t](const auto& s) -> DomainSpec {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConvexPolygon>) {
            return DomainSpec(packbound::scaled(s, t));
          } else if constexpr (std::is_same_v<T, Disc>) {
            return DomainSpec(Disc{t * s.center, t * s.radius});
          } else {
            return DomainSpec(Rectangle{t * s.width, t * s.height, t * s.origin});
          }
        },
        shape_);
  }

 private:
  Shape shape_;
};

/// Uniform grid of nodes origin + (i h, j h); mask marks the interior nodes.
class GridDomain {
 public:
  GridDomain(double h, Point2 origin, int nx, int ny, std::vector<std::uint8_t> mask)
      : h_(h), origin_(origin), nx_(nx), ny_(ny), mask_(std::move(mask)) {
    if (!(h > 0.0) || nx < 1 || ny < 1) {
      throw InvalidInput("GridDomain: need h > 0 and a non-empty grid");
    }
    if (mask_.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
      throw InvalidInput("GridDomain: mask size does not match nx * ny");
    }
    interior_count_ = 0;
    for (std::uint8_t& m : mask_) {
      m = m ? 1 : 0;
      interior_count_ += m;
    }
    if (interior_count_ < 1) {
      throw ResolutionTooCoarse("GridDomain: no interior nodes");
    }
  }

  double spacing() const noexcept { return h_; }
  Point2 origin() const noexcept { return origin_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int interior_count() const noexcept { return interior_count_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

  bool interior(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx_ && j < ny_ && mask_[index(i, j)] != 0;
  }
  Point2 node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  /// interior_count * h^2, the discrete area.
  double discrete_area() const { return interior_count_ * h_ * h_; }

 private:
  double h_;
  Point2 origin_;
  int nx_;
  int ny_;
  std::vector<std::uint8_t> mask_;
  int interior_count_ = 0;
};

/// Marks node (i, j) interior iff it lies strictly inside the domain.
inline GridDomain rasterize(const DomainSpec& d, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidInput("rasterize: h must be positive");
  }
  if (h >= d.diameter() / 8.0) {
    throw ResolutionTooCoarse("rasterize: h must be smaller than diameter / 8");
  }
  const Box2 box = d.bounds();
  const int nx = static_cast<int>(std::floor((box.hi.x - box.lo.x) / h)) + 2;
  const int ny = static_cast<int>(std::floor((box.hi.y - box.lo.y) / h)) + 2;
  // Nodes sitting on the boundary up to roundoff must not count as inside.
  const double tol = 1e-9 * h;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point2 p{box.lo.x + i * h, box.lo.y + j * h};
      mask[static_cast<std::size_t>(j) * nx + i] = d.contains_strictly(p, tol) ? 1 : 0;
    }
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ResolutionTooCoarse("rasterize: no grid node inside the domain");
  }
  return GridDomain(h, box.lo, nx, ny, std::move(mask));
}

/// Five-point Dirichlet Laplacian on the interior nodes of a grid.
struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  double h = 0.0;

  int dimension() const { return static_cast<int>(matrix.rows()); }
};

inline SparseOperator assemble_laplacian(const GridDomain& g) {
  const double h = g.spacing();
  const double diag = 4.0 / (h * h);
  const double off = -1.0 / (h * h);
  std::vector<int> number(g.mask().size(), -1);
  int n = 0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (g.interior(i, j)) {
        number[g.index(i, j)] = n++;
      }
    }
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * 5);
  constexpr int kDi[] = {1, -1, 0, 0};
  constexpr int kDj[] = {0, 0, 1, -1};
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.interior(i, j)) {
        continue;
      }
      const int row = number[g.index(i, j)];
      entries.emplace_back(row, row, diag);
      for (int s = 0; s < 4; ++s) {
        // Exterior neighbours are dropped: homogeneous Dirichlet data.
        if (g.interior(i + kDi[s], j + kDj[s])) {
          entries.emplace_back(row, number[g.index(i + kDi[s], j + kDj[s])], off);
        }
      }
    }
  }
  SparseOperator op;
  op.h = h;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  return op;
}

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // ||A v - lambda v|| / (lambda ||v||)
  std::shared_ptr<const GridDomain> grid;
  int k_requested = 0;
};

struct EigenOptions {
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Work budget in linear solves per requested eigenvalue.
  int solves_per_eigenvalue = 200;
};

namespace detail {

inline std::vector<double> relative_residuals(const Eigen::SparseMatrix<double>& a,
                                              const Eigen::MatrixXd& vectors,
                                              const Eigen::VectorXd& values, int k) {
  const Eigen::MatrixXd av = a * vectors.leftCols(k);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double lam = values(i);
    const double r = (av.col(i) - lam * vectors.col(i)).norm();
    out[static_cast<std::size_t>(i)] = r / (std::abs(lam) * vectors.col(i).norm());
  }
  return out;
}

inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace detail

/// The k algebraically smallest eigenvalues of a symmetric positive definite
/// operator. Small problems are diagonalized densely; larger ones use block
/// inverse subspace iteration (sparse LDL^T factorization, Rayleigh-Ritz each
/// sweep) until every wanted Ritz pair meets the residual tolerance.
inline Spectrum lowest_eigenvalues(const SparseOperator& op, int k, const EigenOptions& opts = {}) {
  const int n = op.dimension();
  if (k < 1 || k > n) {
    throw InvalidInput("lowest_eigenvalues: need 1 <= k <= dimension");
  }
  const auto& a = op.matrix;
  Spectrum out;
  out.k_requested = k;

  const int block = std::min(n, std::max(2 * k, k + 8));
  if (n <= 400 || 2 * block >= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
      throw ConvergenceFailure("lowest_eigenvalues: dense eigensolver failed", {});
    }
    out.residuals = detail::relative_residuals(a, es.eigenvectors(), es.eigenvalues(), k);
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
    if (*std::max_element(out.residuals.begin(), out.residuals.end()) > opts.tol) {
      throw ConvergenceFailure("lowest_eigenvalues: dense residual check failed", out.residuals);
    }
    return out;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(a);
  if (factor.info() != Eigen::Success) {
    throw ConvergenceFailure("lowest_eigenvalues: factorization failed", {});
  }

  Rng rng(opts.seed);
  Eigen::MatrixXd x(n, block);
  for (int c = 0; c < block; ++c) {
    for (int r = 0; r < n; ++r) {
      x(r, c) = rng.normal();
    }
  }
  x = detail::orthonormal_basis(x);

  const int max_sweeps = std::max(1, opts.solves_per_eigenvalue * k / block);
  std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::MatrixXd q = detail::orthonormal_basis(factor.solve(x));
    const Eigen::MatrixXd aq = a * q;
    Eigen::MatrixXd projected = q.transpose() * aq;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected);
    x = q * es.eigenvectors();
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd ax = aq * es.eigenvectors();

    std::vector<double> res(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      res[static_cast<std::size_t>(i)] =
          (ax.col(i) - theta(i) * x.col(i)).norm() / (std::abs(theta(i)) * x.col(i).norm());
    }
    if (*std::max_element(res.begin(), res.end()) < *std::max_element(best.begin(), best.end())) {
      best = res;
    }
    if (*std::max_element(res.begin(), res.end()) <= opts.tol) {
      // Mandatory post-check straight from the operator, independent of the
      // projected quantities above.
      out.residuals = detail::relative_residuals(a, x, theta, k);
      if (*std::max_element(out.residuals.begin(), out.residuals.end()) <= opts.tol) {
        out.eigenvalues.assign(theta.data(), theta.data() + k);
        return out;
      }
    }
  }
  throw ConvergenceFailure("lowest_eigenvalues: iteration budget exhausted", best);
}

/// Rasterize, assemble, and solve in one step; keeps a handle on the grid.
inline Spectrum grid_spectrum(const DomainSpec& d, double h, int k, const EigenOptions& opts = {}) {
  auto grid = std::make_shared<const GridDomain>(rasterize(d, h));
  if (k > grid->interior_count()) {
    throw InvalidInput("grid_spectrum: k exceeds the number of interior nodes");
  }
  Spectrum s = lowest_eigenvalues(assemble_laplacian(*grid), k, opts);
  s.grid = std::move(grid);
  return s;
}

/// #{ j : lambda_j <= x }, defined only on the resolved range [0, lambda_k].
inline int counting_function(const Spectrum& s, double x) {
  if (!(x >= 0.0)) {
    throw InvalidInput("counting_function: x must be non-negative");
  }
  if (s.eigenvalues.empty() || x > s.eigenvalues.back()) {
    throw OutOfRange("counting_function: x beyond the resolved part of the spectrum");
  }
  return static_cast<int>(std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), x) -
                          s.eigenvalues.begin());
}

/// Richardson extrapolation assuming O(h^2) error. Eigenvalues are paired by
/// sorted index; the finest pair of spacings determines the result.
inline Spectrum refine_extrapolate(const DomainSpec& d, int k, std::span<const double> h_list,
                                   const EigenOptions& opts = {}) {
  if (h_list.size() < 2) {
    throw InvalidInput("refine_extrapolate: need at least two grid spacings");
  }
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0) || (i > 0 && !(h_list[i] < h_list[i - 1]))) {
      throw InvalidInput("refine_extrapolate: spacings must be positive and strictly decreasing");
    }
  }
  std::vector<Spectrum> levels;
  levels.reserve(h_list.size());
  for (double h : h_list) {
    levels.push_back(grid_spectrum(d, h, k, opts));
  }
  const Spectrum& coarse = levels[levels.size() - 2];
  const Spectrum& fine = levels.back();
  const double h1 = h_list[h_list.size() - 2];
  const double h2 = h_list.back();
  const double w1 = h1 * h1;
  const double w2 = h2 * h2;

  Spectrum out;
  out.k_requested = k;
  out.grid = fine.grid;
  out.eigenvalues.resize(static_cast<std::size_t>(k));
  out.residuals.assign(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    out.eigenvalues[i] = (w1 * fine.eigenvalues[i] - w2 * coarse.eigenvalues[i]) / (w1 - w2);
    for (const Spectrum& s : levels) {
      out.residuals[i] = std::max(out.residuals[i], s.residuals[i]);
    }
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

/// Lowest `count` Dirichlet eigenvalues pi^2 (j^2/a^2 + l^2/b^2) of an a x b rectangle.
inline std::vector<double> analytic_rectangle_spectrum(double width, double height, int count) {
  if (count < 1 || !(width > 0.0) || !(height > 0.0)) {
    throw InvalidInput("analytic_rectangle_spectrum: invalid arguments");
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  int mj = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) + 1;
  int ml = mj;
  for (;;) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(mj) * static_cast<std::size_t>(ml));
    for (int j = 1; j <= mj; ++j) {
      for (int l = 1; l <= ml; ++l) {
        values.push_back(pi2 * (double(j) * j / (width * width) + double(l) * l / (height * height)));
      }
    }
    if (static_cast<int>(values.size()) >= count) {
      std::nth_element(values.begin(), values.begin() + (count - 1), values.end());
      const double cutoff = values[static_cast<std::size_t>(count - 1)];
      // Every omitted mode must lie above the cutoff.
      const double next_j = pi2 * (double(mj + 1) * (mj + 1) / (width * width) + 1.0 / (height * height));
      const double next_l = pi2 * (1.0 / (width * width) + double(ml + 1) * (ml + 1) / (height * height));
      if (next_j > cutoff && next_l > cutoff) {
        values.resize(static_cast<std::size_t>(count));
        std::sort(values.begin(), values.end());
        return values;
      }
      if (next_j <= cutoff) mj *= 2;
      if (next_l <= cutoff) ml *= 2;
    } else {
      mj *= 2;
      ml *= 2;
    }
  }
}

/// CSV with header `index,eigenvalue,residual`, 1-based index, 17 significant digits.
inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,eigenvalue,residual\n";
  char buf[96];
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, s.eigenvalues[i],
                  i < s.residuals.size() ? s.residuals[i] : 0.0);
    os << buf;
  }
}

}  // namespace packbound

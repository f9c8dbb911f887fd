#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "packbound/packing.hpp"

using namespace packbound;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

ConvexPolygon unit_square() { return ConvexPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }
ConvexPolygon centred_square() { return ConvexPolygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}); }
ConvexPolygon right_triangle() { return ConvexPolygon({{0, 0}, {1, 0}, {0, 1}}); }

DoubleLatticeConfig single(const ConvexPolygon& body, Point2 u, Point2 v) {
  return {body, Lattice2(u, v), {}, PackingMode::Single};
}

DoubleLatticeConfig triangle_tiling() {
  return {right_triangle(), Lattice2({1, 0}, {0, 1}), {0.5, 0.5}, PackingMode::Double};
}

DoubleLatticeConfig hexagonal(int m) {
  return single(regular_polygon(m, 1.0), {2, 0}, {1, kSqrt3});
}

std::size_t count_substr(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Lattice, RejectsDegenerateOrNegativeBasis) {
  EXPECT_THROW(Lattice2({1, 0}, {2, 0}), InvalidInput);
  EXPECT_THROW(Lattice2({0, 1}, {1, 0}), InvalidInput);
  EXPECT_DOUBLE_EQ(Lattice2({2, 0}, {1, kSqrt3}).det(), 2 * kSqrt3);
}

TEST(Density, Examples) {
  EXPECT_DOUBLE_EQ(density(single(unit_square(), {1, 0}, {0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(density(triangle_tiling()), 1.0);
  EXPECT_NEAR(density(hexagonal(4096)), kPi / std::sqrt(12.0), 1e-4);
  EXPECT_NEAR(kPi / std::sqrt(12.0), 0.906899, 1e-6);
}

TEST(Validity, Examples) {
  EXPECT_TRUE(is_valid_packing(single(unit_square(), {1, 0}, {0, 1})));
  EXPECT_FALSE(is_valid_packing(single(unit_square(), {0.9, 0}, {0, 1})));
  EXPECT_TRUE(is_valid_packing(triangle_tiling()));
  EXPECT_TRUE(is_valid_packing(hexagonal(64)));
  EXPECT_FALSE(is_valid_packing(single(regular_polygon(64, 1.0), {1.99, 0}, {1, kSqrt3})));
  // Reflection centre off the tiling position makes the families collide.
  DoubleLatticeConfig shifted = triangle_tiling();
  shifted.reflection_center = {0.4, 0.5};
  EXPECT_FALSE(is_valid_packing(shifted));
}

TEST(TotalOverlap, Examples) {
  EXPECT_LE(total_overlap_area(single(unit_square(), {1, 0}, {0, 1})), 1e-12);
  EXPECT_LE(total_overlap_area(triangle_tiling()), 1e-12);
  const DoubleLatticeConfig half = single(unit_square(), {0.5, 0}, {0, 1});
  EXPECT_NEAR(total_overlap_area(half), 0.5, 1e-12);
  EXPECT_NEAR(total_overlap_area(half), oracle::brute_force_overlap_per_cell(half, 4), 1e-12);
}

TEST(TotalOverlap, MatchesBruteForceOnRandomConfigs) {
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Rng rng(seed);
    const ConvexPolygon body = random_convex_polygon(3 + static_cast<int>(seed % 6), seed);
    const Lattice2 lat({rng.uniform(0.5, 1.0), rng.uniform(-0.2, 0.2)}, {rng.uniform(-0.4, 0.4), rng.uniform(0.5, 1.0)});
    const DoubleLatticeConfig cfg{body, lat, {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)},
                                  seed % 3 == 0 ? PackingMode::Single : PackingMode::Double};
    const double expected = oracle::brute_force_overlap_per_cell(cfg, 5);
    EXPECT_NEAR(total_overlap_area(cfg), expected, 1e-11 * (1.0 + expected)) << "seed " << seed;
    EXPECT_EQ(is_valid_packing(cfg), expected <= 0.0 || total_overlap_area(cfg) <= 1e-12 * body.area());
  }
}

TEST(Invariance, RigidMotionAndScaling) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 7);
    const ConvexPolygon body = random_convex_polygon(5, seed);
    const DoubleLatticeConfig cfg{body, Lattice2({0.8, 0.1}, {0.2, 0.7}), {0.1, -0.2}, PackingMode::Double};
    const double theta = rng.uniform(0, 2 * kPi);
    const Point2 shift{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Pose2 motion(theta, shift);
    const DoubleLatticeConfig moved{transformed(body, motion),
                                    Lattice2(rotate(cfg.lattice.u(), theta), rotate(cfg.lattice.v(), theta)),
                                    motion.apply(cfg.reflection_center), PackingMode::Double};
    EXPECT_NEAR(density(moved), density(cfg), 1e-12);
    EXPECT_NEAR(total_overlap_area(moved), total_overlap_area(cfg), 1e-11);

    const double t = 2.5;
    const DoubleLatticeConfig big{scaled(body, t), Lattice2(t * cfg.lattice.u(), t * cfg.lattice.v()),
                                  t * cfg.reflection_center, PackingMode::Double};
    EXPECT_NEAR(density(big), density(cfg), 1e-12);
    EXPECT_NEAR(total_overlap_area(big), t * t * total_overlap_area(cfg), 1e-10);
  }
}

TEST(WindowCount, CentredSquareTiling) {
  const DoubleLatticeConfig cfg = single(centred_square(), {1, 0}, {0, 1});
  EXPECT_EQ(window_count(cfg, 10.0).count, 81);
  EXPECT_EQ(window_count(cfg, 10.0).count, oracle::brute_force_window_count(cfg, 10.0, 20));
  EXPECT_DOUBLE_EQ(empirical_density(cfg, 10.0), 0.81);
}

TEST(WindowCount, CornerAnchoredSquareTiling) {
  // Squares [i, i+1] x [j, j+1] strictly inside (-5, 5)^2: i in -4..3.
  const DoubleLatticeConfig cfg = single(unit_square(), {1, 0}, {0, 1});
  EXPECT_EQ(window_count(cfg, 10.0).count, 64);
  EXPECT_EQ(window_count(cfg, 10.0).count, oracle::brute_force_window_count(cfg, 10.0, 20));
}

TEST(WindowCount, TriangleTilingMatchesBruteForce) {
  const DoubleLatticeConfig cfg = triangle_tiling();
  EXPECT_EQ(window_count(cfg, 20.0).count, oracle::brute_force_window_count(cfg, 20.0, 30));
  EXPECT_THROW(window_count(cfg, cfg.body.diameter()), InvalidInput);
  EXPECT_THROW(window_count(cfg, 1.0), InvalidInput);
}

TEST(WindowCount, RandomConfigsMatchBruteForceAndAreMonotone) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const ConvexPolygon body = random_convex_polygon(4 + static_cast<int>(seed % 5), seed + 3);
    const DoubleLatticeConfig cfg{body, Lattice2({rng.uniform(1.0, 1.5), 0.3}, {rng.uniform(-0.5, 0.5), 1.2}),
                                  {rng.uniform(-1, 1), rng.uniform(-1, 1)}, PackingMode::Double};
    long previous = 0;
    for (double sigma : {1.5, 3.3, 7.0, 12.9}) {
      const long n = window_count(cfg, sigma).count;
      EXPECT_EQ(n, oracle::brute_force_window_count(cfg, sigma, 40)) << "seed " << seed << " sigma " << sigma;
      EXPECT_GE(n, previous);
      previous = n;
    }
  }
}

TEST(EmpiricalDensity, ApproachesDensity) {
  const DoubleLatticeConfig sq = single(centred_square(), {1, 0}, {0, 1});
  EXPECT_NEAR(empirical_density(sq, 1000.0), 1.0, 0.005);
  // 64-gons on the hexagonal lattice: the error stays inside the boundary-layer
  // envelope 4 diam density / sigma and shrinks like 1/sigma.
  for (double r : {0.5, 1.0}) {
    const DoubleLatticeConfig hex = single(regular_polygon(64, r), {2 * r, 0}, {r, kSqrt3 * r});
    const double diam = 2 * r;
    double previous = 1.0;
    for (double sigma : {40.0, 80.0, 160.0}) {
      const double err = std::abs(empirical_density(hex, sigma) - density(hex));
      EXPECT_LE(err, 4.0 * diam * density(hex) / sigma) << "r " << r << " sigma " << sigma;
      EXPECT_LT(err, previous);
      previous = err;
    }
  }
  for (double sigma : {5.0, 10.0, 40.0}) EXPECT_LE(empirical_density(triangle_tiling(), sigma), 1.0);
}

TEST(LemmaCheck, SquareTiling) {
  const std::vector<double> sigmas{10, 20, 40};
  const LemmaReport rep = lemma_limit_check(single(centred_square(), {1, 0}, {0, 1}), sigmas);
  ASSERT_EQ(rep.rows.size(), 3u);
  const double observed[] = {0.19, 0.0975, 0.049375};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(rep.rows[i].error, observed[i], 1e-12);
    EXPECT_NEAR(rep.rows[i].envelope, 4.0 * std::sqrt(2.0) / sigmas[i], 1e-12);
    EXPECT_TRUE(rep.rows[i].ok);
  }
  EXPECT_TRUE(rep.passed());
}

TEST(LemmaCheck, TriangleTilingPasses) {
  const std::vector<double> sigmas{10, 20, 40};
  EXPECT_TRUE(lemma_limit_check(triangle_tiling(), sigmas).passed());
}

TEST(LemmaCheck, SparseLatticeOutsideEnvelope) {
  // A single far-away copy: N = 0, error = density, envelope 4 diam density / sigma.
  const DoubleLatticeConfig lonely = single(translated(centred_square(), {500, 500}), {1e4, 0}, {0, 1e4});
  const std::vector<double> small{2.0, 5.0};
  const LemmaReport ok = lemma_limit_check(lonely, small);
  EXPECT_TRUE(ok.passed());
  EXPECT_EQ(ok.rows[0].count, 0);
  const std::vector<double> large{2.0, 10.0};
  const LemmaReport bad = lemma_limit_check(lonely, large);
  EXPECT_FALSE(bad.passed());
  EXPECT_EQ(bad.offending, std::vector<double>{10.0});
}

TEST(LemmaCheck, RejectsBadSigmaLists) {
  EXPECT_THROW(lemma_limit_check(triangle_tiling(), std::vector<double>{}), InvalidInput);
  EXPECT_THROW(lemma_limit_check(triangle_tiling(), std::vector<double>{20, 10}), InvalidInput);
}

TEST(Optimizer, TrianglesAndSquaresTile) {
  for (const ConvexPolygon& body : {right_triangle(), unit_square()}) {
    const OptimizeResult r = optimize_double_lattice(body);
    EXPECT_GE(r.density, 0.999);
    EXPECT_LE(r.density, 1.0 + kGeomEps);
    EXPECT_TRUE(is_valid_packing(r.config));
    EXPECT_DOUBLE_EQ(density(r.config), r.density);
  }
}

TEST(Optimizer, DiscProxyNearHexagonal) {
  const OptimizeResult r = optimize_double_lattice(regular_polygon(64, 1.0));
  EXPECT_GE(r.density, 0.90);
  EXPECT_TRUE(is_valid_packing(r.config));
}

TEST(Optimizer, RandomBodiesClearConvexFloor) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ConvexPolygon body = random_convex_polygon(3 + static_cast<int>(seed % 10), seed);
    const OptimizeResult r = optimize_double_lattice(body);
    EXPECT_GE(r.density, kSqrt3 / 2.0 - 1e-6) << "seed " << seed;
    EXPECT_LE(r.density, 1.0 + kGeomEps);
    EXPECT_TRUE(is_valid_packing(r.config)) << "seed " << seed;
  }
}

TEST(Optimizer, DeterministicForSeed) {
  const ConvexPolygon body = random_convex_polygon(7, 11);
  OptimizeOptions opts;
  opts.restarts = 8;
  opts.seed = 5;
  const OptimizeResult a = optimize_double_lattice(body, opts);
  const OptimizeResult b = optimize_double_lattice(body, opts);
  EXPECT_EQ(a.density, b.density);
  EXPECT_EQ(a.best_restart, b.best_restart);
  EXPECT_EQ(a.config.lattice.u(), b.config.lattice.u());
  EXPECT_EQ(a.config.lattice.v(), b.config.lattice.v());
  EXPECT_EQ(a.config.reflection_center, b.config.reflection_center);
}

TEST(Optimizer, SingleModeNeverBeatsDoubleMode) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ConvexPolygon body = random_convex_polygon(3 + static_cast<int>(seed), seed + 40);
    OptimizeOptions opts;
    opts.mode = PackingMode::Single;
    const OptimizeResult s = optimize_double_lattice(body, opts);
    const OptimizeResult d = optimize_double_lattice(body);
    EXPECT_EQ(s.config.mode, PackingMode::Single);
    EXPECT_TRUE(is_valid_packing(s.config));
    EXPECT_LE(s.density, d.density + 1e-3) << "seed " << seed;
  }
}

TEST(KnownConstant, Catalog) {
  EXPECT_DOUBLE_EQ(known_constant("unit-ball-3d").value, kPi / std::sqrt(18.0));
  EXPECT_NEAR(known_constant("unit-ball-3d").value, 0.7405, 1e-4);
  EXPECT_EQ(known_constant("unit-ball-3d").kind, ConstantKind::LowerBound);
  EXPECT_DOUBLE_EQ(known_constant("regular-octahedron").value, 18.0 / 19.0);
  EXPECT_NEAR(known_constant("regular-octahedron").value, 0.9473, 1e-4);
  EXPECT_NEAR(known_constant("doubled-cone").value, 0.855, 1e-3);
  EXPECT_DOUBLE_EQ(known_constant("doubled-cone").value, kPi * std::sqrt(6.0) / 9.0);
  EXPECT_EQ(known_constant("tetrahedron").value, 0.856);
  EXPECT_EQ(known_constant("tetrahedron").kind, ConstantKind::Decimal);
  EXPECT_EQ(known_constant("square-2d").value, 1.0);
  EXPECT_EQ(known_constant("square-2d").kind, ConstantKind::Exact);
  EXPECT_DOUBLE_EQ(known_constant("disc-2d").value, kPi / std::sqrt(12.0));
  EXPECT_DOUBLE_EQ(known_constant("convex-2d-floor").value, kSqrt3 / 2.0);
  EXPECT_THROW(known_constant("dodecahedron"), InvalidInput);
}

TEST(KnownConstant, CylinderInheritsBase) {
  for (const char* id : {"disc-2d", "square-2d", "convex-2d-floor", "unit-ball-3d"}) {
    const KnownConstant base = known_constant(id);
    const KnownConstant cyl = known_constant(std::string("cylinder-over:") + id);
    EXPECT_EQ(cyl.value, base.value);
    EXPECT_EQ(cyl.kind, base.kind);
  }
  EXPECT_THROW(known_constant("cylinder-over:nothing"), InvalidInput);
}

TEST(Export, SvgHasOnePathPerCopy) {
  const DoubleLatticeConfig cfg = triangle_tiling();
  std::ostringstream os;
  write_packing_svg(os, cfg, 6.0);
  const std::string svg = os.str();
  EXPECT_EQ(count_substr(svg, "<rect"), 1u);
  EXPECT_EQ(count_substr(svg, "<path"), static_cast<std::size_t>(window_count(cfg, 6.0).count));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Export, WindowCsv) {
  const LemmaReport rep = lemma_limit_check(single(centred_square(), {1, 0}, {0, 1}), std::vector<double>{10.0});
  std::ostringstream os;
  write_window_csv(os, rep);
  EXPECT_EQ(os.str(), "sigma,N,empirical_density\n10,81,0.81000000000000005\n");
}

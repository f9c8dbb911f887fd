#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>

#include "packbound/errors.hpp"

namespace packbound {

/// Dimension n, volume V, packing constant delta and eigenvalue index k.
struct BoundInputs {
  int n = 2;
  double volume = 1.0;
  double delta = 1.0;
  long long k = 1;

  void validate() const {
    if (n < 1) throw InvalidInput("BoundInputs: dimension must be >= 1");
    if (!(volume > 0.0) || !std::isfinite(volume)) throw InvalidInput("BoundInputs: volume must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("BoundInputs: delta must lie in (0, 1]");
    if (k < 1) throw InvalidInput("BoundInputs: k must be >= 1");
  }
};

enum class BoundKind { WeylAsymptote, Polya, LiYau, Theorem1, Corollary3, Counting };

inline std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::WeylAsymptote: return "weyl_asymptote";
    case BoundKind::Polya: return "polya";
    case BoundKind::LiYau: return "li_yau";
    case BoundKind::Theorem1: return "theorem1";
    case BoundKind::Corollary3: return "corollary3";
    case BoundKind::Counting: return "counting";
  }
  return "unknown";
}

struct BoundResult {
  double value = 0.0;
  BoundKind kind = BoundKind::Polya;
};

/// Volume of the unit n-ball, pi^{n/2} / Gamma(n/2 + 1), via the exact
/// recurrence w_n = (2 pi / n) w_{n-2}.
inline double unit_ball_volume(int n) {
  if (n < 1) throw InvalidInput("unit_ball_volume: n must be >= 1");
  double w = (n % 2 == 0) ? 1.0 : 2.0;
  for (int m = (n % 2 == 0) ? 2 : 3; m <= n; m += 2) {
    w *= 2.0 * std::numbers::pi / m;
  }
  return w;
}

/// Weyl constant C_n = (2 pi)^2 / w_n^{2/n}.
inline double weyl_constant(int n) {
  const double two_pi = 2.0 * std::numbers::pi;
  return two_pi * two_pi / std::pow(unit_ball_volume(n), 2.0 / n);
}

/// Counting-form constant L_n = w_n / (2 pi)^n, so that C_n = L_n^{-2/n}.
inline double counting_constant(int n) {
  return unit_ball_volume(n) / std::pow(2.0 * std::numbers::pi, n);
}

/// lambda_k >= C_n (k/V)^{2/n} for domains that tile by reflection and translation.
inline BoundResult polya_bound(const BoundInputs& in) {
  BoundInputs probe = in;
  probe.delta = 1.0;
  probe.validate();
  return {weyl_constant(in.n) * std::pow(static_cast<double>(in.k) / in.volume, 2.0 / in.n), BoundKind::Polya};
}

/// Universal lower bound n/(n+2) C_n (k/V)^{2/n}.
inline BoundResult li_yau_bound(const BoundInputs& in) {
  in.validate();
  return {static_cast<double>(in.n) / (in.n + 2) * polya_bound(in).value, BoundKind::LiYau};
}

/// Packing lower bound C_n (delta k / V)^{2/n}.
inline BoundResult theorem1_bound(const BoundInputs& in) {
  in.validate();
  return {weyl_constant(in.n) * std::pow(in.delta * static_cast<double>(in.k) / in.volume, 2.0 / in.n),
          BoundKind::Theorem1};
}

/// Convex planar domains: lambda_k > 2 sqrt(3) pi k / V. Strict in theory;
/// numerical checks compare with >= and a discretization tolerance.
inline BoundResult convex_planar_bound(double area, long long k) {
  if (!(area > 0.0)) throw InvalidInput("convex_planar_bound: area must be positive");
  if (k < 1) throw InvalidInput("convex_planar_bound: k must be >= 1");
  return {2.0 * std::numbers::sqrt3 * std::numbers::pi * static_cast<double>(k) / area, BoundKind::Corollary3};
}

/// Upper bound on the counting function, N(x) <= (V / delta) L_n x^{n/2}.
/// Exact inverse of theorem1_bound in k.
inline double counting_upper_bound(int n, double volume, double delta, double x) {
  BoundInputs{n, volume, delta, 1}.validate();
  if (!(x >= 0.0)) throw InvalidInput("counting_upper_bound: x must be non-negative");
  return volume / delta * counting_constant(n) * std::pow(x, 0.5 * n);
}

/// True iff delta^{2/n} > n/(n+2), i.e. the packing bound beats Li-Yau.
inline bool dominates_li_yau(int n, double delta) {
  BoundInputs{n, 1.0, delta, 1}.validate();
  return std::pow(delta, 2.0 / n) > static_cast<double>(n) / (n + 2);
}

enum class FloorKind { MinkowskiHlawka, Schmidt };

/// Reference packing-density floors in dimension n: zeta(n)/2^{n-1} for
/// centrally symmetric convex bodies, c n^{3/2}/4^n for convex bodies (the
/// constant c is not known explicitly and must be supplied).
inline double general_dimension_floors(int n, FloorKind kind, std::optional<double> c = std::nullopt) {
  if (n < 2) throw InvalidInput("general_dimension_floors: n must be >= 2");
  switch (kind) {
    case FloorKind::MinkowskiHlawka:
      return std::riemann_zeta(static_cast<double>(n)) / std::ldexp(1.0, n - 1);
    case FloorKind::Schmidt:
      if (!c || !(*c > 0.0)) throw InvalidInput("general_dimension_floors: schmidt floor needs c > 0");
      return *c * std::pow(static_cast<double>(n), 1.5) / std::pow(4.0, n);
  }
  throw InvalidInput("general_dimension_floors: unknown kind");
}

/// One row of a bound table; the computed eigenvalue is optional.
struct BoundRow {
  long long k = 1;
  double polya = 0.0;
  double li_yau = 0.0;
  double theorem1 = 0.0;
  std::optional<double> corollary3;
  std::optional<double> computed_lambda;
};

inline BoundRow bound_row(int n, double volume, double delta, long long k) {
  const BoundInputs in{n, volume, delta, k};
  BoundRow row;
  row.k = k;
  row.polya = polya_bound(in).value;
  row.li_yau = li_yau_bound(in).value;
  row.theorem1 = theorem1_bound(in).value;
  if (n == 2) {
    row.corollary3 = convex_planar_bound(volume, k).value;
  }
  return row;
}

/// CSV `k,polya,li_yau,theorem1,corollary3,computed_lambda`; absent values are empty.
inline void write_bound_table_csv(std::ostream& os, std::span<const BoundRow> rows) {
  os << "k,polya,li_yau,theorem1,corollary3,computed_lambda\n";
  char buf[64];
  auto put = [&](const std::optional<double>& v) {
    if (v) {
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      os << buf;
    }
  };
  for (const BoundRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,", r.k);
    os << buf;
    put(r.polya);
    os << ',';
    put(r.li_yau);
    os << ',';
    put(r.theorem1);
    os << ',';
    put(r.corollary3);
    os << ',';
    put(r.computed_lambda);
    os << '\n';
  }
}

}  // namespace packbound

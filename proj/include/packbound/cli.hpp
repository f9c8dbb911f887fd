#pragma once

// Experiment commands behind the `packbound` executable. Each command reads an
// ExperimentConfig, writes flat files into the output directory and returns
// a process exit code.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "packbound/bounds.hpp"
#include "packbound/errors.hpp"
#include "packbound/geometry.hpp"
#include "packbound/io.hpp"
#include "packbound/packing.hpp"
#include "packbound/spectral.hpp"

namespace packbound::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalFailure = 3,
  kVerificationFailure = 4,
};

struct ExperimentConfig {
  std::string domain = "builtin:square";
  int k_max = 10;
  std::vector<double> h_list{1.0 / 64.0, 1.0 / 128.0};
  std::string delta = "optimize";
  std::vector<double> sigmas;  // empty: 10, 20, 40 body diameters
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  double tol_fd = 0.02;
  double tol_eig = 1e-8;
  int restarts = 32;
  int iters = 400;
  // bounds-only inputs
  int n = 2;
  double volume = 1.0;
};

struct Domain {
  std::string label;
  DomainSpec spec;
  std::optional<ConvexPolygon> polygon;  // set for polygonal domains
};

inline ConvexPolygon rectangle_polygon(double w, double h) {
  return ConvexPolygon({{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}});
}

/// `builtin:square`, `builtin:disc`, `builtin:triangle`, `builtin:regular:<m>`,
/// `builtin:random:<m>:<seed>`, or a path to a polygon JSON file.
inline Domain parse_domain(const std::string& text) {
  const std::string prefix = "builtin:";
  if (!text.starts_with(prefix)) {
    NamedPolygon p = read_polygon_file(text);
    return {p.name.empty() ? text : p.name, DomainSpec::polygon(p.polygon), p.polygon};
  }
  const std::string rest = text.substr(prefix.size());
  auto number = [&](const std::string& s) -> long long {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw InvalidInput("");
      return v;
    } catch (const std::exception&) {
      throw InvalidInput("domain '" + text + "': expected an integer, got '" + s + "'");
    }
  };
  if (rest == "square") {
    return {"unit square", DomainSpec::unit_square(), rectangle_polygon(1.0, 1.0)};
  }
  if (rest == "disc") {
    return {"unit disc", DomainSpec::unit_disc(), std::nullopt};
  }
  if (rest == "triangle") {
    ConvexPolygon t({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
    return {"right triangle", DomainSpec::polygon(t), t};
  }
  if (rest.starts_with("regular:")) {
    const long long m = number(rest.substr(8));
    if (m < 3 || m > 4096) throw InvalidInput("domain '" + text + "': need 3 <= m <= 4096");
    ConvexPolygon p = regular_polygon(static_cast<int>(m), 1.0);
    return {"regular " + std::to_string(m) + "-gon", DomainSpec::polygon(p), p};
  }
  if (rest.starts_with("random:")) {
    const std::string args = rest.substr(7);
    const auto colon = args.find(':');
    if (colon == std::string::npos) throw InvalidInput("domain '" + text + "': use builtin:random:<m>:<seed>");
    const long long m = number(args.substr(0, colon));
    const long long seed = number(args.substr(colon + 1));
    if (m < 3 || m > 64 || seed < 0) throw InvalidInput("domain '" + text + "': need 3 <= m <= 64, seed >= 0");
    ConvexPolygon p = random_convex_polygon(static_cast<int>(m), static_cast<std::uint64_t>(seed));
    return {"random " + std::to_string(m) + "-gon (seed " + std::to_string(seed) + ")", DomainSpec::polygon(p), p};
  }
  throw InvalidInput("unknown builtin domain '" + text + "'");
}

/// Comma-separated numbers; entries may be written as fractions `a/b`.
inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto slash = item.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw InvalidInput("");
      } else {
        const std::string a = item.substr(0, slash);
        const std::string b = item.substr(slash + 1);
        std::size_t ua = 0;
        std::size_t ub = 0;
        const double num = std::stod(a, &ua);
        const double den = std::stod(b, &ub);
        if (ua != a.size() || ub != b.size() || den == 0.0) throw InvalidInput("");
        out.push_back(num / den);
      }
    } catch (const std::exception&) {
      throw InvalidInput("cannot parse number list '" + text + "'");
    }
  }
  if (out.empty()) throw InvalidInput("empty number list");
  return out;
}

struct DeltaValue {
  double value = 0.0;
  std::string provenance;
  std::optional<OptimizeResult> packing;
};

/// `catalog:<id>`, `optimize`, or an explicit number in (0, 1].
inline DeltaValue resolve_delta(const ExperimentConfig& cfg, const Domain* domain) {
  const std::string& d = cfg.delta;
  if (d.starts_with("catalog:")) {
    const KnownConstant c = known_constant(d.substr(8));
    return {c.value, "catalog " + c.id + " = " + c.expression + " (" + std::string(to_string(c.kind)) + ")",
            std::nullopt};
  }
  if (d == "optimize") {
    if (domain == nullptr || !domain->polygon) {
      throw InvalidInput("--delta optimize needs a polygonal domain");
    }
    OptimizeOptions opts;
    opts.restarts = cfg.restarts;
    opts.iters = cfg.iters;
    opts.seed = cfg.seed;
    OptimizeResult r = optimize_double_lattice(*domain->polygon, opts);
    const double v = std::min(1.0, r.density);
    return {v, "double-lattice optimizer (seed " + std::to_string(cfg.seed) + ")", std::move(r)};
  }
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(d, &used);
    if (used != d.size()) throw InvalidInput("");
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse --delta '" + d + "'");
  }
  if (!(v > 0.0 && v <= 1.0)) {
    throw InvalidInput("--delta must lie in (0, 1]");
  }
  return {v, "explicit", std::nullopt};
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

inline std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  std::ofstream os(output_path(cfg, name), std::ios::binary);
  if (!os) throw InvalidInput("cannot write to output directory '" + cfg.out_dir + "'");
  return os;
}

inline void validate_common(const ExperimentConfig& cfg) {
  if (cfg.k_max < 1) throw InvalidInput("--k must be >= 1");
  if (cfg.h_list.empty()) throw InvalidInput("--h needs at least one spacing");
  for (std::size_t i = 0; i < cfg.h_list.size(); ++i) {
    if (!(cfg.h_list[i] > 0.0) || (i > 0 && !(cfg.h_list[i] < cfg.h_list[i - 1]))) {
      throw InvalidInput("--h must be positive and strictly decreasing");
    }
  }
  if (!(cfg.tol_fd >= 0.0 && cfg.tol_fd < 1.0)) throw InvalidInput("--tol-fd must lie in [0, 1)");
}

inline Spectrum domain_spectrum(const ExperimentConfig& cfg, const Domain& dom) {
  EigenOptions eo;
  eo.tol = cfg.tol_eig;
  eo.seed = cfg.seed;
  if (cfg.h_list.size() == 1) {
    return grid_spectrum(dom.spec, cfg.h_list.front(), cfg.k_max, eo);
  }
  return refine_extrapolate(dom.spec, cfg.k_max, cfg.h_list, eo);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ResolutionTooCoarse& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConvergenceFailure& e) {
    err << "numerical failure: " << e.what();
    for (double r : e.residuals()) err << ' ' << r;
    err << '\n';
    return kNumericalFailure;
  } catch (const OutOfRange& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace detail

/// Extrapolated spectrum of the domain -> spectrum.csv.
inline int cmd_spectrum(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  return detail::guarded(err, [&] {
    detail::validate_common(cfg);
    const Domain dom = parse_domain(cfg.domain);
    const Spectrum s = detail::domain_spectrum(cfg, dom);
    auto os = detail::open_output(cfg, "spectrum.csv");
    write_spectrum_csv(os, s);
    log << dom.label << ": lambda_1 = " << detail::fmt(s.eigenvalues.front()) << ", lambda_" << cfg.k_max << " = "
        << detail::fmt(s.eigenvalues.back()) << '\n';
    return int{kOk};
  });
}

/// Optimized double-lattice packing -> packing.txt, packing.svg, windows.csv.
inline int cmd_packing(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Domain dom = parse_domain(cfg.domain);
    if (!dom.polygon) throw InvalidInput("packing needs a polygonal domain");
    if (cfg.restarts < 1 || cfg.iters < 0) throw InvalidInput("--restarts must be >= 1 and --iters >= 0");
    OptimizeOptions opts;
    opts.restarts = cfg.restarts;
    opts.iters = cfg.iters;
    opts.seed = cfg.seed;
    const OptimizeResult r = optimize_double_lattice(*dom.polygon, opts);
    const DoubleLatticeConfig& pc = r.config;

    std::vector<double> sigmas = cfg.sigmas;
    if (sigmas.empty()) {
      const double d = pc.body.diameter();
      sigmas = {10.0 * d, 20.0 * d, 40.0 * d};
    }
    for (double s : sigmas) {
      if (!(s > pc.body.diameter())) throw InvalidInput("--sigma values must exceed the body diameter");
    }
    const LemmaReport rep = lemma_limit_check(pc, sigmas);
    const bool valid = is_valid_packing(pc);

    {
      auto os = detail::open_output(cfg, "windows.csv");
      write_window_csv(os, rep);
    }
    {
      auto os = detail::open_output(cfg, "packing.svg");
      write_packing_svg(os, pc, sigmas.back());
    }
    {
      auto os = detail::open_output(cfg, "packing.txt");
      os << "domain: " << dom.label << '\n'
         << "density: " << detail::fmt(r.density) << '\n'
         << "valid: " << (valid ? "true" : "false") << '\n'
         << "mode: double\n"
         << "lattice_u: " << detail::fmt(pc.lattice.u().x) << ' ' << detail::fmt(pc.lattice.u().y) << '\n'
         << "lattice_v: " << detail::fmt(pc.lattice.v().x) << ' ' << detail::fmt(pc.lattice.v().y) << '\n'
         << "reflection_center: " << detail::fmt(pc.reflection_center.x) << ' '
         << detail::fmt(pc.reflection_center.y) << '\n'
         << "seed: " << cfg.seed << '\n'
         << "lemma_check: " << (rep.passed() ? "pass" : "fail") << '\n';
    }
    log << dom.label << ": double-lattice density " << detail::fmt(r.density) << (valid ? "" : " (INVALID)") << '\n';
    for (const LemmaRow& row : rep.rows) {
      log << "  sigma " << row.sigma << ": N = " << row.count << ", |d_emp - d| = " << row.error
          << " (envelope " << row.envelope << ")\n";
    }
    if (!valid) {
      err << "optimizer returned an overlapping configuration\n";
      return int{kNumericalFailure};
    }
    if (!rep.passed()) {
      err << "window-density check failed at sigma:";
      for (double s : rep.offending) err << ' ' << s;
      err << '\n';
      return int{kVerificationFailure};
    }
    return int{kOk};
  });
}

/// Bound table for k = 1..k_max -> bounds.csv.
inline int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (cfg.k_max < 1) throw InvalidInput("--k must be >= 1");
    const DeltaValue delta = resolve_delta(cfg, nullptr);
    BoundInputs{cfg.n, cfg.volume, delta.value, 1}.validate();
    std::vector<BoundRow> rows;
    for (int k = 1; k <= cfg.k_max; ++k) rows.push_back(bound_row(cfg.n, cfg.volume, delta.value, k));
    auto os = detail::open_output(cfg, "bounds.csv");
    write_bound_table_csv(os, rows);
    log << "n = " << cfg.n << ", V = " << cfg.volume << ", delta = " << detail::fmt(delta.value) << " ("
        << delta.provenance << "), dominates Li-Yau: " << (dominates_li_yau(cfg.n, delta.value) ? "yes" : "no")
        << '\n';
    return int{kOk};
  });
}

struct VerificationRow {
  int k = 0;
  double lambda = 0.0;
  double polya = 0.0;
  double li_yau = 0.0;
  double theorem1 = 0.0;
  double corollary3 = 0.0;
  bool theorem1_pass = false;
  bool li_yau_pass = false;
  bool corollary3_pass = false;
};

struct VerificationReport {
  std::string domain;
  double volume = 0.0;
  double delta = 0.0;
  std::string delta_provenance;
  double tol_fd = 0.0;
  double tol_eig = 0.0;
  std::vector<VerificationRow> rows;
  double runtime_seconds = 0.0;

  bool all_pass() const {
    for (const auto& r : rows) {
      if (!r.theorem1_pass) return false;
    }
    return true;
  }
};

/// Pass means lambda_k >= bound * (1 - tol_fd).
inline VerificationReport build_verification(const ExperimentConfig& cfg, const Domain& dom, const DeltaValue& delta,
                                             const Spectrum& s) {
  VerificationReport rep;
  rep.domain = dom.label;
  rep.volume = dom.spec.area();
  rep.delta = delta.value;
  rep.delta_provenance = delta.provenance;
  rep.tol_fd = cfg.tol_fd;
  rep.tol_eig = cfg.tol_eig;
  const double slack = 1.0 - cfg.tol_fd;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const BoundRow b = bound_row(2, rep.volume, rep.delta, k);
    VerificationRow row;
    row.k = k;
    row.lambda = s.eigenvalues[static_cast<std::size_t>(k - 1)];
    row.polya = b.polya;
    row.li_yau = b.li_yau;
    row.theorem1 = b.theorem1;
    row.corollary3 = *b.corollary3;
    row.theorem1_pass = row.lambda >= row.theorem1 * slack;
    row.li_yau_pass = row.lambda >= row.li_yau * slack;
    row.corollary3_pass = row.lambda >= row.corollary3 * slack;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Checks lambda_k against the packing bound for k = 1..k_max ->
/// bounds.csv, verify.csv, verify.txt.
inline int cmd_verify(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    detail::validate_common(cfg);
    const Domain dom = parse_domain(cfg.domain);
    const DeltaValue delta = resolve_delta(cfg, &dom);
    const Spectrum s = detail::domain_spectrum(cfg, dom);
    VerificationReport rep = build_verification(cfg, dom, delta, s);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
      std::vector<BoundRow> rows;
      for (const auto& r : rep.rows) {
        BoundRow b = bound_row(2, rep.volume, rep.delta, r.k);
        b.computed_lambda = r.lambda;
        rows.push_back(b);
      }
      auto os = detail::open_output(cfg, "bounds.csv");
      write_bound_table_csv(os, rows);
    }
    {
      auto os = detail::open_output(cfg, "verify.csv");
      os << "k,computed_lambda,theorem1,li_yau,polya,corollary3,theorem1_pass,li_yau_pass,corollary3_pass\n";
      for (const auto& r : rep.rows) {
        os << r.k << ',' << detail::fmt(r.lambda) << ',' << detail::fmt(r.theorem1) << ',' << detail::fmt(r.li_yau)
           << ',' << detail::fmt(r.polya) << ',' << detail::fmt(r.corollary3) << ',' << int(r.theorem1_pass) << ','
           << int(r.li_yau_pass) << ',' << int(r.corollary3_pass) << '\n';
      }
    }
    {
      auto os = detail::open_output(cfg, "verify.txt");
      os << "domain: " << rep.domain << '\n'
         << "volume: " << detail::fmt(rep.volume) << '\n'
         << "delta: " << detail::fmt(rep.delta) << '\n'
         << "delta_source: " << rep.delta_provenance << '\n'
         << "tol_fd: " << rep.tol_fd << '\n'
         << "tol_eig: " << rep.tol_eig << '\n'
         << "result: " << (rep.all_pass() ? "pass" : "fail") << '\n'
         << "runtime_seconds: " << rep.runtime_seconds << '\n';
    }

    log << rep.domain << ": delta = " << detail::fmt(rep.delta) << " [" << rep.delta_provenance << "]\n";
    for (const auto& r : rep.rows) {
      char line[160];
      std::snprintf(line, sizeof line, "  k=%3d  lambda=%12.6f  theorem1=%12.6f  li_yau=%12.6f  %s\n", r.k, r.lambda,
                    r.theorem1, r.li_yau, r.theorem1_pass ? "ok" : "VIOLATED");
      log << line;
    }
    if (!rep.all_pass()) {
      err << "verification failed at k:";
      for (const auto& r : rep.rows) {
        if (!r.theorem1_pass) err << ' ' << r.k;
      }
      err << '\n';
      return int{kVerificationFailure};
    }
    return int{kOk};
  });
}

/// Concatenates the outputs of earlier commands in the output directory into report.md.
inline int cmd_report(const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  return detail::guarded(err, [&] {
    const std::vector<std::string> parts = {"spectrum.csv", "packing.txt", "windows.csv",
                                            "bounds.csv",   "verify.txt",  "verify.csv"};
    std::ostringstream body;
    int found = 0;
    for (const std::string& name : parts) {
      const auto path = std::filesystem::path(cfg.out_dir) / name;
      std::ifstream in(path, std::ios::binary);
      if (!in) continue;
      ++found;
      body << "## " << name << "\n\n```\n" << in.rdbuf() << "```\n\n";
    }
    if (found == 0) throw InvalidInput("no command outputs found in '" + cfg.out_dir + "'");
    auto os = detail::open_output(cfg, "report.md");
    os << "# packbound report\n\n" << body.str();
    log << "report.md: " << found << " sections\n";
    return int{kOk};
  });
}

}  // namespace packbound::cli

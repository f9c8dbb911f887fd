#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "packbound/cli.hpp"

namespace {

using packbound::cli::ExperimentConfig;

struct RawFlags {
  std::string h;
  std::string sigma;
};

void add_common(CLI::App* sub, ExperimentConfig& cfg, RawFlags& raw) {
  sub->add_option("--domain", cfg.domain,
                  "polygon JSON file or builtin:square|disc|triangle|regular:<m>|random:<m>:<seed>");
  sub->add_option("--k", cfg.k_max, "number of eigenvalues / bound rows");
  sub->add_option("--h", raw.h, "decreasing grid spacings, e.g. 1/64,1/128");
  sub->add_option("--delta", cfg.delta, "catalog:<id> | optimize | <float>");
  sub->add_option("--sigma", raw.sigma, "window sizes for the density check");
  sub->add_option("--seed", cfg.seed, "seed for starting vectors and the optimizer");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--tol-fd", cfg.tol_fd, "relative slack for discretization error");
  sub->add_option("--tol-eig", cfg.tol_eig, "relative eigen-residual tolerance");
  sub->add_option("--restarts", cfg.restarts, "optimizer restarts");
  sub->add_option("--iters", cfg.iters, "Nelder-Mead iterations per restart");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"packbound: packing-based lower bounds on Dirichlet eigenvalues"};
  app.require_subcommand(1);
  // -h is taken by the grid-spacing flag.
  app.set_help_flag("--help", "print help and exit");

  ExperimentConfig cfg;
  RawFlags raw;
  auto* spectrum = app.add_subcommand("spectrum", "extrapolated finite-difference spectrum of a domain");
  auto* packing = app.add_subcommand("packing", "optimize a double-lattice packing and check window densities");
  auto* bounds = app.add_subcommand("bounds", "tabulate closed-form eigenvalue bounds");
  auto* verify = app.add_subcommand("verify", "check computed eigenvalues against the packing bound");
  auto* report = app.add_subcommand("report", "summarize earlier outputs in one file");
  for (auto* sub : {spectrum, packing, bounds, verify, report}) {
    add_common(sub, cfg, raw);
  }
  bounds->add_option("--n", cfg.n, "dimension");
  bounds->add_option("--volume", cfg.volume, "domain volume");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : packbound::cli::kConfigError;
  }

  try {
    if (!raw.h.empty()) cfg.h_list = packbound::cli::parse_list(raw.h);
    if (!raw.sigma.empty()) cfg.sigmas = packbound::cli::parse_list(raw.sigma);
  } catch (const packbound::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return packbound::cli::kConfigError;
  }

  using namespace packbound::cli;
  if (spectrum->parsed()) return cmd_spectrum(cfg, std::cout, std::cerr);
  if (packing->parsed()) return cmd_packing(cfg, std::cout, std::cerr);
  if (bounds->parsed()) return cmd_bounds(cfg, std::cout, std::cerr);
  if (verify->parsed()) return cmd_verify(cfg, std::cout, std::cerr);
  return cmd_report(cfg, std::cout, std::cerr);
}

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qsteady/config.hpp"
#include "qsteady/errors.hpp"
#include "qsteady/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<int> max_iter;
  std::optional<double> tol;
};

void apply_overrides(const Flags& f, qsteady::ExperimentConfig& cfg) {
  if (f.seed) cfg.seeds = {*f.seed};
  if (f.out) cfg.output_dir = *f.out;
  if (f.workers) {
    if (*f.workers < 1) throw qsteady::ConfigError("--workers must be >= 1");
    cfg.workers = *f.workers;
  }
  if (f.max_iter) {
    if (*f.max_iter < 1) throw qsteady::ConfigError("--max-iter must be >= 1");
    cfg.max_iter = *f.max_iter;
  }
  if (f.tol) {
    if (!(*f.tol > 0.0)) throw qsteady::ConfigError("--tol must be positive");
    cfg.tol = *f.tol;
  }
}

int exit_code(const qsteady::Error& e) {
  switch (e.kind()) {
    case qsteady::ErrorKind::config:
    case qsteady::ErrorKind::unsupported: return qsteady::kExitConfig;
    case qsteady::ErrorKind::contract: return qsteady::kExitContract;
    case qsteady::ErrorKind::degeneracy: return qsteady::kExitDegeneracy;
  }
  return qsteady::kExitContract;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states, Gibbs Hamiltonians and perturbative expansions of 2-local stochastic channels"};
  app.require_subcommand(1);

  Flags flags;
  std::optional<qsteady::ExperimentKind> chosen;
  for (const auto& name : qsteady::experiment_kind_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", flags.config, "YAML or JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Run a single master seed instead of the configured list");
    sub->add_option("--out", flags.out, "Output directory for CSV tables");
    sub->add_option("--workers", flags.workers, "Worker threads for the (seed, epsilon) grid");
    sub->add_option("--max-iter", flags.max_iter, "Power-iteration cap");
    sub->add_option("--tol", flags.tol, "Convergence tolerance on ||rho - E(rho)||_1");
    sub->callback([&chosen, name] { chosen = qsteady::parse_experiment_kind(name); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return qsteady::kExitConfig;
  }

  try {
    auto cfg = qsteady::load_config(flags.config, chosen);
    apply_overrides(flags, cfg);
    const auto summary = qsteady::run_experiment(cfg);
    for (const auto& m : summary.messages) std::cerr << m << '\n';
    for (const auto& f : summary.files) std::cout << f << '\n';
    return summary.status;
  } catch (const qsteady::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qsteady::kExitContract;
  }
}

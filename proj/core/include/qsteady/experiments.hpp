#pragma once

#include <string>
#include <vector>

#include "qsteady/config.hpp"

namespace qsteady {

/// Exit statuses shared by the library and the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitContract = 3,
  kExitDegeneracy = 4,
};

struct RunSummary {
  int status = kExitOk;
  std::vector<std::string> files;
  /// Per-run diagnostics in (seed, epsilon) order.
  std::vector<std::string> messages;
};

/// Runs the configured experiment over its (seed, epsilon) grid on
/// cfg.workers threads and writes the CSV tables into cfg.output_dir. Rows
/// are merged in grid order, so the output does not depend on the worker
/// count. Contract violations and degeneracies inside a run are recorded in
/// its row status and raise the returned exit status; configuration and
/// unsupported-size errors propagate as exceptions.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Single-qubit Pauli observable, e.g. "Z0".
std::string observable_name(const ObservableSpec& o);

}  // namespace qsteady

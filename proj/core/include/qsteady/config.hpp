#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsteady/channel.hpp"
#include "qsteady/lattice.hpp"

namespace qsteady {

enum class ExperimentKind {
  steady_state,
  gibbs_decay,
  oracle_check,
  perturb_sweep,
  covariance_decay,
  connected_probe,
  validate_model,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);
const std::vector<std::string>& experiment_kind_names();

struct GraphSpec {
  enum class Type { ring, chain, edges };
  Type type = Type::ring;
  int n = 0;
  std::vector<WeightedEdge> edges;  // Type::edges only
};

struct DissipatorSpec {
  enum class Type {
    random,       // uniform direction, Bloch length in [min_bloch, max_bloch]
    bloch,        // explicit Bloch vectors, one per site or one for all
    eigenvalues,  // diag(w0, w1) on every site
    plus,         // 0.9|+><+| + 0.1|-><-| on every site
  };
  Type type = Type::random;
  std::vector<std::array<double, 3>> bloch;
  std::array<double, 2> eigenvalues{0.9, 0.1};
  double min_bloch = 0.2;
  double max_bloch = 0.8;
};

struct ModelSpec {
  GraphSpec graph;
  DissipatorSpec dissipators;
  CorrelatorSpec correlator;
  std::string id;  // label carried into every CSV row
};

struct ObservableSpec {
  int site = 0;
  int pauli = 3;  // 1 = X, 2 = Y, 3 = Z
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::steady_state;
  ModelSpec model;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds{0};

  double tol = 1e-8;
  int max_iter = 200000;
  double log_floor = 1e-14;
  double prune = 1e-15;
  int workers = 1;
  std::string output_dir = "out";

  int k_cap = -1;  // diameter cap, -1 = n - 3
  int k_max = 8;   // perturbation order
  std::size_t max_terms = std::size_t{1} << 22;
  std::vector<ObservableSpec> observables{ObservableSpec{}};
  std::vector<int> distances{1, 2, 3, 4};
  std::vector<std::array<Edge, 2>> edge_pairs;
  double h_step = 1e-3;
  /// Also run the dense oracle when n is small enough (perturb_sweep).
  bool oracle = true;
};

/// Reads YAML (or JSON, by extension .json) and validates it. Schema
/// violations are collected and reported together in one ConfigError.
/// `kind`, when given, fills a missing `kind` key and must agree with a
/// present one.
ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind = std::nullopt);
/// Same, from text. `json` selects the JSON reader.
ExperimentConfig parse_config(const std::string& text, bool json,
                              std::optional<ExperimentKind> kind = std::nullopt);

/// Canonical JSON of every field that affects results (not workers or the
/// output directory).
std::string canonical_json(const ExperimentConfig& cfg);
/// FNV-1a 64 of canonical_json, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

InteractionGraph build_graph(const GraphSpec& spec);
/// Model for one seed. Randomness depends only on the seed, so a sweep over
/// epsilon sees the same model at every point.
ChannelModel build_model(const ModelSpec& spec, std::uint64_t seed, double epsilon);
std::string default_model_id(const ModelSpec& spec);

/// 0.1, 0.2, ..., 1.0
std::vector<double> default_epsilon_grid();

}  // namespace qsteady

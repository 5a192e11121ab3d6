#include "qsteady/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>

#include "qsteady/csv.hpp"
#include "qsteady/errors.hpp"
#include "qsteady/gibbs.hpp"
#include "qsteady/perturb.hpp"
#include "qsteady/steady.hpp"

namespace qsteady {

namespace {

using Row = std::vector<CsvCell>;

struct TableSpec {
  std::string file;
  std::string schema;
  std::vector<std::string> columns;
};

struct JobOutput {
  std::vector<std::vector<Row>> tables;
  std::vector<std::string> messages;
  int status = kExitOk;
  std::exception_ptr fatal;
};

// Runs fn(0..count-1) on up to `workers` threads. Each job writes only its
// own slot, so results never depend on scheduling.
void run_pool(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t nthreads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

// Maps the in-flight exception onto a row status. Anything other than a
// contract violation or a degeneracy is rethrown.
std::string classify_failure(JobOutput& out, const std::string& where) {
  try {
    throw;
  } catch (const DegeneracyError& e) {
    out.status = std::max(out.status, static_cast<int>(kExitDegeneracy));
    out.messages.push_back(where + ": degenerate: " + e.what());
    return "degenerate";
  } catch (const ContractError& e) {
    out.status = std::max(out.status, static_cast<int>(kExitContract));
    out.messages.push_back(where + ": contract violation: " + e.what());
    return "contract_violation";
  }
}

std::string run_label(std::uint64_t seed, double epsilon) {
  return "seed " + std::to_string(seed) + " epsilon " + format_double(epsilon);
}

std::string edge_name(const Edge& e) { return std::to_string(e.a) + "-" + std::to_string(e.b); }

std::string support_name(const SupportSet& s) {
  std::string out;
  for (int v : s) out += (out.empty() ? "" : " ") + std::to_string(v);
  return out;
}

LocalOperator observable_operator(const ObservableSpec& o) {
  return LocalOperator{SupportSet{o.site}, Matrix(pauli(o.pauli))};
}

IterationOptions iteration_options(const ExperimentConfig& cfg) {
  IterationOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  return opts;
}

double min_eigenvalue(const Matrix& rho) { return hermitian_eigenvalues(rho).minCoeff(); }

std::int64_t as_int(bool b) { return b ? 1 : 0; }

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& cfg) : cfg_(cfg), hash_(config_hash(cfg)) {}
  virtual ~Experiment() = default;

  virtual std::vector<TableSpec> tables() const = 0;
  virtual std::size_t job_count() const = 0;
  virtual void run_job(std::size_t index, JobOutput& out) const = 0;

 protected:
  Row provenance(std::uint64_t seed, double epsilon) const {
    return {hash_, cfg_.model.id, static_cast<std::int64_t>(seed), epsilon};
  }
  static std::vector<std::string> with_provenance(std::vector<std::string> cols) {
    cols.insert(cols.begin(), {"config_hash", "model_id", "seed", "epsilon"});
    return cols;
  }
  static void append(Row& row, std::initializer_list<CsvCell> cells) { row.insert(row.end(), cells); }

  std::size_t seeds() const { return cfg_.seeds.size(); }
  std::size_t epsilons() const { return cfg_.epsilons.size(); }
  int num_qubits() const { return cfg_.model.graph.n; }

  const ExperimentConfig& cfg_;
  std::string hash_;
};

class SteadyStateExperiment : public Experiment {
 public:
  using Experiment::Experiment;

  std::vector<TableSpec> tables() const override {
    return {{"steady_state.csv", "steady_state",
             with_provenance({"n", "iterations", "converged", "final_residual", "min_eigenvalue", "purity",
                              "status"})},
            {"convergence.csv", "convergence", with_provenance({"iteration", "residual"})}};
  }
  std::size_t job_count() const override { return seeds() * epsilons(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / epsilons()];
    const double eps = cfg_.epsilons[index % epsilons()];
    Row row = provenance(seed, eps);
    try {
      const EpsilonChannel ch(build_model(cfg_.model, seed, eps));
      const auto fp = iterate_fixed_point(ch, zero_state(ch.num_qubits()), iteration_options(cfg_));
      const double purity = fp.rho.cwiseAbs2().sum();
      append(row, {std::int64_t{ch.num_qubits()}, std::int64_t{fp.record.iterations},
                   as_int(fp.record.converged), fp.record.final_residual, min_eigenvalue(fp.rho), purity,
                   std::string(fp.record.converged ? "ok" : "not_converged")});
      for (const auto& [it, res] : fp.record.residual_history) {
        Row r = provenance(seed, eps);
        append(r, {std::int64_t{it}, res});
        out.tables[1].push_back(std::move(r));
      }
    } catch (...) {
      const std::string status = classify_failure(out, run_label(seed, eps));
      const double nan = std::nan("");
      append(row, {std::int64_t{num_qubits()}, std::int64_t{0}, std::int64_t{0}, nan, nan, nan, status});
    }
    out.tables[0].push_back(std::move(row));
  }
};

class GibbsDecayExperiment : public Experiment {
 public:
  explicit GibbsDecayExperiment(const ExperimentConfig& cfg) : Experiment(cfg) {
    if (cfg.model.graph.type != GraphSpec::Type::ring) {
      throw ConfigError("gibbs_decay profiles ring diameters and needs a ring graph");
    }
    if (cfg.model.graph.n > kMaxPauliQubits) {
      throw UnsupportedError("gibbs_decay supports at most " + std::to_string(kMaxPauliQubits) + " qubits");
    }
  }

  std::vector<TableSpec> tables() const override {
    return {{"hhat.csv", "hhat", with_provenance({"k", "norm"})},
            {"decay_fit.csv", "decay_fit",
             with_provenance({"iterations", "converged", "final_residual", "normalizer", "slope", "intercept",
                              "r_squared", "points", "status"})}};
  }
  std::size_t job_count() const override { return seeds() * epsilons(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / epsilons()];
    const double eps = cfg_.epsilons[index % epsilons()];
    const double nan = std::nan("");
    Row row = provenance(seed, eps);
    try {
      const EpsilonChannel ch(build_model(cfg_.model, seed, eps));
      const auto fp = iterate_fixed_point(ch, zero_state(ch.num_qubits()), iteration_options(cfg_));
      const auto expansion = pauli_transform(gibbs_hamiltonian(fp.rho, cfg_.log_floor));
      const auto profile = h_hat_profile(expansion, ch.num_qubits(), cfg_.k_cap, eps);
      for (int k = 1; k <= profile.k_cap; ++k) {
        Row r = provenance(seed, eps);
        append(r, {std::int64_t{k}, profile.norm(k)});
        out.tables[0].push_back(std::move(r));
      }
      append(row, {std::int64_t{fp.record.iterations}, as_int(fp.record.converged), fp.record.final_residual,
                   profile.normalizer});
      const auto significant = std::count_if(profile.norms.begin(), profile.norms.end(),
                                             [](double v) { return v > 1e-10; });
      std::string status = fp.record.converged ? "ok" : "not_converged";
      if (significant >= 3) {
        const DecayFit fit = decay_fit(profile);
        append(row, {fit.slope, fit.intercept, fit.r_squared, std::int64_t{fit.points}});
      } else {
        append(row, {nan, nan, nan, static_cast<std::int64_t>(significant)});
        if (fp.record.converged) status = "no_fit";
      }
      row.push_back(status);
    } catch (...) {
      const std::string status = classify_failure(out, run_label(seed, eps));
      row.resize(4);
      append(row, {std::int64_t{0}, std::int64_t{0}, nan, nan, nan, nan, nan, std::int64_t{0}, status});
    }
    out.tables[1].push_back(std::move(row));
  }
};

class OracleCheckExperiment : public Experiment {
 public:
  explicit OracleCheckExperiment(const ExperimentConfig& cfg) : Experiment(cfg) {
    if (cfg.model.graph.n > 6) throw UnsupportedError("oracle_check needs n <= 6");
  }

  std::vector<TableSpec> tables() const override {
    return {{"oracle_check.csv", "oracle_check",
             with_provenance({"n", "iterations", "converged", "final_residual", "trace_distance",
                              "gibbs_roundtrip", "status"})}};
  }
  std::size_t job_count() const override { return seeds() * epsilons(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / epsilons()];
    const double eps = cfg_.epsilons[index % epsilons()];
    const double nan = std::nan("");
    Row row = provenance(seed, eps);
    try {
      const EpsilonChannel ch(build_model(cfg_.model, seed, eps));
      const auto fp = iterate_fixed_point(ch, zero_state(ch.num_qubits()), iteration_options(cfg_));
      const Matrix oracle = dense_fixed_point_oracle(ch);
      const double dist = trace_distance(fp.rho, oracle);
      const Matrix h = gibbs_hamiltonian(oracle, cfg_.log_floor);
      const double roundtrip = (hermitian_exp(-h) - oracle).norm();
      append(row, {std::int64_t{ch.num_qubits()}, std::int64_t{fp.record.iterations},
                   as_int(fp.record.converged), fp.record.final_residual, dist, roundtrip,
                   std::string(fp.record.converged ? "ok" : "not_converged")});
    } catch (...) {
      const std::string status = classify_failure(out, run_label(seed, eps));
      row.resize(4);
      append(row, {std::int64_t{num_qubits()}, std::int64_t{0}, std::int64_t{0}, nan, nan, nan, status});
    }
    out.tables[0].push_back(std::move(row));
  }
};

class PerturbSweepExperiment : public Experiment {
 public:
  using Experiment::Experiment;

  std::vector<TableSpec> tables() const override {
    return {{"series.csv", "series",
             with_provenance({"observable", "k", "order", "partial_sum", "q1_norm_Ak", "supp_size_Ak",
                              "terms_Ak"})},
            {"series_summary.csv", "series_summary",
             with_provenance({"observable", "value", "k_used", "tail_bound", "capped", "oracle_value",
                              "abs_error", "status"})}};
  }
  // One job per (seed, observable); the A_k sequence serves every epsilon.
  std::size_t job_count() const override { return seeds() * cfg_.observables.size(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / cfg_.observables.size()];
    const ObservableSpec& obs = cfg_.observables[index % cfg_.observables.size()];
    const std::string name = observable_name(obs);
    const LocalOperator a = observable_operator(obs);
    const double nan = std::nan("");

    AkSequence seq;
    try {
      const TransitionEngine engine(build_model(cfg_.model, seed, cfg_.epsilons.front()), cfg_.prune);
      seq = a_k_sequence(a, engine, cfg_.k_max, SequenceOptions{cfg_.max_terms});
    } catch (...) {
      const std::string status = classify_failure(out, "seed " + std::to_string(seed) + " " + name);
      for (double eps : cfg_.epsilons) {
        Row row = provenance(seed, eps);
        append(row, {name, nan, std::int64_t{-1}, nan, std::int64_t{0}, nan, nan, status});
        out.tables[1].push_back(std::move(row));
      }
      return;
    }
    if (seq.capped) {
      out.messages.push_back("seed " + std::to_string(seed) + " " + name + ": term cap reached at k = " +
                             std::to_string(seq.k_reached));
    }

    for (double eps : cfg_.epsilons) {
      Row row = provenance(seed, eps);
      try {
        const SeriesResult series = series_from_sequence(seq, a, eps);
        for (int k = 0; k <= series.k_used; ++k) {
          const auto& m = seq.meta[static_cast<std::size_t>(k)];
          Row r = provenance(seed, eps);
          append(r, {name, std::int64_t{k}, series.orders[static_cast<std::size_t>(k)],
                     series.partial_sums[static_cast<std::size_t>(k)], m.q1_norm, std::int64_t{m.support_size},
                     static_cast<std::int64_t>(m.terms)});
          out.tables[0].push_back(std::move(r));
        }
        double oracle = nan;
        if (cfg_.oracle && num_qubits() <= 6) {
          const EpsilonChannel ch(build_model(cfg_.model, seed, eps));
          const Matrix rho = dense_fixed_point_oracle(ch);
          oracle = (rho * tensor_embed(a, ch.num_qubits())).trace().real();
        }
        append(row, {name, series.value, std::int64_t{series.k_used}, series.tail_bound, as_int(seq.capped),
                     oracle, std::abs(series.value - oracle), std::string("ok")});
      } catch (...) {
        const std::string status = classify_failure(out, run_label(seed, eps) + " " + name);
        row.resize(4);
        append(row, {name, nan, std::int64_t{-1}, nan, as_int(seq.capped), nan, nan, status});
      }
      out.tables[1].push_back(std::move(row));
    }
  }
};

class CovarianceDecayExperiment : public Experiment {
 public:
  explicit CovarianceDecayExperiment(const ExperimentConfig& cfg) : Experiment(cfg) {
    const InteractionGraph g = build_graph(cfg.model.graph);
    const ObservableSpec& a = cfg.observables.front();
    for (int d : cfg.distances) {
      const SupportSet inner = graph_ball(g, SupportSet{a.site}, d - 1);
      const SupportSet outer = graph_ball(g, SupportSet{a.site}, d);
      int partner = -1;
      for (int v : outer) {
        if (!inner.contains(v)) {
          partner = v;
          break;
        }
      }
      if (partner < 0) {
        throw ConfigError("no vertex at distance " + std::to_string(d) + " from site " + std::to_string(a.site));
      }
      partners_.push_back(ObservableSpec{partner, a.pauli});
    }
  }

  std::vector<TableSpec> tables() const override {
    return {{"covariance.csv", "covariance",
             with_provenance({"a", "b", "distance", "k", "order", "partial_sum"})},
            {"covariance_summary.csv", "covariance_summary",
             with_provenance({"a", "b", "distance", "value", "first_nonzero_order", "bound", "tail_bound",
                              "within_bound", "status"})}};
  }
  // One job per (seed, distance); the three sequences serve every epsilon.
  std::size_t job_count() const override { return seeds() * partners_.size(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / partners_.size()];
    const std::size_t di = index % partners_.size();
    const ObservableSpec& oa = cfg_.observables.front();
    const ObservableSpec& ob = partners_[di];
    const std::string an = observable_name(oa), bn = observable_name(ob);
    const LocalOperator a = observable_operator(oa);
    const LocalOperator b = observable_operator(ob);
    const double nan = std::nan("");
    const auto distance = static_cast<std::int64_t>(cfg_.distances[di]);

    std::optional<TransitionEngine> engine;
    AkSequence sa, sb, sab;
    try {
      engine.emplace(build_model(cfg_.model, seed, cfg_.epsilons.front()), cfg_.prune);
      const SequenceOptions opts{cfg_.max_terms};
      sa = a_k_sequence(a, *engine, cfg_.k_max, opts);
      sb = a_k_sequence(b, *engine, cfg_.k_max, opts);
      sab = a_k_sequence(disjoint_product(a, b), *engine, cfg_.k_max, opts);
    } catch (...) {
      const std::string status = classify_failure(out, "seed " + std::to_string(seed) + " " + an + " " + bn);
      for (double eps : cfg_.epsilons) {
        Row row = provenance(seed, eps);
        append(row, {an, bn, distance, nan, std::int64_t{-1}, nan, nan, std::int64_t{0}, status});
        out.tables[1].push_back(std::move(row));
      }
      return;
    }

    for (double eps : cfg_.epsilons) {
      Row row = provenance(seed, eps);
      try {
        const CovarianceResult cov = covariance_from_sequences(sa, sb, sab, a, b, engine->graph(), eps);
        for (int k = 0; k <= cov.series.k_used; ++k) {
          Row r = provenance(seed, eps);
          append(r, {an, bn, distance, std::int64_t{k}, cov.series.orders[static_cast<std::size_t>(k)],
                     cov.series.partial_sums[static_cast<std::size_t>(k)]});
          out.tables[0].push_back(std::move(r));
        }
        const bool within = std::abs(cov.series.value) <= cov.bound;
        std::string status = "ok";
        if (!within) {
          status = "bound_violation";
          out.status = std::max(out.status, static_cast<int>(kExitContract));
          out.messages.push_back(run_label(seed, eps) + " " + an + " " + bn + ": |C| exceeds the decay bound");
        }
        append(row, {an, bn, distance, cov.series.value, std::int64_t{cov.first_nonzero_order}, cov.bound,
                     cov.series.tail_bound, as_int(within), status});
      } catch (...) {
        const std::string status = classify_failure(out, run_label(seed, eps) + " " + an + " " + bn);
        row.resize(4);
        append(row, {an, bn, distance, nan, std::int64_t{-1}, nan, nan, std::int64_t{0}, status});
      }
      out.tables[1].push_back(std::move(row));
    }
  }

 private:
  std::vector<ObservableSpec> partners_;
};

class ConnectedProbeExperiment : public Experiment {
 public:
  explicit ConnectedProbeExperiment(const ExperimentConfig& cfg) : Experiment(cfg) {
    if (cfg.model.graph.n > 6) throw UnsupportedError("connected_probe needs n <= 6");
    if (cfg.edge_pairs.empty()) throw ConfigError("connected_probe needs at least one entry in edge_pairs");
  }

  // The epsilon column carries the finite-difference step h.
  std::vector<TableSpec> tables() const override {
    return {{"connected_probe.csv", "connected_probe",
             with_provenance({"edge1", "edge2", "adjacent", "mixed_partial_norm", "max_coefficient", "support",
                              "status"})}};
  }
  std::size_t job_count() const override { return seeds() * cfg_.edge_pairs.size(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / cfg_.edge_pairs.size()];
    const auto& pair = cfg_.edge_pairs[index % cfg_.edge_pairs.size()];
    const Edge e1 = pair[0], e2 = pair[1];
    const bool adjacent = e1.a == e2.a || e1.a == e2.b || e1.b == e2.a || e1.b == e2.b;
    Row row = provenance(seed, cfg_.h_step);
    append(row, {edge_name(e1), edge_name(e2), as_int(adjacent)});
    try {
      const auto probe =
          connected_term_probe(build_model(cfg_.model, seed, 0.0), e1, e2, cfg_.h_step, cfg_.log_floor);
      append(row, {probe.mixed_partial_norm, probe.max_coefficient, support_name(probe.support_estimate),
                   std::string("ok")});
    } catch (...) {
      const std::string status =
          classify_failure(out, "seed " + std::to_string(seed) + " edges " + edge_name(e1) + "," + edge_name(e2));
      const double nan = std::nan("");
      append(row, {nan, nan, std::string(), status});
    }
    out.tables[0].push_back(std::move(row));
  }
};

class ValidateModelExperiment : public Experiment {
 public:
  using Experiment::Experiment;

  std::vector<TableSpec> tables() const override {
    return {{"validate_model.csv", "validate_model",
             with_provenance({"channel", "support", "trace_defect", "cp_min_eig", "span_k", "status"})}};
  }
  std::size_t job_count() const override { return seeds() * epsilons(); }

  void run_job(std::size_t index, JobOutput& out) const override {
    const std::uint64_t seed = cfg_.seeds[index / epsilons()];
    const double eps = cfg_.epsilons[index % epsilons()];
    const double nan = std::nan("");
    std::optional<ChannelModel> built;
    Row model_row = provenance(seed, eps);
    try {
      built.emplace(build_model(cfg_.model, seed, eps));
      built->validate();
      append(model_row, {std::string("model"), std::string(), nan, nan, std::int64_t{-1}, std::string("ok")});
    } catch (...) {
      const std::string status = classify_failure(out, run_label(seed, eps));
      append(model_row, {std::string("model"), std::string(), nan, nan, std::int64_t{-1}, status});
      out.tables[0].push_back(std::move(model_row));
      return;
    }
    out.tables[0].push_back(std::move(model_row));
    const ChannelModel& model = *built;

    auto check = [&](const std::string& name, const KrausChannel& ch) {
      Row row = provenance(seed, eps);
      const CptpReport rep = validate_cptp(ch);
      const ErgodicityReport erg = local_ergodicity_check(ch, 4);
      std::string status = "ok";
      if (!rep.ok()) {
        status = "not_cptp";
        out.status = std::max(out.status, static_cast<int>(kExitContract));
        out.messages.push_back(run_label(seed, eps) + ": " + name + " is not CPTP");
      }
      append(row, {name, support_name(ch.support), rep.trace_defect, rep.cp_min_eig, std::int64_t{erg.k_reached},
                   status});
      out.tables[0].push_back(std::move(row));
    };
    for (std::size_t i = 0; i < model.dissipators.size(); ++i) check("D" + std::to_string(i), model.dissipators[i]);
    for (std::size_t k = 0; k < model.correlators.size(); ++k) {
      check("F" + edge_name(model.graph.edge(k)), model.correlators[k]);
    }
  }
};

std::unique_ptr<Experiment> make_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::steady_state: return std::make_unique<SteadyStateExperiment>(cfg);
    case ExperimentKind::gibbs_decay: return std::make_unique<GibbsDecayExperiment>(cfg);
    case ExperimentKind::oracle_check: return std::make_unique<OracleCheckExperiment>(cfg);
    case ExperimentKind::perturb_sweep: return std::make_unique<PerturbSweepExperiment>(cfg);
    case ExperimentKind::covariance_decay: return std::make_unique<CovarianceDecayExperiment>(cfg);
    case ExperimentKind::connected_probe: return std::make_unique<ConnectedProbeExperiment>(cfg);
    case ExperimentKind::validate_model: return std::make_unique<ValidateModelExperiment>(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace

std::string observable_name(const ObservableSpec& o) {
  static const char letters[] = {'I', 'X', 'Y', 'Z'};
  return std::string(1, letters[o.pauli & 3]) + std::to_string(o.site);
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const auto experiment = make_experiment(cfg);
  const auto specs = experiment->tables();

  std::vector<JobOutput> outputs(experiment->job_count());
  for (auto& o : outputs) o.tables.resize(specs.size());
  run_pool(outputs.size(), cfg.workers, [&](std::size_t i) {
    try {
      experiment->run_job(i, outputs[i]);
    } catch (...) {
      outputs[i].fatal = std::current_exception();
    }
  });
  for (const auto& o : outputs) {
    if (o.fatal) std::rethrow_exception(o.fatal);
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());

  std::string seeds;
  for (auto s : cfg.seeds) seeds += (seeds.empty() ? "" : ";") + std::to_string(s);
  const std::string hash = config_hash(cfg);

  RunSummary summary;
  for (std::size_t t = 0; t < specs.size(); ++t) {
    const std::string path = (std::filesystem::path(cfg.output_dir) / specs[t].file).string();
    CsvWriter writer(path, specs[t].schema, hash, seeds, specs[t].columns);
    for (const auto& o : outputs) {
      for (const auto& row : o.tables[t]) writer.row(row);
    }
    summary.files.push_back(path);
  }
  for (const auto& o : outputs) {
    summary.status = std::max(summary.status, o.status);
    summary.messages.insert(summary.messages.end(), o.messages.begin(), o.messages.end());
  }
  return summary;
}

}  // namespace qsteady

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsteady/config.hpp"
#include "qsteady/errors.hpp"
#include "qsteady/experiments.hpp"
#include "qsteady/gibbs.hpp"
#include "qsteady/perturb.hpp"
#include "qsteady/steady.hpp"
#include "test_util.hpp"

using namespace qsteady;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}
std::string sci(double x) { return fmt("%.3g", x); }

ChannelModel random_model(InteractionGraph g, std::uint64_t seed, double eps) {
  return make_random_model(std::move(g), RandomModelOptions{}, seed, eps);
}

InteractionGraph small_graph(int n) { return n == 2 ? build_chain(2) : build_ring(n); }

/// Rows of a qsteady CSV keyed by column name; the provenance line is skipped.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("# qsteady schema=", 0) != 0) throw ContractError("missing provenance line in " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    return cells;
  };
  std::getline(in, line);
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

// 1. Zero-epsilon iteration lands on the product of reset states.
Outcome epsilon_zero_exactness(const fs::path&) {
  IterationOptions opts;
  opts.tol = 1e-11;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = random_model(build_ring(6), seed, 0.0);
    const EpsilonChannel ch(model);
    const auto fp = iterate_fixed_point(ch, zero_state(6), opts);
    worst = std::max(worst, trace_distance(fp.rho, product_reset_state(model)));
  }
  return {worst <= 1e-8, "10 models, n=6: max trace distance to product state " + sci(worst) + " (limit 1e-8)"};
}

// 2. CZ ring of ten qubits converges to residual 1e-8 at every epsilon.
Outcome cz_convergence(const fs::path& out) {
  auto cfg = parse_config(R"(
kind: steady_state
model:
  graph: {ring: 10}
  dissipators: {type: plus}
  correlator: {kind: cz}
epsilons: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
tol: 1.0e-8
)",
                          false);
  cfg.output_dir = (out / "cz_ring10").string();
  const auto summary = run_experiment(cfg);
  const auto rows = read_csv(out / "cz_ring10" / "steady_state.csv");
  bool pass = summary.status == kExitOk && rows.size() == 9;
  double worst = 0.0;
  int max_iter = 0;
  for (const auto& r : rows) {
    const double res = std::stod(r.at("final_residual"));
    worst = std::max(worst, res);
    max_iter = std::max(max_iter, std::stoi(r.at("iterations")));
    pass = pass && r.at("status") == "ok" && r.at("converged") == "1" && res <= 1e-8;
  }
  return {pass, std::to_string(rows.size()) + " epsilons: max final residual " + sci(worst) +
                    " (limit 1e-8), up to " + std::to_string(max_iter) + " iterations"};
}

// 3 and 4 share the steady states.
struct SmallSteadyStates {
  double worst_oracle = 0.0;
  double worst_gibbs = 0.0;
  int states = 0;
  int failures = 0;
};

const SmallSteadyStates& small_steady_states() {
  static const SmallSteadyStates result = [] {
    SmallSteadyStates r;
    IterationOptions opts;
    opts.tol = 1e-11;
    for (int n : {2, 3, 4}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (double eps : {0.1, 0.5, 0.9}) {
          const EpsilonChannel ch(random_model(small_graph(n), seed, eps));
          const auto fp = iterate_fixed_point(ch, zero_state(n), opts);
          if (!fp.record.converged) ++r.failures;
          const Matrix oracle = dense_fixed_point_oracle(ch);
          r.worst_oracle = std::max(r.worst_oracle, trace_distance(fp.rho, oracle));
          const Matrix h = gibbs_hamiltonian(fp.rho);
          r.worst_gibbs = std::max(r.worst_gibbs, (hermitian_exp(-h) - fp.rho).norm());
          ++r.states;
        }
      }
    }
    return r;
  }();
  return result;
}

Outcome oracle_equivalence(const fs::path&) {
  const auto& r = small_steady_states();
  return {r.failures == 0 && r.worst_oracle <= 1e-8,
          std::to_string(r.states) + " steady states (20 models per n in {2,3,4}, 3 epsilons): max trace distance " +
              sci(r.worst_oracle) + " (limit 1e-8), " + std::to_string(r.failures) + " unconverged"};
}

Outcome gibbs_round_trip(const fs::path&) {
  const auto& r = small_steady_states();
  return {r.worst_gibbs <= 1e-8, std::to_string(r.states) + " steady states: max ||exp(-H) - rho||_F " +
                                     sci(r.worst_gibbs) + " (limit 1e-8)"};
}

// 5. Locality profile of the Gibbs Hamiltonian decays with diameter.
Outcome locality_decay(const fs::path& out) {
  auto cfg = parse_config(R"(
kind: gibbs_decay
model:
  graph: {ring: 8}
  correlator: {kind: random_kraus, rank: 3}
epsilons: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
seeds: [1]
k_cap: 5
tol: 1.0e-12
)",
                          false);
  cfg.output_dir = (out / "gibbs_random_kraus3_ring8").string();
  run_experiment(cfg);
  const auto fits = read_csv(out / "gibbs_random_kraus3_ring8" / "decay_fit.csv");
  const auto hhat = read_csv(out / "gibbs_random_kraus3_ring8" / "hhat.csv");
  bool pass = fits.size() == 10;
  double min_r2 = 1.0;
  double max_slope = -INFINITY;
  for (const auto& f : fits) {
    if (std::stod(f.at("epsilon")) == 0.0) continue;
    const double slope = std::stod(f.at("slope"));
    const double r2 = std::stod(f.at("r_squared"));
    min_r2 = std::min(min_r2, r2);
    max_slope = std::max(max_slope, slope);
    pass = pass && f.at("status") == "ok" && f.at("converged") == "1" && slope < 0.0 && r2 >= 0.9;
  }
  double zero_tail = 0.0;
  int zero_rows = 0;
  for (const auto& h : hhat) {
    if (std::stod(h.at("epsilon")) != 0.0 || std::stoi(h.at("k")) < 2) continue;
    zero_tail = std::max(zero_tail, std::stod(h.at("norm")));
    ++zero_rows;
  }
  pass = pass && zero_rows == 4 && zero_tail <= 1e-10;
  return {pass, "n=8, 9 epsilons: max slope " + fmt("%.3f", max_slope) + " (< 0), min r^2 " + fmt("%.4f", min_r2) +
                    " (>= 0.9); epsilon=0 max H^_k for k>=2 " + sci(zero_tail) + " (limit 1e-10)"};
}

// 6. The CZ model at epsilon = 1 has more than one steady state.
Outcome epsilon_one_degeneracy(const fs::path&) {
  bool oracle_degenerate = false;
  try {
    dense_fixed_point_oracle(EpsilonChannel(make_cz_model(build_ring(3), 1.0)));
  } catch (const DegeneracyError&) {
    oracle_degenerate = true;
  }
  const auto probe = dual_init_probe(EpsilonChannel(make_cz_model(build_ring(10), 1.0)));
  const bool split = probe.trace_distance >= 0.1;
  return {oracle_degenerate || split, std::string("n=3 oracle ") +
                                          (oracle_degenerate ? "reports degeneracy" : "found a unique fixed point") +
                                          "; n=10 fixed points from |0><0| and 1/2^n are " +
                                          sci(probe.trace_distance) + " apart (witness needs >= 0.1)"};
}

// 7. Perturbative series against the dense oracle.
Outcome series_agreement(const fs::path&) {
  bool pass = true;
  double worst = 0.0;
  double worst_ratio = 0.0;
  const LocalOperator a{SupportSet{0}, Matrix(pauli(3))};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TransitionEngine engine(random_model(build_ring(4), seed, 0.0));
    const auto seq = a_k_sequence(a, engine, 10);
    if (seq.k_reached != 10) pass = false;
    for (double eps : {0.001, 0.002}) {
      const auto s = series_from_sequence(seq, a, eps);
      const Matrix rho = dense_fixed_point_oracle(EpsilonChannel(random_model(build_ring(4), seed, eps)));
      const double err = std::abs(s.value - (rho * tensor_embed(a, 4)).trace().real());
      const double allowed = std::max(s.tail_bound, 1e-6);
      worst = std::max(worst, err);
      worst_ratio = std::max(worst_ratio, err / allowed);
      pass = pass && err <= allowed;
    }
  }
  return {pass, "10 models, n=4, epsilon in {0.001, 0.002}, k_max=10: max |series - oracle| " + sci(worst) +
                    ", max error / max(tail, 1e-6) " + sci(worst_ratio)};
}

/// Random sparse operator with 1..8 strings on a random set of 1..3 sites.
DualWauliOperator random_sparse(int n, Rng& rng) {
  const int ell = 1 + static_cast<int>(rng.next_u64() % 3);
  std::set<int> sites;
  while (static_cast<int>(sites.size()) < ell) sites.insert(static_cast<int>(rng.next_u64() % n));
  const int terms = 1 + static_cast<int>(rng.next_u64() % 8);
  std::vector<DualWauliOperator::Term> t;
  for (int j = 0; j < terms; ++j) {
    WauliKey key = 0;
    for (int s : sites) key = key_with(key, s, static_cast<int>(rng.next_u64() % 4));
    t.push_back({key, rng.complex_normal()});
  }
  return DualWauliOperator::from_terms(n, std::move(t));
}

/// A_k chains on ring(10) from one- and two-site operators, shared by 8 and 9.
struct ChainCheck {
  int sequences = 0;
  int operators = 0;
  int q1_violations = 0;
  int support_violations = 0;
  double max_ratio = 0.0;  // q1(A_k) / (130^k q1(A_0))
};

const ChainCheck& chain_check() {
  static const ChainCheck result = [] {
    ChainCheck c;
    Rng rng(2024);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const TransitionEngine engine(random_model(build_ring(10), seed, 0.0));
      std::vector<std::pair<LocalOperator, int>> starts = {
          {LocalOperator{SupportSet{0}, Matrix(pauli(3))}, 6},
          {LocalOperator{SupportSet{3}, Matrix(pauli(1))}, 6},
          {LocalOperator{SupportSet{4, 5}, testutil::random_hermitian(4, rng)}, 5},
      };
      for (const auto& [a, k_max] : starts) {
        const auto seq = a_k_sequence(a, engine, k_max);
        ++c.sequences;
        const double q0 = seq.meta[0].q1_norm;
        for (int k = 0; k <= seq.k_reached; ++k) {
          const auto& m = seq.meta[static_cast<std::size_t>(k)];
          ++c.operators;
          const double ratio = m.q1_norm / (std::pow(130.0, k) * q0);
          c.max_ratio = std::max(c.max_ratio, ratio);
          if (ratio > 1.0 + 1e-12) ++c.q1_violations;
          const SupportSet ball = graph_ball(engine.graph(), a.support, k);
          if (!SupportSet::from_mask(m.support_mask).is_subset_of(ball)) ++c.support_violations;
        }
      }
    }
    return c;
  }();
  return result;
}

// 8. Q1 growth of the transition map.
Outcome q1_growth(const fs::path&) {
  Rng rng(8);
  std::vector<DualWauliOperator> ops;
  for (int i = 0; i < 100; ++i) ops.push_back(random_sparse(10, rng));
  int applications = 0;
  int violations = 0;
  int support_violations = 0;
  double max_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TransitionEngine engine(random_model(build_ring(10), 1000 + seed, 0.0));
    for (const auto& o : ops) {
      const auto t = engine.apply(o);
      ++applications;
      const double ratio = q1_norm(t) / q1_norm(o);
      max_ratio = std::max(max_ratio, ratio);
      if (ratio > 130.0 * (1 + 1e-12)) ++violations;
      if (!o.support().empty() && !t.support().is_subset_of(graph_ball(engine.graph(), o.support(), 1)))
        ++support_violations;
      if (o.support().empty() && !t.empty()) ++support_violations;
    }
  }
  const auto& c = chain_check();
  return {violations == 0 && c.q1_violations == 0 && support_violations == 0,
          std::to_string(applications) + " single applications (100 operators x 50 models): max ratio " +
              fmt("%.2f", max_ratio) + " (limit 130), " + std::to_string(violations) + " violations; " +
              std::to_string(c.operators) + " A_k along " + std::to_string(c.sequences) +
              " sequences: max q1(A_k)/(130^k q1(A)) " + sci(c.max_ratio) + ", " + std::to_string(c.q1_violations) +
              " violations"};
}

// 9. Support containment along the A_k chains.
Outcome support_containment(const fs::path&) {
  const auto& c = chain_check();
  return {c.support_violations == 0, std::to_string(c.operators) + " A_k along " + std::to_string(c.sequences) +
                                         " sequences: " + std::to_string(c.support_violations) +
                                         " outside the radius-k ball"};
}

// 10. Mixed partials vanish for disconnected edge pairs.
Outcome connected_vanishing(const fs::path&) {
  const auto model = random_model(build_ring(6), 1, 0.0);
  const auto adjacent = connected_term_probe(model, Edge(0, 1), Edge(1, 2), 1e-3);
  const auto apart = connected_term_probe(model, Edge(0, 1), Edge(3, 4), 1e-3);
  const double ratio = apart.mixed_partial_norm / adjacent.mixed_partial_norm;
  const bool local = adjacent.support_estimate.is_subset_of(SupportSet{0, 1, 2});
  std::string support;
  for (int s : adjacent.support_estimate) support += (support.empty() ? "" : ",") + std::to_string(s);
  return {ratio <= 1e-3 && local, "ring(6), h=1e-3: adjacent norm " + sci(adjacent.mixed_partial_norm) +
                                      " on sites {" + support + "}, disconnected norm " +
                                      sci(apart.mixed_partial_norm) + ", ratio " + sci(ratio) + " (limit 1e-3)"};
}

// 11. Covariance decay below the convergence radius.
Outcome covariance_decay(const fs::path&) {
  bool pass = true;
  double worst_ratio = 0.0;
  std::string orders;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const TransitionEngine engine(random_model(build_ring(10), seed, 0.0));
    const LocalOperator a{SupportSet{0}, Matrix(pauli(3))};
    const auto sa = a_k_sequence(a, engine, 6);
    for (int d = 1; d <= 4; ++d) {
      const LocalOperator b{SupportSet{d}, Matrix(pauli(3))};
      const auto sb = a_k_sequence(b, engine, 6);
      const auto sab = a_k_sequence(disjoint_product(a, b), engine, 6);
      const auto c = covariance_from_sequences(sa, sb, sab, a, b, engine.graph(), 0.001);
      worst_ratio = std::max(worst_ratio, std::abs(c.series.value) / c.bound);
      pass = pass && c.distance == d && std::abs(c.series.value) <= c.bound && c.first_nonzero_order >= d;
      if (seed == 1) orders += (orders.empty() ? "" : ",") + std::to_string(c.first_nonzero_order);
    }
  }
  return {pass, "3 models, ring(10), epsilon=0.001, d=1..4: max |C|/bound " + sci(worst_ratio) +
                    ", first nonzero orders {" + orders + "} (seed 1)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsteady acceptance suite"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 11));
  app.add_option("--out", out, "Directory for experiment CSVs");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>> criteria = {
      {"epsilon=0 exactness", epsilon_zero_exactness},
      {"CZ ring(10) convergence", cz_convergence},
      {"oracle equivalence", oracle_equivalence},
      {"Gibbs round trip", gibbs_round_trip},
      {"locality-profile decay", locality_decay},
      {"epsilon=1 degeneracy witness", epsilon_one_degeneracy},
      {"perturbative series agreement", series_agreement},
      {"Q1 growth law", q1_growth},
      {"support containment", support_containment},
      {"connected-component vanishing", connected_vanishing},
      {"covariance decay", covariance_decay},
  };

  fs::create_directories(out);
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(out);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

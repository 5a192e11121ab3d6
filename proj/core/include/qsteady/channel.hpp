#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsteady/densemath.hpp"
#include "qsteady/lattice.hpp"
#include "qsteady/rng.hpp"

namespace qsteady {

/// A CPTP map in Kraus form, acting on `support`. Kraus operators are
/// 2^|support| square in sorted site order.
struct KrausChannel {
  SupportSet support;
  std::vector<Matrix> kraus_ops;
  double weight = 1.0;
  /// Present for reset channels rho -> Tr_S(rho) (x) state.
  std::optional<Matrix> reset_state;

  int num_qubits() const noexcept { return static_cast<int>(support.size()); }
  bool is_diagonal() const;

  /// Action on an operator of the support's own dimension.
  Matrix apply_local(const Matrix& rho) const;
  Matrix apply_adjoint_local(const Matrix& a) const;
};

enum class CorrelatorKind { cz, haar_mixture, random_kraus };

struct CorrelatorSpec {
  CorrelatorKind kind = CorrelatorKind::cz;
  int param = 1;  // k for haar_mixture, rank for random_kraus
};

std::string to_string(CorrelatorKind kind);
std::optional<CorrelatorKind> parse_correlator_kind(const std::string& name);

Matrix controlled_z();
/// Single-qubit density (1 + r.sigma)/2.
Matrix bloch_state(double x, double y, double z);
/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal absorbed into Q.
Matrix haar_unitary(int dim, Rng& rng);

/// rho -> Tr(rho) w on a single qubit. Throws RankDeficiencyError when w is
/// not full rank.
KrausChannel make_reset_dissipator(const Matrix& w, int site = 0);

/// Two-qubit correlator. random_kraus(r) draws a 4r x 4 Ginibre matrix,
/// orthonormalizes it into an isometry V and sets F_k = (1 (x) <k|) V.
KrausChannel make_correlator(const CorrelatorSpec& spec, std::uint64_t seed, Edge edge = Edge(0, 1));

struct CptpReport {
  bool trace_preserving = false;
  double trace_defect = 0.0;  // ||sum F^dagger F - 1||_inf
  double cp_min_eig = 0.0;    // smallest Choi eigenvalue
  bool completely_positive = false;
  bool ok() const noexcept { return trace_preserving && completely_positive; }
};

Matrix choi_matrix(const KrausChannel& ch);
CptpReport validate_cptp(const KrausChannel& ch);

struct ErgodicityReport {
  bool ergodic = false;
  /// Dimension of span{F_{i_j} ... F_{i_1} : 1 <= j <= k} for k = 1..k_max.
  std::vector<int> span_dim_at_k;
  /// Dimension of the span of products of exactly k Kraus operators.
  std::vector<int> exact_span_dim_at_k;
  /// First k at which span_dim_at_k reaches the full operator space, or -1.
  int k_reached = -1;
};

/// Products-span test for a channel on at most two qubits.
ErgodicityReport local_ergodicity_check(const KrausChannel& ch, int k_max);

/// Dissipators per vertex, correlators per edge (same order as the graph's
/// edge list), and the interpolation parameter.
struct ChannelModel {
  InteractionGraph graph;
  std::vector<KrausChannel> dissipators;
  std::vector<KrausChannel> correlators;
  double epsilon = 0.0;

  int num_qubits() const noexcept { return graph.num_vertices(); }
  /// Throws ContractError describing the first violated invariant.
  void validate() const;
  /// Reset states W_i, if every dissipator is a reset channel.
  std::optional<std::vector<Matrix>> reset_states() const;
};

ChannelModel make_model(InteractionGraph graph, const std::vector<Matrix>& reset_states,
                        std::vector<KrausChannel> correlators, double epsilon);

/// Translation-invariant model: W = 0.9|+><+| + 0.1|-><-| and CZ correlators.
ChannelModel make_cz_model(InteractionGraph graph, double epsilon);

struct RandomModelOptions {
  CorrelatorSpec correlator{CorrelatorKind::random_kraus, 3};
  /// Bloch-vector lengths of the random W_i are uniform in this range;
  /// directions are uniform on the sphere.
  double min_bloch = 0.2;
  double max_bloch = 0.8;
};

ChannelModel make_random_model(InteractionGraph graph, const RandomModelOptions& options,
                               std::uint64_t seed, double epsilon);

/// The composite channel
///   E(rho) = sum_e p_e [ (1 - eps_e)/2 (D_i + D_j) + eps_e F_e ](rho),
/// applied term by term to full-register operators. Immutable.
class EpsilonChannel {
 public:
  struct Term {
    double weight;
    const KrausChannel* channel;
  };

  explicit EpsilonChannel(ChannelModel model);
  /// Per-edge interpolation parameters (the multivariate form). The stored
  /// model's epsilon is ignored.
  EpsilonChannel(ChannelModel model, std::vector<double> edge_epsilons);

  EpsilonChannel(const EpsilonChannel&) = delete;
  EpsilonChannel& operator=(const EpsilonChannel&) = delete;
  EpsilonChannel(EpsilonChannel&&) = default;
  EpsilonChannel& operator=(EpsilonChannel&&) = default;

  int num_qubits() const noexcept { return n_; }
  const ChannelModel& model() const noexcept { return *model_; }
  const std::vector<double>& edge_epsilons() const noexcept { return edge_eps_; }
  /// Vertex-grouped terms: D_i with weight sum_{e ni i} p_e (1 - eps_e)/2,
  /// F_e with weight p_e eps_e. Zero-weight terms are dropped.
  const std::vector<Term>& terms() const noexcept { return terms_; }

  Matrix apply(const Matrix& rho) const;
  Matrix apply_adjoint(const Matrix& a) const;
  /// Evaluates the edge-grouped sum literally, dissipators once per edge.
  Matrix apply_edge_grouped(const Matrix& rho) const;

 private:
  void build_terms();

  std::unique_ptr<ChannelModel> model_;
  std::vector<double> edge_eps_;
  std::vector<Term> terms_;
  int n_ = 0;
};

EpsilonChannel compose_epsilon_channel(const ChannelModel& model);
Matrix apply_channel(const EpsilonChannel& channel, const Matrix& rho);
Matrix apply_adjoint(const EpsilonChannel& channel, const Matrix& a);

/// out += weight * ch(rho), where ch acts on its support inside the register.
void accumulate_local_channel(const KrausChannel& ch, double weight, const Matrix& rho, Matrix& out);
/// out += weight * ch^*(a).
void accumulate_local_adjoint(const KrausChannel& ch, double weight, const Matrix& a, Matrix& out);

/// Product state W_0 (x) W_1 (x) ... for reset-dissipator models.
Matrix product_reset_state(const ChannelModel& model);

}  // namespace qsteady

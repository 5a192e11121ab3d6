#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qsteady/channel.hpp"
#include "qsteady/densemath.hpp"
#include "qsteady/lattice.hpp"

// Heisenberg-picture perturbation theory around the epsilon = 0 channel
// sum_i q_i D_i with reset dissipators D_i(rho) = Tr_i(rho) (x) W_i.
//
// In the frame where W_i = (1 + lambda_i Z)/2 every qubit carries the Wauli
// basis Q = {W, X/2, Y/2, Z/2} and its dual {1, X, Y, Z - lambda 1}, with
// <Q~_b, Q_a>_HS = delta_ab. Operators are stored as sparse expansions in the
// dual basis; the basis matrices themselves are kept in the original frame.

namespace qsteady {

struct LocalFrame {
  /// u_i W_i u_i^dagger = diag(larger, smaller).
  std::vector<Matrix2> u;
  /// Largest minus smallest eigenvalue of W_i.
  std::vector<double> lambda;
  double lambda_max = 0.0;
  /// Wauli and dual-Wauli bases per qubit, expressed in the original frame.
  std::vector<QubitBasis> wauli;
  std::vector<QubitBasis> dual;

  int num_qubits() const noexcept { return static_cast<int>(u.size()); }
};

/// Frames from the single-qubit reset states.
LocalFrame frames_from_states(const std::vector<Matrix>& states);
/// Throws UnsupportedError unless every dissipator is a reset channel.
LocalFrame derive_frames(const ChannelModel& model);

/// Dual-Wauli string: the letter of site i sits in bits 2i, 2i+1.
using WauliKey = std::uint64_t;

inline int key_letter(WauliKey key, int site) { return static_cast<int>((key >> (2 * site)) & 3u); }
inline WauliKey key_with(WauliKey key, int site, int letter) {
  return (key & ~(WauliKey{3} << (2 * site))) | (static_cast<WauliKey>(letter) << (2 * site));
}
/// Bit i set when site i carries a non-identity letter.
std::uint64_t key_support_mask(WauliKey key);

inline constexpr double kPruneThreshold = 1e-15;
inline constexpr int kMaxDualWauliQubits = 32;

/// O = sum_alpha c_alpha Q~_alpha with terms sorted by key and no stored
/// coefficient below the prune threshold.
class DualWauliOperator {
 public:
  struct Term {
    WauliKey key;
    Complex coeff;
  };

  DualWauliOperator() = default;
  explicit DualWauliOperator(int n);
  /// Sorts, merges duplicate keys and prunes.
  static DualWauliOperator from_terms(int n, std::vector<Term> terms, double prune = kPruneThreshold);
  static DualWauliOperator identity(int n);

  int num_qubits() const noexcept { return n_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  Complex coeff(WauliKey key) const;
  /// Tr(rho_0 O), i.e. the coefficient of the identity string.
  Complex identity_coefficient() const { return coeff(0); }
  std::uint64_t support_mask() const;
  SupportSet support() const { return SupportSet::from_mask(support_mask()); }

  DualWauliOperator scaled(Complex factor) const;

 private:
  int n_ = 0;
  std::vector<Term> terms_;
};

/// Expansion of an operator given on its support.
DualWauliOperator to_dual_wauli(const LocalOperator& a, const LocalFrame& frame);
/// Full-register input; the support is detected first and must have at most
/// 12 qubits.
DualWauliOperator to_dual_wauli(const Matrix& a, const LocalFrame& frame);
/// Dense 2^n operator, n <= 12.
Matrix from_dual_wauli(const DualWauliOperator& o, const LocalFrame& frame);

/// Sum of |c_alpha|.
double q1_norm(const DualWauliOperator& o);

/// E_0^*: each term scaled by 1 - q_alpha with q_alpha = sum_{i in supp} q_i.
DualWauliOperator apply_adjoint_E0(const DualWauliOperator& o, const InteractionGraph& graph);

using EdgeMatrix = Eigen::Matrix<Complex, 16, 16>;

/// Precomputed data for the transition map T = E_1^* (K^*)^{-1}:
///   T(Q~_0) = 0,
///   T(Q~_alpha) = (1/q_alpha) sum_{e in E1} p_e F_e^*(Q~_alpha) + (1 - p_E1/q_alpha) Q~_alpha,
/// where E1 are the edges meeting supp(alpha). F_e^* acts through the 16x16
/// matrix M_e[beta, alpha] = Tr(Q_beta F_e^*(Q~_alpha)) on the edge's two
/// letters (site e.a is the high digit). Immutable after construction.
class TransitionEngine {
 public:
  explicit TransitionEngine(const ChannelModel& model, double prune = kPruneThreshold);

  int num_qubits() const noexcept { return graph_.num_vertices(); }
  const InteractionGraph& graph() const noexcept { return graph_; }
  const LocalFrame& frame() const noexcept { return frame_; }
  const EdgeMatrix& edge_matrix(std::size_t edge) const { return edge_mats_.at(edge); }
  double prune_threshold() const noexcept { return prune_; }

  DualWauliOperator apply(const DualWauliOperator& o) const;
  /// F_e^* alone, through the same edge matrix.
  DualWauliOperator apply_correlator_adjoint(std::size_t edge, const DualWauliOperator& o) const;

 private:
  InteractionGraph graph_;
  LocalFrame frame_;
  std::vector<EdgeMatrix> edge_mats_;
  double prune_;
};

DualWauliOperator apply_transition_T(const DualWauliOperator& o, const TransitionEngine& engine);

struct AkMetadata {
  int k = 0;
  std::size_t terms = 0;
  int support_size = 0;
  std::uint64_t support_mask = 0;
  double q1_norm = 0.0;
  Complex identity_coeff;
};

struct AkSequence {
  std::vector<DualWauliOperator> ops;  // A_0 .. A_{k_reached}
  std::vector<AkMetadata> meta;
  int k_reached = 0;
  /// Set when the term cap stopped the sequence before k_max.
  bool capped = false;
};

struct SequenceOptions {
  std::size_t max_terms = std::size_t{1} << 22;
};

/// A_0 = a, A_k = T(A_{k-1}) for k <= k_max.
AkSequence a_k_sequence(const LocalOperator& a, const TransitionEngine& engine, int k_max,
                        const SequenceOptions& options = {});

/// e^{-6}: the radius below which the series bounds converge.
double epsilon_zero();

struct SeriesResult {
  double value = 0.0;
  /// partial_sums[k] = sum_{j <= k} eps^j c_j.
  std::vector<double> partial_sums;
  /// Per-order coefficients c_k (Tr(rho_0 A_k) or C^(k)).
  std::vector<double> orders;
  int k_used = 0;
  /// Geometric tail bound beyond k_used; +infinity when eps e^6 >= 1.
  double tail_bound = 0.0;
};

/// <A>(eps) = sum_k eps^k Tr(rho_0 A_k), with tail bound
/// sum_{k > k_used} (eps e^6)^k e^{6 l} ||a||_inf.
SeriesResult expectation_series(const LocalOperator& a, const TransitionEngine& engine, double epsilon,
                                int k_max, const SequenceOptions& options = {});

/// The same sum from a precomputed sequence of `a`; the sequence does not
/// depend on epsilon, so one sequence serves a whole sweep.
SeriesResult series_from_sequence(const AkSequence& seq, const LocalOperator& a, double epsilon);

/// Smallest k_max with sum_{k > k_max} (eps e^6)^k <= delta. Throws
/// ContractError when eps >= e^{-6}. The support size does not enter the
/// geometric tail; it scales the additive error as delta e^{6 l} ||A||.
int truncation_order(double delta, double epsilon, int ell);

struct CovarianceResult {
  SeriesResult series;
  /// First k with |C^(k)| > 1e-10, or -1.
  int first_nonzero_order = -1;
  /// Graph distance between the supports; -1 when disconnected.
  int distance = -1;
  /// c e^{6(lA + lB)} ||A|| ||B|| (eps/eps0)^d with c = (d+2)/(1 - eps/eps0)^2.
  double bound = 0.0;
};

double covariance_bound(double epsilon, int ell_a, int ell_b, double norm_a, double norm_b, int distance);

/// C(eps) = <AB> - <A><B> from the A, B and AB sequences. Requires disjoint
/// supports (UnsupportedError otherwise).
CovarianceResult covariance_series(const LocalOperator& a, const LocalOperator& b,
                                   const TransitionEngine& engine, double epsilon, int k_max,
                                   const SequenceOptions& options = {});

/// A B on the union of two disjoint supports.
LocalOperator disjoint_product(const LocalOperator& a, const LocalOperator& b);
/// covariance_series from the precomputed sequences of A, B and AB.
CovarianceResult covariance_from_sequences(const AkSequence& sa, const AkSequence& sb, const AkSequence& sab,
                                           const LocalOperator& a, const LocalOperator& b,
                                           const InteractionGraph& graph, double epsilon);

}  // namespace qsteady

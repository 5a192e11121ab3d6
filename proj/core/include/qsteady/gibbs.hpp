#pragma once

#include <cstdint>
#include <vector>

#include "qsteady/channel.hpp"
#include "qsteady/densemath.hpp"
#include "qsteady/lattice.hpp"

namespace qsteady {

/// H = -log(rho). Throws RankDeficiencyError below `floor`.
Matrix gibbs_hamiltonian(const Matrix& rho, double floor = 1e-14);

/// Pauli-string coefficients c_alpha = Tr(P_alpha h) / 2^n, stored densely
/// over all 4^n strings (qubit 0 is the most significant base-4 digit).
struct PauliExpansion {
  int n = 0;
  Eigen::VectorXd coeffs;
  /// Largest |Im c_alpha| discarded when the input was Hermitian.
  double max_imag = 0.0;

  double coeff(const std::vector<int>& letters) const;
  /// sum_alpha c_alpha P_alpha.
  Matrix reconstruct() const;
};

inline constexpr int kMaxPauliQubits = 10;

/// Tensor-structured transform, O(n 4^n). Requires Hermitian h, n <= 10.
PauliExpansion pauli_transform(const Matrix& h);
/// Operator of the given real coefficients in the Pauli basis.
Matrix pauli_synthesis(const Eigen::VectorXd& coeffs, int n);

/// Sites with a non-identity letter, as a mask with bit i = qubit i.
std::uint64_t pauli_support_mask(std::size_t index, int n);

struct HHatProfile {
  double epsilon = 0.0;
  int ring_n = 0;
  int k_cap = 0;
  /// norms[k - 1] = ||H^_k||_inf for k = 1..k_cap.
  std::vector<double> norms;
  /// ||sum_{d(alpha)=1} c_alpha P_alpha||_inf.
  double normalizer = 0.0;

  double norm(int k) const { return norms.at(static_cast<std::size_t>(k - 1)); }
};

/// Groups coefficients by ring diameter and returns the operator norm of each
/// sector divided by the diameter-one sector's norm. k_cap < 0 selects
/// ring_n - 3. Throws ContractError when the normalizer is below 1e-12.
HHatProfile h_hat_profile(const PauliExpansion& expansion, int ring_n, int k_cap = -1,
                          double epsilon = 0.0);

/// Operator with only the strings of ring diameter exactly k.
Matrix diameter_sector(const PauliExpansion& expansion, int k);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least-squares line through (k, ln norm_k) over entries above 1e-10.
/// Throws ContractError with fewer than three such entries.
DecayFit decay_fit(const HHatProfile& profile);

struct ConnectedProbeResult {
  double mixed_partial_norm = 0.0;
  SupportSet support_estimate;
  /// Largest |c_alpha| of the mixed difference.
  double max_coefficient = 0.0;
  Matrix mixed_difference;
};

/// Forward mixed difference [H(h,h) - H(h,0) - H(0,h) + H(0,0)] / h^2 of the
/// Gibbs Hamiltonian in the two edge parameters, all other edge parameters
/// zero, each point solved by the dense oracle (n <= 6). The support estimate
/// covers strings with |c_alpha| > 1e-6 max |c|.
ConnectedProbeResult connected_term_probe(const ChannelModel& model, Edge e1, Edge e2,
                                          double h_step = 1e-3, double log_floor = 1e-14);

}  // namespace qsteady

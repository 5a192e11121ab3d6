#include "qsteady/gibbs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qsteady/errors.hpp"
#include "qsteady/steady.hpp"

namespace qsteady {

namespace {

std::vector<QubitBasis> pauli_bases(int n, double scale) {
  QubitBasis b;
  for (int letter = 0; letter < 4; ++letter) b[static_cast<std::size_t>(letter)] = scale * pauli(letter);
  return std::vector<QubitBasis>(static_cast<std::size_t>(n), b);
}

void check_pauli_size(int n) {
  if (n > kMaxPauliQubits) {
    throw UnsupportedError("Pauli expansion supports n <= " + std::to_string(kMaxPauliQubits) +
                           ", got n = " + std::to_string(n));
  }
}

std::vector<int> diameter_table(int n) {
  std::vector<int> table(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < table.size(); ++m) table[m] = ring_diameter(n, m);
  return table;
}

Eigen::VectorXd sector_coefficients(const PauliExpansion& e, int k, const std::vector<int>& diam) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(e.coeffs.size());
  for (Eigen::Index i = 0; i < e.coeffs.size(); ++i) {
    if (diam[pauli_support_mask(static_cast<std::size_t>(i), e.n)] == k) out[i] = e.coeffs[i];
  }
  return out;
}

}  // namespace

Matrix gibbs_hamiltonian(const Matrix& rho, double floor) {
  require_density(rho, "gibbs_hamiltonian");
  Matrix h = -matrix_log_full_rank(rho, floor);
  return 0.5 * (h + h.adjoint());
}

double PauliExpansion::coeff(const std::vector<int>& letters) const {
  if (static_cast<int>(letters.size()) != n) throw ShapeError("Pauli string length does not match n");
  std::size_t index = 0;
  for (int l : letters) {
    if (l < 0 || l > 3) throw ShapeError("Pauli letter outside 0..3");
    index = (index << 2) | static_cast<std::size_t>(l);
  }
  return coeffs[static_cast<Eigen::Index>(index)];
}

Matrix PauliExpansion::reconstruct() const { return pauli_synthesis(coeffs, n); }

PauliExpansion pauli_transform(const Matrix& h) {
  const int n = num_qubits(h);
  check_pauli_size(n);
  require_hermitian(h, "pauli_transform", 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()));
  const auto bases = pauli_bases(n, 0.5);
  const Vector c = product_basis_analysis(h, bases);
  PauliExpansion out;
  out.n = n;
  out.coeffs = c.real();
  out.max_imag = c.imag().cwiseAbs().maxCoeff();
  return out;
}

Matrix pauli_synthesis(const Eigen::VectorXd& coeffs, int n) {
  check_pauli_size(n);
  const auto bases = pauli_bases(n, 1.0);
  return product_basis_synthesis(coeffs.cast<Complex>(), bases);
}

std::uint64_t pauli_support_mask(std::size_t index, int n) {
  std::uint64_t mask = 0;
  for (int q = 0; q < n; ++q) {
    if (string_letter(index, n, q) != 0) mask |= std::uint64_t{1} << q;
  }
  return mask;
}

Matrix diameter_sector(const PauliExpansion& expansion, int k) {
  const auto diam = diameter_table(expansion.n);
  return pauli_synthesis(sector_coefficients(expansion, k, diam), expansion.n);
}

HHatProfile h_hat_profile(const PauliExpansion& expansion, int ring_n, int k_cap, double epsilon) {
  if (ring_n != expansion.n) throw ShapeError("ring size does not match the expansion");
  if (ring_n < 3) throw UnsupportedError("diameter profile needs a ring with n >= 3");
  if (k_cap < 0) k_cap = ring_n - 3;
  if (k_cap < 1 || k_cap > ring_n) {
    throw ContractError("k_cap must lie in [1, " + std::to_string(ring_n) + "]");
  }
  const auto diam = diameter_table(ring_n);
  HHatProfile profile;
  profile.epsilon = epsilon;
  profile.ring_n = ring_n;
  profile.k_cap = k_cap;
  profile.normalizer = operator_norm(pauli_synthesis(sector_coefficients(expansion, 1, diam), ring_n));
  if (profile.normalizer < 1e-12) {
    std::ostringstream os;
    os << "diameter-one sector vanishes (norm " << profile.normalizer << "); profile undefined";
    throw ContractError(os.str());
  }
  profile.norms.push_back(1.0);
  for (int k = 2; k <= k_cap; ++k) {
    const Eigen::VectorXd c = sector_coefficients(expansion, k, diam);
    const double norm = c.isZero(0.0) ? 0.0 : operator_norm(pauli_synthesis(c, ring_n));
    profile.norms.push_back(norm / profile.normalizer);
  }
  return profile;
}

DecayFit decay_fit(const HHatProfile& profile) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < profile.norms.size(); ++i) {
    if (profile.norms[i] > 1e-10) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(std::log(profile.norms[i]));
    }
  }
  if (xs.size() < 3) {
    throw ContractError("decay_fit needs at least 3 nonzero norms, got " + std::to_string(xs.size()));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  fit.points = static_cast<int>(xs.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ConnectedProbeResult connected_term_probe(const ChannelModel& model, Edge e1, Edge e2,
                                          double h_step, double log_floor) {
  const int n = model.num_qubits();
  if (n > 6) throw UnsupportedError("connected_term_probe needs n <= 6");
  if (e1 == e2) throw ContractError("connected_term_probe needs two distinct edges");
  if (!(h_step > 0.0 && h_step <= 1.0)) throw ContractError("h_step must lie in (0, 1]");
  const auto i1 = model.graph.edge_index(e1.a, e1.b);
  const auto i2 = model.graph.edge_index(e2.a, e2.b);
  if (!i1 || !i2) throw InvalidGraphError("probe edge is not in the graph");

  std::array<Matrix, 4> hs;  // (0,0), (h,0), (0,h), (h,h)
  for (int corner = 0; corner < 4; ++corner) {
    std::vector<double> eps(model.graph.num_edges(), 0.0);
    if (corner & 1) eps[*i1] = h_step;
    if (corner & 2) eps[*i2] = h_step;
    const EpsilonChannel channel(model, std::move(eps));
    hs[static_cast<std::size_t>(corner)] = gibbs_hamiltonian(dense_fixed_point_oracle(channel), log_floor);
  }
  ConnectedProbeResult out;
  out.mixed_difference = (hs[3] - hs[1] - hs[2] + hs[0]) / (h_step * h_step);
  out.mixed_difference = 0.5 * (out.mixed_difference + out.mixed_difference.adjoint());
  out.mixed_partial_norm = operator_norm(out.mixed_difference);

  const PauliExpansion pe = pauli_transform(out.mixed_difference);
  // The identity string carries no support; it is left out of the scale.
  for (Eigen::Index i = 1; i < pe.coeffs.size(); ++i) {
    out.max_coefficient = std::max(out.max_coefficient, std::abs(pe.coeffs[i]));
  }
  std::uint64_t mask = 0;
  const double cut = 1e-6 * out.max_coefficient;
  for (Eigen::Index i = 1; i < pe.coeffs.size(); ++i) {
    if (std::abs(pe.coeffs[i]) > cut) mask |= pauli_support_mask(static_cast<std::size_t>(i), n);
  }
  out.support_estimate = SupportSet::from_mask(mask);
  return out;
}

}  // namespace qsteady

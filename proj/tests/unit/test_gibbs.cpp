#include <gtest/gtest.h>

#include <cmath>

#include "qsteady/errors.hpp"
#include "qsteady/gibbs.hpp"
#include "qsteady/steady.hpp"
#include "test_util.hpp"

using namespace qsteady;
using testutil::random_density;
using testutil::random_hermitian;

namespace {

Matrix pauli_string(std::size_t index, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int q = 0; q < n; ++q) out = kron(out, Matrix(pauli(string_letter(index, n, q))));
  return out;
}

// c_alpha = Tr(P_alpha h) / 2^n, one trace per string.
Eigen::VectorXd naive_pauli(const Matrix& h, int n) {
  const std::size_t count = std::size_t{1} << (2 * n);
  Eigen::VectorXd c(static_cast<Eigen::Index>(count));
  for (std::size_t a = 0; a < count; ++a) {
    c(static_cast<Eigen::Index>(a)) = (pauli_string(a, n) * h).trace().real() / std::pow(2.0, n);
  }
  return c;
}

int weight(std::size_t index, int n) {
  int w = 0;
  for (int q = 0; q < n; ++q) w += string_letter(index, n, q) != 0;
  return w;
}

Matrix steady(int n, std::uint64_t seed, double eps) {
  const EpsilonChannel ch(make_random_model(build_ring(n), RandomModelOptions{}, seed, eps));
  IterationOptions opts;
  opts.tol = 1e-12;
  return iterate_fixed_point(ch, zero_state(n), opts).rho;
}

}  // namespace

TEST(GibbsHamiltonian, ProductStateIsOneLocal) {
  const int n = 4;
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = 0.9;
  w(1, 1) = 0.1;
  Matrix rho = w;
  for (int i = 1; i < n; ++i) rho = kron(rho, w);
  const auto exp = pauli_transform(gibbs_hamiltonian(rho));
  for (Eigen::Index a = 0; a < exp.coeffs.size(); ++a) {
    if (weight(static_cast<std::size_t>(a), n) >= 2) EXPECT_LE(std::abs(exp.coeffs(a)), 1e-12);
  }
  EXPECT_NEAR(exp.coeff({3, 0, 0, 0}), -0.5 * std::log(0.9 / 0.1), 1e-12);
}

TEST(GibbsHamiltonian, RoundTripOnRandomStates) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix rho = random_density(8, rng);
    const Matrix h = gibbs_hamiltonian(rho);
    EXPECT_TRUE(is_hermitian(h, 1e-12));
    EXPECT_LE((hermitian_exp(-h) - rho).norm(), 1e-8);
  }
}

TEST(GibbsHamiltonian, MaximallyMixed) {
  const Matrix h = gibbs_hamiltonian(maximally_mixed(3));
  EXPECT_LE((h - 3 * std::log(2.0) * Matrix::Identity(8, 8)).norm(), 1e-13);
}

TEST(GibbsHamiltonian, InverseOfExpOnBoundedSpectra) {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    const Matrix h = testutil::random_hermitian_spectrum(16, 0.0, 4.0, rng);
    const Matrix rho = hermitian_exp(-h);
    const double z = rho.trace().real();
    const Matrix back = gibbs_hamiltonian(rho / z) - std::log(z) * Matrix::Identity(16, 16);
    EXPECT_LE((back - h).norm(), 1e-8);
  }
}

TEST(GibbsHamiltonian, RankDeficiencyPropagates) {
  EXPECT_THROW(gibbs_hamiltonian(zero_state(2)), RankDeficiencyError);
}

TEST(PauliTransform, SingleZ) {
  const auto exp = pauli_transform(tensor_embed(Matrix(pauli(3)), SupportSet{0}, 2));
  for (Eigen::Index a = 0; a < 16; ++a) EXPECT_NEAR(exp.coeffs(a), a == 12 ? 1.0 : 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(exp.coeff({3, 0}), 1.0);
}

TEST(PauliTransform, ControlledZ) {
  const auto exp = pauli_transform(controlled_z());
  EXPECT_NEAR(exp.coeff({0, 0}), 0.5, 1e-15);
  EXPECT_NEAR(exp.coeff({3, 0}), 0.5, 1e-15);
  EXPECT_NEAR(exp.coeff({0, 3}), 0.5, 1e-15);
  EXPECT_NEAR(exp.coeff({3, 3}), -0.5, 1e-15);
  EXPECT_NEAR(exp.coeffs.cwiseAbs().sum(), 2.0, 1e-14);
}

TEST(PauliTransform, MatchesNaiveTraces) {
  Rng rng(3);
  for (int n = 1; n <= 4; ++n) {
    const Matrix h = random_hermitian(1 << n, rng);
    const auto exp = pauli_transform(h);
    EXPECT_LE((exp.coeffs - naive_pauli(h, n)).cwiseAbs().maxCoeff(), 1e-11) << n;
    EXPECT_LE(exp.max_imag, 1e-10);
    EXPECT_LE((exp.reconstruct() - h).norm(), 1e-9);
  }
}

TEST(PauliTransform, RoundTripAtTenQubits) {
  Rng rng(4);
  const Matrix h = random_hermitian(1 << 10, rng);
  const auto exp = pauli_transform(h);
  EXPECT_LE((pauli_synthesis(exp.coeffs, 10) - h).norm(), 1e-9);
}

TEST(PauliTransform, RejectsLargeOrNonHermitian) {
  EXPECT_THROW(pauli_transform(Matrix::Identity(2048, 2048)), UnsupportedError);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(pauli_transform(a), ContractError);
}

TEST(PauliTransform, SupportMask) {
  // X on qubit 0, Z on qubit 2, n = 3.
  const std::size_t idx = (1u << 4) | 3u;
  EXPECT_EQ(pauli_support_mask(idx, 3), 0b101u);
}

TEST(HHat, EpsilonZeroProfileVanishesBeyondOne) {
  const auto profile = h_hat_profile(pauli_transform(gibbs_hamiltonian(steady(6, 1, 0.0))), 6);
  EXPECT_EQ(profile.k_cap, 3);
  EXPECT_NEAR(profile.norm(1), 1.0, 1e-9);
  for (int k = 2; k <= profile.k_cap; ++k) EXPECT_LE(profile.norm(k), 1e-10);
  EXPECT_THROW(decay_fit(profile), ContractError);
}

TEST(HHat, RandomKrausProfileDecreasesAtEightQubits) {
  const auto profile = h_hat_profile(pauli_transform(gibbs_hamiltonian(steady(8, 1, 0.5))), 8, 5, 0.5);
  EXPECT_NEAR(profile.norm(1), 1.0, 1e-9);
  for (int k = 2; k <= 5; ++k) EXPECT_LT(profile.norm(k), profile.norm(k - 1));
  const auto fit = decay_fit(profile);
  EXPECT_LT(fit.slope, 0.0);
  EXPECT_GE(fit.r_squared, 0.9);
}

TEST(HHat, SectorsAreOrthogonalAndSumToH) {
  const Matrix h = gibbs_hamiltonian(steady(5, 2, 0.6));
  const auto exp = pauli_transform(h);
  std::vector<Matrix> sectors;
  Matrix total = diameter_sector(exp, 0);
  for (int k = 1; k <= 5; ++k) {
    sectors.push_back(diameter_sector(exp, k));
    total += sectors.back();
  }
  EXPECT_LE((total - h).norm(), 1e-9);
  for (std::size_t j = 0; j < sectors.size(); ++j)
    for (std::size_t k = j + 1; k < sectors.size(); ++k) {
      EXPECT_LE(std::abs(hs_inner(sectors[j], sectors[k])), 1e-9);
    }
  const auto profile = h_hat_profile(exp, 5, 2);
  EXPECT_NEAR(profile.normalizer, operator_norm(sectors[0]), 1e-12);
  EXPECT_NEAR(profile.norm(2), operator_norm(sectors[1]) / profile.normalizer, 1e-12);
}

TEST(HHat, VanishingNormalizerIsAnError) {
  // Only the identity and a two-site term.
  Matrix h = Matrix::Identity(16, 16) + tensor_embed(Matrix(kron(Matrix(pauli(3)), Matrix(pauli(3)))), SupportSet{0, 1}, 4);
  EXPECT_THROW(h_hat_profile(pauli_transform(h), 4), ContractError);
}

TEST(HHat, RejectsBadArguments) {
  const auto exp = pauli_transform(maximally_mixed(4) + tensor_embed(Matrix(pauli(1)), SupportSet{0}, 4));
  EXPECT_THROW(h_hat_profile(exp, 5), ShapeError);
  EXPECT_THROW(h_hat_profile(exp, 4, 9), ContractError);
}

TEST(DecayFit, ExactExponential) {
  HHatProfile p;
  p.k_cap = 6;
  for (int k = 1; k <= 6; ++k) p.norms.push_back(std::exp(-static_cast<double>(k)));
  const auto fit = decay_fit(p);
  EXPECT_NEAR(fit.slope, -1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 6);
}

TEST(DecayFit, TooFewPoints) {
  HHatProfile p;
  p.k_cap = 3;
  p.norms = {1.0, 0.1, 0.0};
  EXPECT_THROW(decay_fit(p), ContractError);
}

TEST(ConnectedProbe, AdjacentVersusDisconnectedOnFiveQubitRing) {
  const auto model = make_random_model(build_ring(5), RandomModelOptions{}, 3, 0.0);
  for (double h : {1e-2, 1e-3}) {
    const auto adj = connected_term_probe(model, Edge(0, 1), Edge(1, 2), h);
    const auto far = connected_term_probe(model, Edge(0, 1), Edge(2, 3), h);
    EXPECT_GT(adj.mixed_partial_norm, 1e-3);
    EXPECT_TRUE(adj.support_estimate.is_subset_of(SupportSet{0, 1, 2}));
    EXPECT_LE(far.mixed_partial_norm, 1e-3 * adj.mixed_partial_norm) << h;
  }
}

TEST(ConnectedProbe, BasePointIsOneLocal) {
  const auto model = make_random_model(build_ring(4), RandomModelOptions{}, 5, 0.0);
  const EpsilonChannel base(model, std::vector<double>(4, 0.0));
  const auto exp = pauli_transform(gibbs_hamiltonian(dense_fixed_point_oracle(base)));
  for (Eigen::Index a = 0; a < exp.coeffs.size(); ++a) {
    if (weight(static_cast<std::size_t>(a), 4) >= 2) EXPECT_LE(std::abs(exp.coeffs(a)), 1e-10);
  }
}

TEST(ConnectedProbe, RejectsBadArguments) {
  const auto model = make_random_model(build_ring(4), RandomModelOptions{}, 5, 0.0);
  EXPECT_THROW(connected_term_probe(model, Edge(0, 1), Edge(0, 1)), ContractError);
  EXPECT_THROW(connected_term_probe(model, Edge(0, 2), Edge(0, 1)), InvalidGraphError);
  const auto big = make_random_model(build_ring(7), RandomModelOptions{}, 5, 0.0);
  EXPECT_THROW(connected_term_probe(big, Edge(0, 1), Edge(1, 2)), UnsupportedError);
}

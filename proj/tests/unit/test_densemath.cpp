#include <gtest/gtest.h>

#include <cmath>

#include "qsteady/densemath.hpp"
#include "qsteady/errors.hpp"
#include "qsteady/perturb.hpp"
#include "test_util.hpp"

using namespace qsteady;
using testutil::random_density;
using testutil::random_hermitian;
using testutil::random_hermitian_spectrum;
using testutil::random_matrix;

namespace {

Matrix diag(std::initializer_list<double> d) {
  RealVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.cast<Complex>().asDiagonal();
}

Matrix cz() { return diag({1, 1, 1, -1}); }

}  // namespace

TEST(TensorEmbed, Examples) {
  EXPECT_TRUE(tensor_embed(Matrix(pauli(3)), SupportSet{0}, 2).isApprox(diag({1, 1, -1, -1})));
  EXPECT_TRUE(tensor_embed(Matrix::Identity(2, 2), SupportSet{1}, 3).isApprox(Matrix::Identity(8, 8)));
  EXPECT_TRUE(tensor_embed(cz(), SupportSet{0, 1}, 2).isApprox(cz()));
  EXPECT_TRUE(tensor_embed(Matrix(pauli(3)), SupportSet{2}, 3).isApprox(diag({1, -1, 1, -1, 1, -1, 1, -1})));
}

TEST(TensorEmbed, ShapeMismatch) {
  EXPECT_THROW(tensor_embed(Matrix::Identity(4, 4), SupportSet{0}, 2), ShapeError);
  EXPECT_THROW(tensor_embed(Matrix::Identity(3, 3), SupportSet{0}, 2), ShapeError);
}

TEST(TensorEmbed, ProductOfDisjointEmbeddings) {
  Rng rng(3);
  for (int n = 2; n <= 4; ++n) {
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        if (s == t) continue;
        const Matrix a = random_matrix(2, rng), b = random_matrix(2, rng);
        const Matrix lhs = tensor_embed(a, SupportSet{s}, n) * tensor_embed(b, SupportSet{t}, n);
        const Matrix joint = s < t ? kron(a, b) : kron(b, a);
        const Matrix rhs = tensor_embed(joint, SupportSet{s, t}, n);
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
      }
  }
}

TEST(PartialTrace, ProductState) {
  Rng rng(5);
  const Matrix rho = random_density(2, rng), sigma = random_density(4, rng);
  EXPECT_LE((partial_trace(kron(rho, sigma), SupportSet{0}) - rho).norm(), 1e-12);
  const Matrix big = kron(rho, sigma);
  EXPECT_LE((partial_trace(big, SupportSet{0, 1, 2}) - big).norm(), 0.0);
}

TEST(PartialTrace, BellState) {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const Matrix bell = phi * phi.adjoint();
  EXPECT_LE((partial_trace(bell, SupportSet{0}) - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
  EXPECT_LE((partial_trace(bell, SupportSet{1}) - Matrix::Identity(2, 2) / 2.0).norm(), 1e-15);
}

TEST(PartialTrace, EmptyKeepGivesTrace) {
  Rng rng(6);
  const Matrix a = random_matrix(8, rng);
  const Matrix t = partial_trace(a, SupportSet{});
  ASSERT_EQ(t.rows(), 1);
  EXPECT_LE(std::abs(t(0, 0) - a.trace()), 1e-12);
}

TEST(PartialTrace, EmbeddedLocalScalesByComplementDimension) {
  Rng rng(7);
  for (int n = 2; n <= 5; ++n) {
    for (int s = 0; s < n; ++s) {
      const Matrix a = random_matrix(2, rng);
      const Matrix reduced = partial_trace(tensor_embed(a, SupportSet{s}, n), SupportSet{s});
      EXPECT_LE((reduced - a * std::pow(2.0, n - 1)).norm(), 1e-12 * std::pow(2.0, n));
    }
    const Matrix b = random_matrix(4, rng);
    const SupportSet pair{0, n - 1};
    EXPECT_LE((partial_trace(tensor_embed(b, pair, n), pair) - b * std::pow(2.0, n - 2)).norm(),
              1e-12 * std::pow(2.0, n));
  }
}

TEST(PartialTrace, PreservesTrace) {
  Rng rng(8);
  const Matrix a = random_matrix(16, rng);
  for (const SupportSet& keep : {SupportSet{1}, SupportSet{0, 3}, SupportSet{1, 2, 3}}) {
    EXPECT_LE(std::abs(partial_trace(a, keep).trace() - a.trace()), 1e-12);
  }
}

TEST(Eigen, PauliAndDiagonal) {
  const auto z = hermitian_eigendecompose(Matrix(pauli(3)));
  EXPECT_NEAR(z.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(z.eigenvalues(1), -1.0, 1e-15);
  const auto w = hermitian_eigendecompose(diag({0.1, 0.9}));
  EXPECT_NEAR(w.eigenvalues(0), 0.9, 1e-15);
  EXPECT_NEAR(w.eigenvalues(1), 0.1, 1e-15);
}

TEST(Eigen, RejectsNonHermitian) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eigendecompose(a), ContractError);
}

TEST(Eigen, ReconstructionAgainstKnownSpectrum) {
  Rng rng(9);
  for (int dim : {2, 8, 64, 256, 1024}) {
    const Matrix h = random_hermitian_spectrum(dim, -3.0, 3.0, rng);
    const auto eig = hermitian_eigendecompose(h);
    EXPECT_LE((eig.reconstruct() - h).norm(), 1e-10) << dim;
    EXPECT_LE((eig.eigenvectors.adjoint() * eig.eigenvectors - Matrix::Identity(dim, dim)).norm(), 1e-10);
    for (Eigen::Index i = 1; i < eig.eigenvalues.size(); ++i) EXPECT_GE(eig.eigenvalues(i - 1), eig.eigenvalues(i));
  }
}

TEST(Log, Diagonal) {
  const Matrix l = matrix_log_full_rank(diag({0.9, 0.1}));
  EXPECT_LE((l - diag({std::log(0.9), std::log(0.1)})).norm(), 1e-15);
}

TEST(Log, RoundTripThroughExp) {
  Rng rng(10);
  for (int dim : {2, 8, 32}) {
    const Matrix h = random_hermitian_spectrum(dim, -3.0, 3.0, rng);
    Matrix rho = hermitian_exp(-h);
    const double z = rho.trace().real();
    rho /= z;
    const Matrix back = -matrix_log_full_rank(rho) - std::log(z) * Matrix::Identity(dim, dim);
    EXPECT_LE((back - h).norm(), 1e-9) << dim;
  }
}

TEST(Log, RankDeficientIsRejected) {
  try {
    matrix_log_full_rank(diag({1.0, 0.0}), 1e-14);
    FAIL() << "expected RankDeficiencyError";
  } catch (const RankDeficiencyError& e) {
    EXPECT_EQ(e.eigenvalue(), 0.0);
  }
}

TEST(Norms, Pauli) {
  const Matrix x = pauli(1);
  EXPECT_NEAR(schatten_norm(x, Schatten::infinity), 1.0, 1e-15);
  EXPECT_NEAR(schatten_norm(x, Schatten::one), 2.0, 1e-15);
  EXPECT_NEAR(schatten_norm(x, Schatten::two), std::sqrt(2.0), 1e-15);
  const Matrix zero = Matrix::Zero(4, 4);
  for (auto p : {Schatten::one, Schatten::two, Schatten::infinity}) EXPECT_EQ(schatten_norm(zero, p), 0.0);
}

TEST(Norms, WauliElementsHaveUnitTraceNorm) {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const LocalFrame frame = frames_from_states({random_density(2, rng)});
    for (const auto& q : frame.wauli[0]) EXPECT_NEAR(schatten_norm(Matrix(q), Schatten::one), 1.0, 1e-12);
  }
}

TEST(Norms, Ordering) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(1 << (1 + trial % 4), rng);
    const double n1 = schatten_norm(a, Schatten::one), n2 = schatten_norm(a, Schatten::two),
                 ninf = schatten_norm(a, Schatten::infinity);
    EXPECT_LE(ninf, n2 * (1 + 1e-12));
    EXPECT_LE(n2, n1 * (1 + 1e-12));
  }
}

TEST(Inner, Examples) {
  EXPECT_NEAR(std::abs(hs_inner(Matrix(pauli(1)), Matrix(pauli(1))) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(hs_inner(Matrix::Identity(2, 2), Matrix(pauli(3)))), 0.0, 1e-15);
  EXPECT_THROW(hs_inner(Matrix::Identity(2, 2), Matrix::Identity(4, 4)), ShapeError);
}

TEST(Inner, DualWauliBiorthonormality) {
  Rng rng(13);
  const LocalFrame frame = frames_from_states({random_density(2, rng), Matrix(diag({0.9, 0.1}))});
  for (std::size_t site = 0; site < 2; ++site) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const Complex ip = hs_inner(Matrix(frame.dual[site][static_cast<std::size_t>(b)]),
                                    Matrix(frame.wauli[site][static_cast<std::size_t>(a)]));
        EXPECT_LE(std::abs(ip - (a == b ? 1.0 : 0.0)), 1e-12) << a << "," << b;
      }
  }
}

TEST(TraceDistance, Basics) {
  const Matrix a = diag({1, 0}), b = diag({0, 1});
  EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-15);
}

TEST(RestrictToSupport, FindsLocalFactor) {
  Rng rng(14);
  const Matrix local = random_hermitian(4, rng);
  const LocalOperator r = restrict_to_support(tensor_embed(local, SupportSet{1, 3}, 4));
  EXPECT_EQ(r.support, (SupportSet{1, 3}));
  EXPECT_LE((r.matrix - local).norm(), 1e-12);
  EXPECT_TRUE(restrict_to_support(Matrix::Identity(8, 8)).support.empty());
}

TEST(LocalActions, MatchEmbeddedProducts) {
  Rng rng(15);
  const int n = 4;
  const Matrix target = random_matrix(1 << n, rng);
  const Matrix k = random_matrix(4, rng);
  const SupportSet s{0, 2};
  Matrix left = target;
  apply_local_left(left, k, s);
  EXPECT_LE((left - tensor_embed(k, s, n) * target).norm(), 1e-12);
  Matrix right = target;
  apply_local_right_adjoint(right, k, s);
  EXPECT_LE((right - target * tensor_embed(k, s, n).adjoint()).norm(), 1e-12);
}

TEST(ProductBasis, PauliRoundTrip) {
  Rng rng(16);
  const int n = 3;
  QubitBasis paulis{pauli(0), pauli(1), pauli(2), pauli(3)};
  QubitBasis halves;
  for (int l = 0; l < 4; ++l) halves[static_cast<std::size_t>(l)] = paulis[static_cast<std::size_t>(l)] / 2.0;
  const std::vector<QubitBasis> analysis(n, halves), synthesis(n, paulis);
  const Matrix a = random_matrix(1 << n, rng);
  const Vector c = product_basis_analysis(a, analysis);
  EXPECT_LE((product_basis_synthesis(c, synthesis) - a).norm(), 1e-12);
  // Direct check of one coefficient, string X Y Z.
  const std::size_t idx = (1u << 4) | (2u << 2) | 3u;
  const Matrix xyz = kron(kron(Matrix(pauli(1)), Matrix(pauli(2))), Matrix(pauli(3)));
  EXPECT_LE(std::abs(c(static_cast<Eigen::Index>(idx)) - (xyz * a).trace() / 8.0), 1e-12);
  EXPECT_EQ(string_letter(idx, n, 0), 1);
  EXPECT_EQ(string_letter(idx, n, 2), 3);
}

TEST(Density, Predicates) {
  Rng rng(17);
  EXPECT_TRUE(is_density(random_density(4, rng)));
  EXPECT_FALSE(is_density(diag({1.2, -0.2})));
  EXPECT_FALSE(is_hermitian(random_matrix(4, rng)));
  EXPECT_THROW(require_density(diag({0.5, 0.6}), "test"), ContractError);
}

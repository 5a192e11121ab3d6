#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qsteady/lattice.hpp"

// Dense linear algebra on the 2^n-dimensional space of an n-qubit register.
//
// Ordering convention, shared by every module: qubit 0 is the most
// significant tensor factor, i.e. basis index r has qubit q's bit at
// position (n - 1 - q).

namespace qsteady {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2cd;

/// Square operator on a qubit register. Hermiticity and the density
/// property are checked on demand, not carried as flags.
using DenseOperator = Matrix;

/// An operator given by its action on a subset of qubits; identity elsewhere.
struct LocalOperator {
  SupportSet support;
  Matrix matrix;  // 2^|support| square, sorted site order
};

/// log2 of the dimension; throws ShapeError if `o` is not square with a
/// power-of-two dimension >= 2.
int num_qubits(const Matrix& o);

/// Pauli matrix by letter index 0=I, 1=X, 2=Y, 3=Z.
Matrix2 pauli(int letter);

bool is_hermitian(const Matrix& o, double tol = 1e-12);
/// Trace one within 1e-10, Hermitian, minimum eigenvalue >= -1e-10.
bool is_density(const Matrix& o, double tol = 1e-10);
void require_hermitian(const Matrix& o, const char* where, double tol = 1e-12);
void require_density(const Matrix& o, const char* where, double tol = 1e-10);

Matrix tensor_embed(const Matrix& local, const SupportSet& support, int n);
Matrix tensor_embed(const LocalOperator& op, int n);
Matrix kron(const Matrix& a, const Matrix& b);

/// Reduced operator on the qubits in `keep`. An empty `keep` returns the
/// trace as a 1x1 matrix.
Matrix partial_trace(const Matrix& o, const SupportSet& keep);

struct EigenDecomposition {
  RealVector eigenvalues;  // descending
  Matrix eigenvectors;     // columns, unitary

  Matrix reconstruct() const;
};

EigenDecomposition hermitian_eigendecompose(const Matrix& o);
/// Eigenvalues only, descending. Cheaper than the full decomposition.
RealVector hermitian_eigenvalues(const Matrix& o);

/// U f(Lambda) U^dagger for Hermitian input.
Matrix hermitian_function(const EigenDecomposition& eig, const std::function<double(double)>& f);
Matrix hermitian_exp(const Matrix& h);

/// log(rho) for a full-rank positive operator. Throws RankDeficiencyError if
/// any eigenvalue falls below `floor`.
Matrix matrix_log_full_rank(const Matrix& rho, double floor = 1e-14);

enum class Schatten { one, two, infinity };

double schatten_norm(const Matrix& o, Schatten p);
double operator_norm(const Matrix& o);
/// Trace distance 1/2 ||a - b||_1.
double trace_distance(const Matrix& a, const Matrix& b);
/// Tr(a^dagger b).
Complex hs_inner(const Matrix& a, const Matrix& b);

/// Smallest set of qubits outside of which `o` acts as the identity
/// (to within `tol` in Frobenius norm), together with the local factor.
LocalOperator restrict_to_support(const Matrix& o, double tol = 1e-12);

// In-place local actions on full-register operators without building the
// 2^n x 2^n embedding.

/// target <- embed(local) * target
void apply_local_left(Matrix& target, const Matrix& local, const SupportSet& support);
/// target <- target * embed(local)^dagger
void apply_local_right_adjoint(Matrix& target, const Matrix& local, const SupportSet& support);

// Product-basis transforms. A per-qubit basis is four 2x2 matrices; the
// coefficient vector is indexed by strings alpha with qubit 0 as the most
// significant base-4 digit. Both directions run in O(n 4^n).

using QubitBasis = std::array<Matrix2, 4>;

/// c_alpha = Tr((B_{alpha_0} (x) ... (x) B_{alpha_{n-1}}) A), one basis per qubit.
Vector product_basis_analysis(const Matrix& a, std::span<const QubitBasis> bases);
/// A = sum_alpha c_alpha (D_{alpha_0} (x) ... (x) D_{alpha_{n-1}}).
Matrix product_basis_synthesis(const Vector& coeffs, std::span<const QubitBasis> bases);

/// Letter of qubit q (0 = most significant) in a base-4 string index.
inline int string_letter(std::size_t index, int n, int q) {
  return static_cast<int>((index >> (2 * (n - 1 - q))) & 3u);
}

}  // namespace qsteady

#include "qsteady/densemath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

// Bit position of qubit q in a basis index of an n-qubit register.
inline int bit_of(int n, int q) { return n - 1 - q; }

// Offsets of the 2^k configurations of the support bits, in the local
// ordering (first support site = most significant local bit).
std::vector<std::size_t> support_offsets(const SupportSet& support, int n) {
  const int k = static_cast<int>(support.size());
  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t local = 0; local < offsets.size(); ++local) {
    std::size_t off = 0;
    for (int j = 0; j < k; ++j) {
      if ((local >> (k - 1 - j)) & 1u) off |= std::size_t{1} << bit_of(n, support[static_cast<std::size_t>(j)]);
    }
    offsets[local] = off;
  }
  return offsets;
}

std::vector<std::size_t> base_indices(const SupportSet& support, int n) {
  std::size_t mask = 0;
  for (int s : support) mask |= std::size_t{1} << bit_of(n, s);
  std::vector<std::size_t> bases;
  const std::size_t dim = std::size_t{1} << n;
  bases.reserve(dim >> support.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & mask) == 0) bases.push_back(i);
  }
  return bases;
}

void check_local(const Matrix& local, const SupportSet& support, int n) {
  support.validate(n);
  const auto want = static_cast<Eigen::Index>(std::size_t{1} << support.size());
  if (local.rows() != want || local.cols() != want) {
    std::ostringstream os;
    os << "local operator is " << local.rows() << "x" << local.cols() << " but support has "
       << support.size() << " qubits";
    throw ShapeError(os.str());
  }
}

// Spreads the low 32 bits of x so that bit j lands at bit 2j.
inline std::uint64_t spread_bits(std::uint64_t x) {
  x &= 0xffffffffull;
  x = (x | (x << 16)) & 0x0000ffff0000ffffull;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffull;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

// Applies a 4x4 kernel to base-4 digit `q` (0 = most significant) of a
// length-4^n vector.
void apply_digit_kernel(Vector& v, int n, int q, const Eigen::Matrix4cd& kernel) {
  const std::size_t stride = std::size_t{1} << (2 * (n - 1 - q));
  const std::size_t block = stride * 4;
  const std::size_t total = static_cast<std::size_t>(v.size());
  Complex* data = v.data();
  for (std::size_t hi = 0; hi < total; hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      const std::size_t i0 = hi + lo;
      const Complex x0 = data[i0];
      const Complex x1 = data[i0 + stride];
      const Complex x2 = data[i0 + 2 * stride];
      const Complex x3 = data[i0 + 3 * stride];
      for (int a = 0; a < 4; ++a) {
        data[i0 + static_cast<std::size_t>(a) * stride] =
            kernel(a, 0) * x0 + kernel(a, 1) * x1 + kernel(a, 2) * x2 + kernel(a, 3) * x3;
      }
    }
  }
}

void check_bases(std::span<const QubitBasis> bases, int n) {
  if (static_cast<int>(bases.size()) != n) {
    throw ShapeError("expected " + std::to_string(n) + " per-qubit bases, got " +
                     std::to_string(bases.size()));
  }
}

}  // namespace

int num_qubits(const Matrix& o) {
  if (o.rows() != o.cols() || o.rows() < 2 || !std::has_single_bit(static_cast<std::size_t>(o.rows()))) {
    std::ostringstream os;
    os << "operator of shape " << o.rows() << "x" << o.cols() << " is not a qubit-register operator";
    throw ShapeError(os.str());
  }
  return std::countr_zero(static_cast<std::size_t>(o.rows()));
}

Matrix2 pauli(int letter) {
  Matrix2 m;
  switch (letter) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw ContractError("Pauli letter must be 0..3");
  }
  return m;
}

bool is_hermitian(const Matrix& o, double tol) {
  if (o.rows() != o.cols()) return false;
  return (o - o.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_density(const Matrix& o, double tol) {
  if (!is_hermitian(o, 1e-12)) return false;
  if (std::abs(o.trace() - Complex(1.0)) > tol) return false;
  return hermitian_eigenvalues(o).minCoeff() >= -tol;
}

void require_hermitian(const Matrix& o, const char* where, double tol) {
  if (!is_hermitian(o, tol)) throw ContractError(std::string(where) + ": operator is not Hermitian");
}

void require_density(const Matrix& o, const char* where, double tol) {
  num_qubits(o);
  if (!is_density(o, tol)) throw ContractError(std::string(where) + ": operator is not a density operator");
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix tensor_embed(const Matrix& local, const SupportSet& support, int n) {
  check_local(local, support, n);
  const auto offsets = support_offsets(support, n);
  const auto bases = base_indices(support, n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Matrix out = Matrix::Zero(dim, dim);
  const auto k = offsets.size();
  for (std::size_t base : bases) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < k; ++r) {
        out(static_cast<Eigen::Index>(base | offsets[r]), static_cast<Eigen::Index>(base | offsets[c])) =
            local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return out;
}

Matrix tensor_embed(const LocalOperator& op, int n) { return tensor_embed(op.matrix, op.support, n); }

Matrix partial_trace(const Matrix& o, const SupportSet& keep) {
  const int n = num_qubits(o);
  keep.validate(n);
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (!keep.contains(q)) traced.push_back(q);
  }
  const auto keep_off = support_offsets(keep, n);
  const auto trace_off = support_offsets(SupportSet(traced), n);
  const auto dk = static_cast<Eigen::Index>(keep_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index c = 0; c < dk; ++c) {
    for (Eigen::Index r = 0; r < dk; ++r) {
      Complex acc = 0.0;
      for (std::size_t t : trace_off) {
        acc += o(static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(r)] | t),
                 static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(c)] | t));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Matrix EigenDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

EigenDecomposition hermitian_eigendecompose(const Matrix& o) {
  num_qubits(o);
  const double scale = std::max(1.0, o.cwiseAbs().maxCoeff());
  require_hermitian(o, "hermitian_eigendecompose", 1e-12 * scale);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(o);
  if (solver.info() != Eigen::Success) throw ContractError("Hermitian eigensolver did not converge");
  EigenDecomposition out;
  // Eigen sorts ascending; flip to descending.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

RealVector hermitian_eigenvalues(const Matrix& o) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(o, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ContractError("Hermitian eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

Matrix hermitian_function(const EigenDecomposition& eig, const std::function<double(double)>& f) {
  RealVector fx = eig.eigenvalues.unaryExpr([&](double x) { return f(x); });
  return eig.eigenvectors * fx.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

Matrix hermitian_exp(const Matrix& h) {
  return hermitian_function(hermitian_eigendecompose(h), [](double x) { return std::exp(x); });
}

Matrix matrix_log_full_rank(const Matrix& rho, double floor) {
  if (!(floor > 0.0)) throw ContractError("log floor must be positive");
  const auto eig = hermitian_eigendecompose(rho);
  const double smallest = eig.eigenvalues.minCoeff();
  if (smallest < floor) {
    std::ostringstream os;
    os << "operator is rank deficient: eigenvalue " << smallest << " below floor " << floor;
    throw RankDeficiencyError(os.str(), smallest);
  }
  Matrix out = hermitian_function(eig, [](double x) { return std::log(x); });
  return 0.5 * (out + out.adjoint());
}

double schatten_norm(const Matrix& o, Schatten p) {
  if (p == Schatten::two) return o.norm();
  if (o.size() == 0) return 0.0;
  RealVector sv;
  const double scale = o.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (o.rows() == o.cols() && is_hermitian(o, 1e-14 * scale)) {
    sv = hermitian_eigenvalues(0.5 * (o + o.adjoint())).cwiseAbs();
  } else {
    Eigen::BDCSVD<Matrix> svd(o);
    sv = svd.singularValues();
  }
  return p == Schatten::one ? sv.sum() : sv.maxCoeff();
}

double operator_norm(const Matrix& o) { return schatten_norm(o, Schatten::infinity); }

double trace_distance(const Matrix& a, const Matrix& b) {
  return 0.5 * schatten_norm(a - b, Schatten::one);
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("hs_inner: shape mismatch");
  return (a.adjoint() * b).trace();
}

LocalOperator restrict_to_support(const Matrix& o, double tol) {
  const int n = num_qubits(o);
  std::vector<int> active;
  const double scale = std::max(1.0, o.norm());
  for (int q = 0; q < n; ++q) {
    std::vector<int> rest;
    for (int j = 0; j < n; ++j) {
      if (j != q) rest.push_back(j);
    }
    const SupportSet rest_set(rest);
    Matrix trivial = tensor_embed(0.5 * partial_trace(o, rest_set), rest_set, n);
    if ((trivial - o).norm() > tol * scale) active.push_back(q);
  }
  SupportSet support(active);
  const double norm_factor = std::ldexp(1.0, -(n - static_cast<int>(support.size())));
  return {support, norm_factor * partial_trace(o, support)};
}

void apply_local_left(Matrix& target, const Matrix& local, const SupportSet& support) {
  const int n = num_qubits(target);
  check_local(local, support, n);
  const auto offsets = support_offsets(support, n);
  const auto bases = base_indices(support, n);
  const std::size_t k = offsets.size();
  std::vector<Complex> in(k);
  for (Eigen::Index c = 0; c < target.cols(); ++c) {
    Complex* col = target.col(c).data();
    for (std::size_t base : bases) {
      for (std::size_t a = 0; a < k; ++a) in[a] = col[base | offsets[a]];
      for (std::size_t a = 0; a < k; ++a) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
          acc += local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * in[b];
        }
        col[base | offsets[a]] = acc;
      }
    }
  }
}

void apply_local_right_adjoint(Matrix& target, const Matrix& local, const SupportSet& support) {
  const int n = num_qubits(target);
  check_local(local, support, n);
  const auto offsets = support_offsets(support, n);
  const auto bases = base_indices(support, n);
  const std::size_t k = offsets.size();
  const Matrix conj = local.conjugate();
  Matrix block(target.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t base : bases) {
    for (std::size_t b = 0; b < k; ++b) {
      block.col(static_cast<Eigen::Index>(b)) = target.col(static_cast<Eigen::Index>(base | offsets[b]));
    }
    // (T L^dagger)[:, a] = sum_b T[:, b] conj(L[a, b])
    for (std::size_t a = 0; a < k; ++a) {
      auto col = target.col(static_cast<Eigen::Index>(base | offsets[a]));
      col.setZero();
      for (std::size_t b = 0; b < k; ++b) {
        const Complex w = conj(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (w != Complex(0.0)) col += w * block.col(static_cast<Eigen::Index>(b));
      }
    }
  }
}

Vector product_basis_analysis(const Matrix& a, std::span<const QubitBasis> bases) {
  const int n = num_qubits(a);
  check_bases(bases, n);
  const std::size_t dim = std::size_t{1} << n;
  Vector t(static_cast<Eigen::Index>(dim * dim));
  for (std::size_t c = 0; c < dim; ++c) {
    const std::uint64_t sc = spread_bits(c);
    for (std::size_t r = 0; r < dim; ++r) {
      t[static_cast<Eigen::Index>((spread_bits(r) << 1) | sc)] =
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  for (int q = 0; q < n; ++q) {
    // Tr(B A) = sum_{r,c} B[c, r] A[r, c]; digit p = 2 r + c.
    Eigen::Matrix4cd kernel;
    for (int letter = 0; letter < 4; ++letter) {
      for (int p = 0; p < 4; ++p) {
        kernel(letter, p) = bases[static_cast<std::size_t>(q)][static_cast<std::size_t>(letter)](p & 1, p >> 1);
      }
    }
    apply_digit_kernel(t, n, q, kernel);
  }
  return t;
}

Matrix product_basis_synthesis(const Vector& coeffs, std::span<const QubitBasis> bases) {
  const auto total = static_cast<std::size_t>(coeffs.size());
  if (total < 4 || !std::has_single_bit(total) || (std::countr_zero(total) % 2) != 0) {
    throw ShapeError("coefficient vector length is not a power of four");
  }
  const int n = std::countr_zero(total) / 2;
  check_bases(bases, n);
  Vector t = coeffs;
  for (int q = 0; q < n; ++q) {
    Eigen::Matrix4cd kernel;
    for (int p = 0; p < 4; ++p) {
      for (int letter = 0; letter < 4; ++letter) {
        kernel(p, letter) = bases[static_cast<std::size_t>(q)][static_cast<std::size_t>(letter)](p >> 1, p & 1);
      }
    }
    apply_digit_kernel(t, n, q, kernel);
  }
  const std::size_t dim = std::size_t{1} << n;
  Matrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    const std::uint64_t sc = spread_bits(c);
    for (std::size_t r = 0; r < dim; ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          t[static_cast<Eigen::Index>((spread_bits(r) << 1) | sc)];
    }
  }
  return out;
}

}  // namespace qsteady

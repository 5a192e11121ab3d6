#include "qsteady/steady.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

using LongComplex = std::complex<long double>;

Matrix hermitize(const Matrix& x) { return 0.5 * (x + x.adjoint()); }

// Unit trace, Hermitian, eigenvalues clipped at zero only when one is
// below -1e-12.
Matrix finalize_state(const Matrix& rho) {
  Matrix out = hermitize(rho);
  out /= out.trace().real();
  const RealVector ev = hermitian_eigenvalues(out);
  if (ev.minCoeff() < -1e-12) {
    auto eig = hermitian_eigendecompose(out);
    out = hermitian_function(eig, [](double x) { return std::max(x, 0.0); });
    out = hermitize(out);
    out /= out.trace().real();
  }
  return out;
}

void require_small(int n, int limit, const char* what) {
  if (n > limit) {
    std::ostringstream os;
    os << what << " supports n <= " << limit << ", got n = " << n;
    throw UnsupportedError(os.str());
  }
}

// b - A x with the products accumulated in long double.
Vector extended_residual(const Matrix& a, const Eigen::Matrix<LongComplex, Eigen::Dynamic, 1>& x,
                         const Vector& b) {
  const Eigen::Index m = a.rows();
  Eigen::Matrix<LongComplex, Eigen::Dynamic, 1> acc(m);
  for (Eigen::Index i = 0; i < m; ++i) acc[i] = LongComplex(b[i].real(), b[i].imag());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const LongComplex xj = x[j];
    const Complex* col = a.col(j).data();
    for (Eigen::Index i = 0; i < m; ++i) {
      acc[i] -= LongComplex(col[i].real(), col[i].imag()) * xj;
    }
  }
  Vector r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    r[i] = Complex(static_cast<double>(acc[i].real()), static_cast<double>(acc[i].imag()));
  }
  return r;
}

struct BorderedSolve {
  Vector solution;
  double sigma_min_estimate = 0.0;
};

// Solves (M - 1) v = 0, Tr v = 1 with the (0,0) row replaced by the trace
// row. Diagonal rows of M - 1 sum to zero, so the replacement loses nothing.
BorderedSolve solve_bordered(Matrix a, Eigen::Index dim, bool estimate_sigma) {
  a.row(0).setZero();
  for (Eigen::Index i = 0; i < dim; ++i) a(0, i + i * dim) = 1.0;
  Vector b = Vector::Zero(a.rows());
  b[0] = 1.0;

  Eigen::PartialPivLU<Matrix> lu(a);
  Vector x = lu.solve(b);
  Eigen::Matrix<LongComplex, Eigen::Dynamic, 1> xl(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) xl[i] = LongComplex(x[i].real(), x[i].imag());
  // Two rounds of refinement with extended-precision residuals.
  for (int round = 0; round < 2; ++round) {
    const Vector dx = lu.solve(extended_residual(a, xl, b));
    for (Eigen::Index i = 0; i < x.size(); ++i) xl[i] += LongComplex(dx[i].real(), dx[i].imag());
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = Complex(static_cast<double>(xl[i].real()), static_cast<double>(xl[i].imag()));
  }

  BorderedSolve out{x, 0.0};
  if (!x.allFinite()) return out;
  if (estimate_sigma) {
    // Inverse iteration on (A^dagger A)^{-1}. A^dagger = U^dagger L^dagger P
    // is solved through the factors; Eigen's generic adjoint solve is slow.
    Vector v = Vector::Ones(a.rows()).normalized();
    double growth = 0.0;
    for (int it = 0; it < 12; ++it) {
      Vector w = lu.matrixLU().triangularView<Eigen::Upper>().adjoint().solve(lu.solve(v));
      w = lu.matrixLU().triangularView<Eigen::UnitLower>().adjoint().solve(w);
      w = lu.permutationP().transpose() * w;
      growth = w.norm();
      if (!std::isfinite(growth) || growth == 0.0) break;
      v = w / growth;
    }
    out.sigma_min_estimate = (std::isfinite(growth) && growth > 0.0) ? 1.0 / std::sqrt(growth) : 0.0;
  } else {
    out.sigma_min_estimate = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace

double hermitian_trace_norm(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

Matrix zero_state(int n) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Matrix rho = Matrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return rho;
}

Matrix maximally_mixed(int n) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  return Matrix::Identity(dim, dim) / static_cast<double>(dim);
}

FixedPointResult iterate_fixed_point(const EpsilonChannel& channel, const Matrix& rho_init,
                                     const IterationOptions& options) {
  require_density(rho_init, "iterate_fixed_point");
  if (!(options.tol > 0.0)) throw ContractError("iterate_fixed_point: tol must be positive");
  if (options.max_iter < 1) throw ContractError("iterate_fixed_point: max_iter must be positive");
  const int n = channel.num_qubits();
  if (num_qubits(rho_init) != n) throw ShapeError("iterate_fixed_point: initial state has the wrong size");

  FixedPointResult result;
  auto& rec = result.record;
  rec.residual_stride = options.residual_stride > 0 ? options.residual_stride : (n <= 8 ? 1 : 10);
  const int herm_every = std::max(1, options.hermitize_every);

  Matrix rho = rho_init;
  Matrix best = rho_init;
  double best_residual = std::numeric_limits<double>::infinity();
  Matrix next;
  for (int it = 0; it < options.max_iter; ++it) {
    next = channel.apply(rho);
    const bool checkpoint = (it % rec.residual_stride == 0) || it + 1 == options.max_iter;
    if (checkpoint) {
      const double residual = hermitian_trace_norm(rho - next);
      rec.residual_history.emplace_back(it, residual);
      if (residual < best_residual) {
        best_residual = residual;
        best = rho;
      }
      if (residual <= options.tol) {
        rec.iterations = it;
        rec.converged = true;
        break;
      }
    }
    rho.swap(next);
    if ((it + 1) % herm_every == 0) rho = hermitize(rho);
    rec.iterations = it + 1;
  }

  result.rho = finalize_state(rec.converged ? rho : best);
  rec.final_residual = hermitian_trace_norm(result.rho - channel.apply(result.rho));
  rec.converged = rec.final_residual <= options.tol;
  return result;
}

Matrix superoperator_matrix(const EpsilonChannel& channel) {
  const int n = channel.num_qubits();
  require_small(n, 6, "superoperator_matrix");
  const std::size_t dim = std::size_t{1} << n;
  const auto big = static_cast<Eigen::Index>(dim * dim);
  Matrix m = Matrix::Zero(big, big);
  // Each local term maps |r><c| to sum_k F_k|r><c|F_k^dagger, which only
  // touches rows and columns differing from (r, c) on the term's support.
  for (const auto& term : channel.terms()) {
    const KrausChannel& ch = *term.channel;
    const std::size_t ds = std::size_t{1} << ch.support.size();
    std::vector<std::size_t> bit_of_local(ch.support.size());
    for (std::size_t j = 0; j < ch.support.size(); ++j) {
      bit_of_local[j] = std::size_t{1} << (n - 1 - ch.support[j]);
    }
    std::vector<std::size_t> offset(ds, 0);  // register bits of a local index
    std::size_t support_bits = 0;
    for (std::size_t a = 0; a < ds; ++a) {
      for (std::size_t j = 0; j < ch.support.size(); ++j) {
        if ((a >> (ch.support.size() - 1 - j)) & 1u) offset[a] |= bit_of_local[j];
      }
      support_bits |= offset[a];
    }
    std::vector<std::size_t> local_of(dim);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t a = 0; a < ds; ++a) {
        if ((r & support_bits) == offset[a]) local_of[r] = a;
      }
    }
    for (const auto& f : ch.kraus_ops) {
      for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t c0 = c & ~support_bits;
        const auto lc = static_cast<Eigen::Index>(local_of[c]);
        for (std::size_t r = 0; r < dim; ++r) {
          const std::size_t r0 = r & ~support_bits;
          const auto lr = static_cast<Eigen::Index>(local_of[r]);
          auto col = m.col(static_cast<Eigen::Index>(r + c * dim));
          for (std::size_t b = 0; b < ds; ++b) {
            const Complex fb = term.weight * std::conj(f(static_cast<Eigen::Index>(b), lc));
            if (fb == Complex(0.0)) continue;
            const std::size_t cc = (c0 | offset[b]) * dim;
            for (std::size_t a = 0; a < ds; ++a) {
              col[static_cast<Eigen::Index>((r0 | offset[a]) + cc)] += f(static_cast<Eigen::Index>(a), lr) * fb;
            }
          }
        }
      }
    }
  }
  return m;
}

Matrix dense_fixed_point_oracle(const EpsilonChannel& channel) {
  const int n = channel.num_qubits();
  require_small(n, 6, "dense_fixed_point_oracle");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Matrix a = superoperator_matrix(channel);
  a.diagonal().array() -= 1.0;

  if (n <= 5) {
    Eigen::BDCSVD<Matrix> svd(a);
    const RealVector& sv = svd.singularValues();
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] < kNullTolerance) ++null_dim;
    }
    if (null_dim != 1) {
      std::ostringstream os;
      os << "fixed point is not unique: M - 1 has " << null_dim << " singular values below "
         << kNullTolerance;
      throw DegeneracyError(os.str(), null_dim);
    }
  }

  const BorderedSolve solve = solve_bordered(std::move(a), dim, n > 5);
  if (!solve.solution.allFinite() || solve.sigma_min_estimate < kNullTolerance) {
    std::ostringstream os;
    os << "fixed point is not unique: trace-bordered system is singular (sigma_min ~ "
       << solve.sigma_min_estimate << ")";
    throw DegeneracyError(os.str(), -1);
  }
  const Matrix rho = Eigen::Map<const Matrix>(solve.solution.data(), dim, dim);
  Matrix out = hermitize(rho);
  return out / out.trace().real();
}

SpectrumReport superoperator_spectrum(const EpsilonChannel& channel) {
  require_small(channel.num_qubits(), 5, "superoperator_spectrum");
  Eigen::ComplexEigenSolver<Matrix> es(superoperator_matrix(channel), false);
  SpectrumReport report;
  const auto& ev = es.eigenvalues();
  report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(report.eigenvalues.begin(), report.eigenvalues.end(),
                   [](const Complex& x, const Complex& y) { return std::abs(x) > std::abs(y); });
  report.spectral_radius = std::abs(report.eigenvalues.front());
  report.gap = report.eigenvalues.size() > 1 ? 1.0 - std::abs(report.eigenvalues[1]) : 1.0;
  for (const auto& z : report.eigenvalues) {
    if (std::abs(std::abs(z) - 1.0) <= kNullTolerance) ++report.peripheral_count;
  }
  return report;
}

DualInitReport dual_init_probe(const EpsilonChannel& channel, const IterationOptions& options) {
  const int n = channel.num_qubits();
  DualInitReport report;
  report.from_zero = iterate_fixed_point(channel, zero_state(n), options);
  report.from_mixed = iterate_fixed_point(channel, maximally_mixed(n), options);
  report.trace_distance = trace_distance(report.from_zero.rho, report.from_mixed.rho);
  return report;
}

}  // namespace qsteady

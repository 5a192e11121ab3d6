#pragma once

#include <utility>
#include <vector>

#include "qsteady/channel.hpp"
#include "qsteady/densemath.hpp"

namespace qsteady {

struct ConvergenceRecord {
  int iterations = 0;
  /// (iteration, ||rho_t - E(rho_t)||_1) at every residual checkpoint.
  std::vector<std::pair<int, double>> residual_history;
  bool converged = false;
  /// Residual of the returned state, measured after normalization.
  double final_residual = 0.0;
  /// Iterations between residual checkpoints.
  int residual_stride = 1;
};

struct IterationOptions {
  double tol = 1e-8;
  int max_iter = 200000;
  /// 0 picks 1 for n <= 8 and 10 above.
  int residual_stride = 0;
  int hermitize_every = 100;
};

struct FixedPointResult {
  Matrix rho;
  ConvergenceRecord record;
};

/// Plain power iteration rho <- E(rho). The returned state is renormalized
/// to unit trace and Hermitized; eigenvalues are clipped at zero only when
/// one falls below -1e-12. When the tolerance is not met within max_iter the
/// iterate with the smallest measured residual is returned.
FixedPointResult iterate_fixed_point(const EpsilonChannel& channel, const Matrix& rho_init,
                                     const IterationOptions& options = {});

/// ||x||_1 for an (approximately) Hermitian x, via its eigenvalues.
double hermitian_trace_norm(const Matrix& x);

/// 4^n x 4^n matrix of the channel acting on column-major vec(rho).
/// Refuses n > 6.
Matrix superoperator_matrix(const EpsilonChannel& channel);

/// Singular values of M - 1 below this count as zero.
inline constexpr double kNullTolerance = 1e-9;

/// Unique fixed point from the null space of M - 1. For n <= 5 the null
/// dimension is read off the singular values; for n = 6 the trace-bordered
/// system is solved by LU and its smallest singular value is estimated by
/// inverse iteration. Throws DegeneracyError when the fixed point is not
/// unique and UnsupportedError for n > 6.
Matrix dense_fixed_point_oracle(const EpsilonChannel& channel);

struct SpectrumReport {
  std::vector<Complex> eigenvalues;  // by modulus, descending
  double spectral_radius = 0.0;
  /// 1 - |lambda_2|.
  double gap = 0.0;
  /// Eigenvalues with modulus within 1e-9 of one.
  int peripheral_count = 0;
};

/// Full superoperator spectrum, n <= 5.
SpectrumReport superoperator_spectrum(const EpsilonChannel& channel);

struct DualInitReport {
  FixedPointResult from_zero;
  FixedPointResult from_mixed;
  double trace_distance = 0.0;
};

/// Runs the iteration from |0...0><0...0| and from 1/2^n. A large distance
/// between the two limits witnesses a non-unique steady state.
DualInitReport dual_init_probe(const EpsilonChannel& channel, const IterationOptions& options = {});

/// |0...0><0...0| on n qubits.
Matrix zero_state(int n);
Matrix maximally_mixed(int n);

}  // namespace qsteady

// Eigenvalues of a sparse real matrix closest to a shift, by shift-invert
// Krylov-Schur iteration, with a dense fallback for small problems.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace turing {

struct EigsSettings {
  int n_eigs{10};
  double shift{1e-3};
  int krylov_dim{0};  // 0: max(2 n_eigs + 20, 40)
  int max_restarts{300};
  double tol{1e-10};
  int dense_limit{400};
};

struct EigsResult {
  Eigen::VectorXcd values;   // sorted by distance to the shift
  Eigen::MatrixXcd vectors;  // columns, only if requested
  double shift{0};
  int restarts{0};
  bool converged{false};
};

/// The n_eigs eigenvalues of a nearest to settings.shift. If the shifted
/// matrix is singular the shift is perturbed and the attempt repeated.
EigsResult eigs_near_shift(const Eigen::SparseMatrix<double>& a, const EigsSettings& settings,
                           bool want_vectors = false);

/// Number of eigenvalues with positive real part among the given values.
int count_unstable(const Eigen::VectorXcd& values, double threshold = 0.0);

}  // namespace turing

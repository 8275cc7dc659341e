#include "turing/eigs.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace turing {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Orders eigenvalues of the shifted problem by distance to the shift.
std::vector<Index> order_by_distance(const VectorXcd& mu, double shift) {
  std::vector<Index> idx(mu.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return std::abs(mu(a) - shift) < std::abs(mu(b) - shift);
  });
  return idx;
}

EigsResult dense_eigs(const Eigen::SparseMatrix<double>& a, const EigsSettings& s,
                      bool want_vectors) {
  const MatrixXd dense(a);
  Eigen::EigenSolver<MatrixXd> es(dense, want_vectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigs: dense eigensolver failed");
  const VectorXcd mu = es.eigenvalues();
  const auto idx = order_by_distance(mu, s.shift);
  const Index k = std::min<Index>(s.n_eigs, mu.size());
  EigsResult r;
  r.values.resize(k);
  if (want_vectors) r.vectors.resize(dense.rows(), k);
  for (Index i = 0; i < k; ++i) {
    r.values(i) = mu(idx[i]);
    if (want_vectors) r.vectors.col(i) = es.eigenvectors().col(idx[i]);
  }
  r.shift = s.shift;
  r.converged = true;
  return r;
}

// Gram-Schmidt with one reorthogonalization pass; returns the coefficients.
VectorXd orthogonalize(const MatrixXd& v, Index m, VectorXd& w) {
  VectorXd h = v.leftCols(m).transpose() * w;
  w -= v.leftCols(m) * h;
  const VectorXd h2 = v.leftCols(m).transpose() * w;
  w -= v.leftCols(m) * h2;
  return h + h2;
}

// Picks the wanted Ritz values (largest |theta|) and keeps conjugate pairs together.
std::vector<Index> wanted_ritz(const VectorXcd& theta, Index count) {
  std::vector<Index> idx(theta.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });
  std::vector<Index> out;
  std::vector<bool> used(theta.size(), false);
  for (Index i : idx) {
    if (static_cast<Index>(out.size()) >= count) break;
    if (used[i]) continue;
    used[i] = true;
    out.push_back(i);
    if (std::abs(theta(i).imag()) > 0) {
      // find its conjugate partner
      Index best = -1;
      double dist = INFINITY;
      for (Index j = 0; j < theta.size(); ++j) {
        if (used[j]) continue;
        const double dj = std::abs(theta(j) - std::conj(theta(i)));
        if (dj < dist) {
          dist = dj;
          best = j;
        }
      }
      if (best >= 0) {
        used[best] = true;
        out.push_back(best);
      }
    }
  }
  return out;
}

}  // namespace

int count_unstable(const Eigen::VectorXcd& values, double threshold) {
  int c = 0;
  for (Index i = 0; i < values.size(); ++i) c += values(i).real() > threshold ? 1 : 0;
  return c;
}

EigsResult eigs_near_shift(const Eigen::SparseMatrix<double>& a, const EigsSettings& settings,
                           bool want_vectors) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigs: matrix must be square");
  if (settings.n_eigs < 1) throw std::invalid_argument("eigs: n_eigs must be >= 1");
  const Index n = a.rows();
  if (n < settings.dense_limit || n <= settings.n_eigs + 2) {
    return dense_eigs(a, settings, want_vectors);
  }

  double shift = settings.shift;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SparseMatrix<double> id(n, n);
  id.setIdentity();
  for (int attempt = 0;; ++attempt) {
    lu.compute(a - shift * id);
    if (lu.info() == Eigen::Success) break;
    if (attempt >= 3) throw std::runtime_error("eigs: shifted matrix is singular");
    shift = shift * 3.7 + 1e-4;
  }

  const Index nev = std::min<Index>(settings.n_eigs, n - 2);
  Index m = settings.krylov_dim > 0 ? settings.krylov_dim : std::max<Index>(2 * nev + 20, 40);
  m = std::min<Index>(m, n - 1);
  const Index keep = std::min<Index>(m - 2, nev + (m - nev) / 2);

  MatrixXd v = MatrixXd::Zero(n, m + 1);
  MatrixXd g = MatrixXd::Zero(m + 1, m);
  // deterministic start vector
  VectorXd v0(n);
  for (Index i = 0; i < n; ++i) v0(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  v.col(0) = v0.normalized();
  Index k = 0;  // number of locked-in Schur-like columns

  EigsResult result;
  result.shift = shift;
  VectorXcd theta;
  MatrixXcd y;
  for (int restart = 0; restart <= settings.max_restarts; ++restart) {
    result.restarts = restart;
    for (Index j = k; j < m; ++j) {
      VectorXd w = lu.solve(v.col(j));
      const VectorXd h = orthogonalize(v, j + 1, w);
      g.block(0, j, j + 1, 1) = h;
      double beta = w.norm();
      if (beta < 1e-14 * h.norm()) {
        // invariant subspace found: continue with a fresh orthogonal direction
        VectorXd r(n);
        for (Index i = 0; i < n; ++i) r(i) = std::cos(1.3 * static_cast<double>(i + j));
        orthogonalize(v, j + 1, r);
        w = r;
        beta = 0;
        w.normalize();
      } else {
        w /= beta;
      }
      g(j + 1, j) = beta;
      v.col(j + 1) = w;
    }

    const MatrixXd gm = g.topRows(m);
    Eigen::EigenSolver<MatrixXd> es(gm, true);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigs: projected eigenproblem failed");
    theta = es.eigenvalues();
    y = es.eigenvectors();

    const auto want = wanted_ritz(theta, nev);
    const Eigen::RowVectorXd last = g.row(m);
    bool done = true;
    for (Index t = 0; t < std::min<Index>(nev, static_cast<Index>(want.size())); ++t) {
      const Index i = want[t];
      const double res = std::abs((last.cast<std::complex<double>>() * y.col(i))(0));
      if (res > settings.tol * std::abs(theta(i))) {
        done = false;
        break;
      }
    }
    if (done || restart == settings.max_restarts) {
      result.converged = done;
      const Index count = std::min<Index>(nev, static_cast<Index>(want.size()));
      VectorXcd mu(count);
      MatrixXcd vecs;
      if (want_vectors) vecs.resize(n, count);
      for (Index t = 0; t < count; ++t) {
        const Index i = want[t];
        mu(t) = shift + 1.0 / theta(i);
        if (want_vectors) {
          VectorXcd x = v.leftCols(m).cast<std::complex<double>>() * y.col(i);
          vecs.col(t) = x / x.norm();
        }
      }
      const auto idx = order_by_distance(mu, settings.shift);
      result.values.resize(count);
      if (want_vectors) result.vectors.resize(n, count);
      for (Index t = 0; t < count; ++t) {
        result.values(t) = mu(idx[t]);
        if (want_vectors) result.vectors.col(t) = vecs.col(idx[t]);
      }
      return result;
    }

    // thick restart on the real invariant subspace of the kept Ritz vectors
    const auto kept = wanted_ritz(theta, keep);
    MatrixXd basis(m, static_cast<Index>(kept.size()));
    Index c = 0;
    for (std::size_t t = 0; t < kept.size(); ++t) {
      const Index i = kept[t];
      if (std::abs(theta(i).imag()) > 0) {
        if (t + 1 < kept.size() && std::abs(theta(kept[t + 1]) - std::conj(theta(i))) <
                                       1e-10 * std::abs(theta(i))) {
          basis.col(c++) = y.col(i).real();
          basis.col(c++) = y.col(i).imag();
          ++t;
          continue;
        }
      }
      basis.col(c++) = y.col(i).real();
    }
    basis.conservativeResize(m, c);
    Eigen::HouseholderQR<MatrixXd> qr(basis);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(m, c);
    const MatrixXd mnew = q.transpose() * gm * q;
    const double drift = (gm * q - q * mnew).norm();
    if (drift > 1e-8 * gm.norm()) {
      // the kept subspace is not invariant enough; restart from a single vector
      VectorXd start = v.leftCols(m) * q.rowwise().sum();
      v.setZero();
      g.setZero();
      v.col(0) = start.normalized();
      k = 0;
      continue;
    }
    MatrixXd vnew(n, m + 1);
    vnew.leftCols(c) = v.leftCols(m) * q;
    vnew.col(c) = v.col(m);
    v.setZero();
    v.leftCols(c + 1) = vnew.leftCols(c + 1);
    const Eigen::RowVectorXd b = last * q;
    g.setZero();
    g.topLeftCorner(c, c) = mnew;
    g.block(c, 0, 1, c) = b;
    k = c;
  }
  return result;
}

}  // namespace turing

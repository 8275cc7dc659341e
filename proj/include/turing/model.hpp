// Selkov-Schnakenberg reaction kinetics (a = b = 0) with the optional
// sigma-modification sigma * (u - 1/v)^2 * (1, -1), its Taylor forms at the
// homogeneous state, and the linear dispersion relation.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace turing {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar = double>
struct ModelParams {
  Scalar lambda{1};
  Scalar d{60};
  Scalar sigma{0};

  ModelParams with_lambda(Scalar l) const {
    ModelParams q = *this;
    q.lambda = l;
    return q;
  }
};

/// Real parts of the eigenvalues of the dispersion matrix at wavenumber k.
struct DispersionResult {
  double k{0};
  double mu_plus{0};
  double mu_minus{0};
  bool is_complex{false};
};

struct CriticalValues {
  double lambda_c{0};
  double k_c{0};
};

inline void require_valid(const ModelParams<double>& p) {
  if (!(p.lambda > 0) || !(p.d > 0) || !std::isfinite(p.sigma)) {
    throw std::invalid_argument("model parameters need lambda > 0, d > 0 and finite sigma");
  }
}

/// w* = (lambda, 1/lambda); the sigma term vanishes there for every sigma.
template <typename Scalar>
Vec2<Scalar> homogeneous_state(const ModelParams<Scalar>& p) {
  return Vec2<Scalar>(p.lambda, Scalar(1) / p.lambda);
}

template <typename Scalar>
Vec2<Scalar> reaction(const ModelParams<Scalar>& p, const Vec2<Scalar>& w) {
  using std::abs;
  const Scalar u = w(0);
  const Scalar v = w(1);
  const Scalar u2v = u * u * v;
  Vec2<Scalar> n(-u + u2v, p.lambda - u2v);
  if (p.sigma != Scalar(0)) {
    if (v == Scalar(0)) throw std::domain_error("reaction: v = 0 with sigma != 0");
    const Scalar g = u - Scalar(1) / v;
    n(0) += p.sigma * g * g;
    n(1) -= p.sigma * g * g;
  }
  return n;
}

template <typename Scalar>
Mat2<Scalar> reaction_jacobian(const ModelParams<Scalar>& p, const Vec2<Scalar>& w) {
  const Scalar u = w(0);
  const Scalar v = w(1);
  Mat2<Scalar> j;
  j << Scalar(-1) + Scalar(2) * u * v, u * u,
       Scalar(-2) * u * v, -u * u;
  if (p.sigma != Scalar(0)) {
    if (v == Scalar(0)) throw std::domain_error("reaction_jacobian: v = 0 with sigma != 0");
    const Scalar g = u - Scalar(1) / v;
    const Scalar du = Scalar(2) * p.sigma * g;
    const Scalar dv = Scalar(2) * p.sigma * g / (v * v);
    j(0, 0) += du;
    j(0, 1) += dv;
    j(1, 0) -= du;
    j(1, 1) -= dv;
  }
  return j;
}

/// Symmetric bilinear form B with G(w) = B(w,w) + C(w,w,w) + O(|w|^4), where
/// G(w) = N(w* + w) - J w. Every term of the quadratic part points along (1,-1).
template <typename Scalar>
Vec2<Scalar> bilinear_B(const ModelParams<Scalar>& p, const Vec2<Scalar>& a,
                        const Vec2<Scalar>& b) {
  const Scalar l = p.lambda;
  const Scalar l2 = l * l;
  const Scalar q = a(0) * b(0) / l + l * (a(0) * b(1) + a(1) * b(0)) +
                   p.sigma * (a(0) + l2 * a(1)) * (b(0) + l2 * b(1));
  return Vec2<Scalar>(q, -q);
}

/// Symmetric trilinear form C. The sigma part comes from expanding
/// 1/v = lambda - lambda^2 w2 + lambda^3 w2^2 - ... to cubic order.
template <typename Scalar>
Vec2<Scalar> trilinear_C(const ModelParams<Scalar>& p, const Vec2<Scalar>& a,
                         const Vec2<Scalar>& b, const Vec2<Scalar>& c) {
  const Scalar l = p.lambda;
  const Scalar third = Scalar(1) / Scalar(3);
  // polarizations of w1^2 w2, w1 w2^2 and w2^3
  const Scalar u2v = third * (a(0) * b(0) * c(1) + a(0) * c(0) * b(1) + b(0) * c(0) * a(1));
  const Scalar uv2 = third * (a(0) * b(1) * c(1) + b(0) * a(1) * c(1) + c(0) * a(1) * b(1));
  const Scalar v3 = a(1) * b(1) * c(1);
  const Scalar q = u2v - Scalar(2) * p.sigma * l * l * l * (uv2 + l * l * v3);
  return Vec2<Scalar>(q, -q);
}

/// L(k) = J(w*) - diag(1, d) k^2.
template <typename Scalar>
Mat2<Scalar> dispersion_matrix(const ModelParams<Scalar>& p, Scalar k) {
  Mat2<Scalar> l = reaction_jacobian(p, homogeneous_state(p));
  l(0, 0) -= k * k;
  l(1, 1) -= p.d * k * k;
  return l;
}

template <typename Scalar>
DispersionResult dispersion(const ModelParams<Scalar>& p, Scalar k) {
  const Mat2<Scalar> l = dispersion_matrix(p, k);
  const double half_tr = 0.5 * double(l.trace());
  const double det = double(l.determinant());
  const double disc = half_tr * half_tr - det;
  DispersionResult r;
  r.k = double(k);
  if (disc >= 0) {
    const double root = std::sqrt(disc);
    r.mu_plus = half_tr + root;
    r.mu_minus = half_tr - root;
  } else {
    r.mu_plus = r.mu_minus = half_tr;
    r.is_complex = true;
  }
  return r;
}

template <typename Scalar>
double mu_plus(const ModelParams<Scalar>& p, Scalar k) {
  return dispersion(p, k).mu_plus;
}

/// Closed-form Turing point for a = b = 0:
/// lambda_c = sqrt(d) sqrt(3 - sqrt 8), k_c = sqrt(sqrt 2 - 1).
inline CriticalValues critical_values(double d) {
  if (!(d > 0)) throw std::invalid_argument("critical_values: d must be positive");
  return {std::sqrt(d) * std::sqrt(3.0 - std::sqrt(8.0)), std::sqrt(std::numbers::sqrt2 - 1.0)};
}

}  // namespace turing

#include "turing/amplitude.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace turing {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;
using Eigen::VectorXd;

Vec2<double> solve_checked(const Mat2<double>& m, const Vec2<double>& rhs, double k) {
  const double det = m.determinant();
  if (std::abs(det) < 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff())) {
    throw std::domain_error("correctors: dispersion matrix singular at k = " + std::to_string(k));
  }
  return m.partialPivLu().solve(rhs);
}

// Self-interaction of the mixed system: g(a) = a^3 (c3 (a-H)/(S-H) + c31 (a-S)/(H-S)).
struct MixedSelf {
  double c3;
  double c31;
  double s;
  double h;

  double value(double a) const {
    return a * a * a * (c3 * (a - h) / (s - h) + c31 * (a - s) / (h - s));
  }
  double derivative(double a) const {
    return 3 * a * a * (c3 * (a - h) / (s - h) + c31 * (a - s) / (h - s)) +
           a * a * a * (c3 / (s - h) + c31 / (h - s));
  }
  // antiderivative: a^4 (c3 (a/5 - H/4)/(S-H) + c31 (a/5 - S/4)/(H-S))
  double energy(double a) const {
    const double a4 = a * a * a * a;
    return a4 * (c3 * (a / 5 - h / 4) / (s - h) + c31 * (a / 5 - s / 4) / (h - s));
  }
};

MixedSelf mixed_self(const LandauCoeffs& c) {
  double s = 0;
  double h = 0;
  mixed_amplitudes(c, s, h);
  return MixedSelf{c.c3, c.c31, s, h};
}

Matrix3d mixed_jacobian(const LandauCoeffs& c, const AmplitudeState& a) {
  const MixedSelf g = mixed_self(c);
  Matrix3d j;
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3;
    const int q = (i + 2) % 3;
    j(i, i) = c.c1 + g.derivative(a(i)) + c.c41 * (a(p) * a(p) + a(q) * a(q));
    j(i, p) = c.c2 * a(q) + 2 * c.c41 * a(i) * a(p);
    j(i, q) = c.c2 * a(p) + 2 * c.c41 * a(i) * a(q);
  }
  return j;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double flo,
              double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CriticalModes critical_modes(const ModelParams<double>& p) {
  require_valid(p);
  const double kc = critical_values(p.d).k_c;
  const Mat2<double> l = dispersion_matrix(p, kc);
  const DispersionResult dr = dispersion(p, kc);
  if (dr.is_complex) throw std::domain_error("critical_modes: complex eigenvalues at k_c");
  CriticalModes cm;
  cm.k_c = kc;
  cm.mu = dr.mu_plus;
  cm.phi = Vec2<double>(1.0, (cm.mu - l(0, 0)) / l(0, 1));
  cm.phi_star = Vec2<double>(l(1, 0), cm.mu - l(0, 0));
  cm.phi_star /= cm.phi.dot(cm.phi_star);
  return cm;
}

Correctors correctors(const ModelParams<double>& p) {
  const CriticalModes cm = critical_modes(p);
  const Vec2<double> b = bilinear_B(p, cm.phi, cm.phi);
  const double k0 = 0.0;
  const double k1 = 2.0 * cm.k_c;
  const double k2 = std::sqrt(3.0) * cm.k_c;
  Correctors c;
  c.phi0 = -2.0 * solve_checked(dispersion_matrix(p, k0), b, k0);
  c.phi1 = -solve_checked(dispersion_matrix(p, k1), b, k1);
  c.phi2 = -2.0 * solve_checked(dispersion_matrix(p, k2), b, k2);
  return c;
}

LandauCoeffs landau_coefficients(const ModelParams<double>& p) {
  const CriticalModes cm = critical_modes(p);
  const Correctors cr = correctors(p);
  const Vec2<double>& phi = cm.phi;
  const Vec2<double>& ps = cm.phi_star;
  const Vec2<double> ccc = trilinear_C(p, phi, phi, phi);
  LandauCoeffs c;
  c.lambda = p.lambda;
  c.sigma = p.sigma;
  c.c1 = cm.mu;
  c.c2 = 2.0 * bilinear_B(p, phi, phi).dot(ps);
  c.c3 = (3.0 * ccc + 2.0 * bilinear_B(p, phi, cr.phi1) + 2.0 * bilinear_B(p, phi, cr.phi0)).dot(ps);
  c.c4 = (6.0 * ccc + 2.0 * bilinear_B(p, phi, cr.phi2) + 2.0 * bilinear_B(p, phi, cr.phi0)).dot(ps);
  c.c31 = 3.0 * ccc.dot(ps);
  c.c41 = 6.0 * ccc.dot(ps);
  const double h = 1e-4 * cm.k_c;
  const double m0 = mu_plus(p, cm.k_c);
  c.c0 = -0.5 * (mu_plus(p, cm.k_c + h) - 2.0 * m0 + mu_plus(p, cm.k_c - h)) / (h * h);
  return c;
}

Vector3d landau_rhs(const LandauCoeffs& c, const AmplitudeState& a) {
  Vector3d f;
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3;
    const int q = (i + 2) % 3;
    f(i) = c.c1 * a(i) + c.c2 * a(p) * a(q) + c.c3 * a(i) * a(i) * a(i) +
           c.c4 * a(i) * (a(p) * a(p) + a(q) * a(q));
  }
  return f;
}

Matrix3d landau_jacobian(const LandauCoeffs& c, const AmplitudeState& a) {
  Matrix3d j;
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3;
    const int q = (i + 2) % 3;
    j(i, i) = c.c1 + 3 * c.c3 * a(i) * a(i) + c.c4 * (a(p) * a(p) + a(q) * a(q));
    j(i, p) = c.c2 * a(q) + 2 * c.c4 * a(i) * a(p);
    j(i, q) = c.c2 * a(p) + 2 * c.c4 * a(i) * a(q);
  }
  return j;
}

const char* to_string(FixedPointType t) {
  switch (t) {
    case FixedPointType::Zero: return "zero";
    case FixedPointType::StripePlus: return "stripe+";
    case FixedPointType::StripeMinus: return "stripe-";
    case FixedPointType::HexagonPlus: return "hexagon+";
    case FixedPointType::HexagonMinus: return "hexagon-";
    case FixedPointType::Mixed: return "mixed";
  }
  return "?";
}

bool stripe_amplitude(const LandauCoeffs& c, int sign, double& out) {
  if (c.c3 == 0) return false;
  const double r = -c.c1 / c.c3;
  if (r < 0) return false;
  out = sign * std::sqrt(r);
  return true;
}

bool hexagon_amplitude(double c1, double c2, double c3, double c4, int sign, double& out) {
  const double g = c3 + 2 * c4;
  if (g == 0) return false;
  const double disc = c2 * c2 / (4 * g * g) - c1 / g;
  if (disc < 0) return false;
  out = -c2 / (2 * g) + sign * std::sqrt(disc);
  return true;
}

std::vector<FixedPoint> landau_fixed_points(const LandauCoeffs& c) {
  std::vector<FixedPoint> out;
  out.push_back({Vector3d::Zero(), FixedPointType::Zero});
  double t = 0;
  if (stripe_amplitude(c, 1, t) && t > 0) {
    out.push_back({Vector3d(t, 0, 0), FixedPointType::StripePlus});
    out.push_back({Vector3d(-t, 0, 0), FixedPointType::StripeMinus});
  }
  // A2 = A3 = B != 0: B^2 = -(c1 + c2 A + c4 A^2)/(c3 + c4), and f1 = 0
  // reduces to a cubic in A.
  const double den = c.c3 + c.c4;
  if (den == 0) return out;
  Eigen::Vector4d poly;  // coefficients of A^3, A^2, A, 1
  poly << c.c3 * c.c3 + c.c3 * c.c4 - 2 * c.c4 * c.c4, -3 * c.c2 * c.c4,
      c.c1 * (c.c3 - c.c4) - c.c2 * c.c2, -c.c1 * c.c2;
  std::vector<double> roots;
  if (std::abs(poly(0)) > 1e-300) {
    Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
    comp(0, 0) = -poly(1) / poly(0);
    comp(0, 1) = -poly(2) / poly(0);
    comp(0, 2) = -poly(3) / poly(0);
    comp(1, 0) = 1;
    comp(2, 1) = 1;
    const Eigen::Vector3cd ev = comp.eigenvalues();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(ev(i).imag()) <= 1e-9 * std::max(1.0, std::abs(ev(i)))) roots.push_back(ev(i).real());
    }
  }
  double hp = 0;
  double hm = 0;
  const bool has_p = hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, 1, hp);
  const bool has_m = hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, -1, hm);
  std::vector<Vector3d> found;
  for (double a0 : roots) {
    const double b2 = -(c.c1 + c.c2 * a0 + c.c4 * a0 * a0) / den;
    if (b2 <= 0) continue;
    for (int sb : {1, -1}) {
      // Newton polish on the reduced 2x2 system (f1, f2/B)
      double a = a0;
      double b = sb * std::sqrt(b2);
      for (int it = 0; it < 50; ++it) {
        const double g1 = c.c1 * a + c.c2 * b * b + c.c3 * a * a * a + 2 * c.c4 * a * b * b;
        const double g2 = c.c1 + c.c2 * a + c.c3 * b * b + c.c4 * (a * a + b * b);
        Eigen::Matrix2d jm;
        jm << c.c1 + 3 * c.c3 * a * a + 2 * c.c4 * b * b, 2 * c.c2 * b + 4 * c.c4 * a * b,
            c.c2 + 2 * c.c4 * a, 2 * (c.c3 + c.c4) * b;
        const Eigen::Vector2d step = jm.fullPivLu().solve(Eigen::Vector2d(g1, g2));
        if (!step.allFinite()) break;
        a -= step(0);
        b -= step(1);
        if (step.norm() < 1e-16 * std::max(1.0, std::abs(a) + std::abs(b))) break;
      }
      const Vector3d s(a, b, b);
      if (std::abs(b) < 1e-12) continue;
      bool dup = false;
      for (const auto& f : found) dup = dup || (f - s).norm() < 1e-9;
      if (dup) continue;
      found.push_back(s);
      FixedPointType type = FixedPointType::Mixed;
      const double tol = 1e-7 * std::max(1.0, std::abs(a));
      if (std::abs(std::abs(a) - std::abs(b)) < tol) {
        if (has_p && std::abs(std::abs(a) - std::abs(hp)) < tol && a * hp > 0) {
          type = FixedPointType::HexagonPlus;
        } else if (has_m && std::abs(std::abs(a) - std::abs(hm)) < tol && a * hm > 0) {
          type = FixedPointType::HexagonMinus;
        }
      }
      out.push_back({s, type});
    }
  }
  return out;
}

int landau_stability(const LandauCoeffs& c, const AmplitudeState& a) {
  const Eigen::Vector3cd ev = landau_jacobian(c, a).eigenvalues();
  int n = 0;
  for (int i = 0; i < 3; ++i) n += ev(i).real() > 0 ? 1 : 0;
  return n;
}

void mixed_amplitudes(const LandauCoeffs& c, double& s, double& h) {
  if (!stripe_amplitude(c, 1, s)) throw std::domain_error("mixed system: stripes do not exist");
  if (!hexagon_amplitude(c.c1, c.c2, c.c31, c.c41, 1, h)) {
    throw std::domain_error("mixed system: first-order hexagons do not exist");
  }
  if (std::abs(s - h) < 1e-14) throw std::domain_error("mixed system: S = H");
}

double potential_energy(const LandauCoeffs& c, const AmplitudeState& a, EnergyVariant variant) {
  const double cross = a(0) * a(0) * a(1) * a(1) + a(0) * a(0) * a(2) * a(2) + a(1) * a(1) * a(2) * a(2);
  double e = c.c2 * a(0) * a(1) * a(2);
  if (variant == EnergyVariant::Standard) {
    for (int i = 0; i < 3; ++i) {
      const double a2 = a(i) * a(i);
      e += 0.5 * c.c1 * a2 + 0.25 * c.c3 * a2 * a2;
    }
    return e + 0.5 * c.c4 * cross;
  }
  const MixedSelf g = mixed_self(c);
  for (int i = 0; i < 3; ++i) e += 0.5 * c.c1 * a(i) * a(i) + g.energy(a(i));
  return e + 0.5 * c.c41 * cross;
}

Vector3d mixed_rhs(const LandauCoeffs& c, const AmplitudeState& a) {
  const MixedSelf g = mixed_self(c);
  Vector3d f;
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3;
    const int q = (i + 2) % 3;
    f(i) = c.c1 * a(i) + c.c2 * a(p) * a(q) + g.value(a(i)) + c.c41 * a(i) * (a(p) * a(p) + a(q) * a(q));
  }
  return f;
}

const char* to_string(MaxwellKind k) {
  switch (k) {
    case MaxwellKind::Hot: return "hot";
    case MaxwellKind::Cold: return "cold";
    case MaxwellKind::Homogeneous: return "homogeneous";
    case MaxwellKind::MixedHot: return "mixed_hot";
  }
  return "?";
}

double maxwell_gap(MaxwellKind kind, const ModelParams<double>& p) {
  const LandauCoeffs c = landau_coefficients(p);
  double t = 0;
  double h = 0;
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::domain_error(std::string("maxwell_gap: ") + what + " do not exist");
  };
  switch (kind) {
    case MaxwellKind::Hot:
      need(stripe_amplitude(c, 1, t), "stripes");
      need(hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, 1, h), "hot hexagons");
      return potential_energy(c, Vector3d(t, 0, 0)) - potential_energy(c, Vector3d(h, h, h));
    case MaxwellKind::Cold:
      need(stripe_amplitude(c, -1, t), "stripes");
      need(hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, -1, h), "cold hexagons");
      return potential_energy(c, Vector3d(t, 0, 0)) - potential_energy(c, Vector3d(h, h, h));
    case MaxwellKind::Homogeneous:
      need(hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, -1, h), "cold hexagons");
      return potential_energy(c, Vector3d(h, h, h));
    case MaxwellKind::MixedHot: {
      // stripes from the full expansion, hexagons from the first-order ansatz
      need(stripe_amplitude(c, 1, t), "stripes");
      need(hexagon_amplitude(c.c1, c.c2, c.c31, c.c41, 1, h), "first-order hexagons");
      LandauCoeffs first = c;
      first.c3 = c.c31;
      first.c4 = c.c41;
      return potential_energy(c, Vector3d(t, 0, 0)) - potential_energy(first, Vector3d(h, h, h));
    }
  }
  throw std::invalid_argument("maxwell_gap: unknown kind");
}

double maxwell_point(MaxwellKind kind, double sigma, double d, double lambda_lo, double lambda_hi,
                     double tol) {
  const double lc = critical_values(d).lambda_c;
  const bool upward = kind == MaxwellKind::Homogeneous;
  if (lambda_lo <= 0 || lambda_hi <= 0) {
    if (upward) {
      lambda_lo = lc * (1 + 1e-9);
      lambda_hi = lc * 1.05;
    } else {
      lambda_lo = 0.5 * lc;
      lambda_hi = lc * (1 - 1e-9);
    }
  }
  if (!(lambda_lo < lambda_hi)) throw std::invalid_argument("maxwell_point: empty lambda range");
  ModelParams<double> p;
  p.d = d;
  p.sigma = sigma;
  auto gap = [&](double l) { return maxwell_gap(kind, p.with_lambda(l)); };
  // scan away from lambda_c so that the closest sign change wins
  const int n = 800;
  bool have_prev = false;
  double lp = 0;
  double gp = 0;
  for (int i = 0; i <= n; ++i) {
    const double w = static_cast<double>(i) / n;
    const double l = upward ? lambda_lo + w * (lambda_hi - lambda_lo)
                            : lambda_hi - w * (lambda_hi - lambda_lo);
    double g = 0;
    try {
      g = gap(l);
    } catch (const std::domain_error&) {
      have_prev = false;
      continue;
    }
    if (!std::isfinite(g)) {
      have_prev = false;
      continue;
    }
    if (have_prev && (g < 0) != (gp < 0)) {
      const double lo = std::min(l, lp);
      const double hi = std::max(l, lp);
      return bisect(gap, lo, hi, lo == l ? g : gp, tol);
    }
    have_prev = true;
    lp = l;
    gp = g;
  }
  throw std::runtime_error(std::string("maxwell_point: no sign change for kind ") + to_string(kind));
}

const char* to_string(FrontKind k) {
  switch (k) {
    case FrontKind::Hot: return "hot";
    case FrontKind::Cold: return "cold";
    case FrontKind::Mixed: return "mixed";
  }
  return "?";
}

namespace {

struct FrontEnds {
  double s1, s2;  // stripe side (A1, A2)
  double h1, h2;  // hexagon side
};

FrontEnds front_ends(const LandauCoeffs& c, FrontKind kind) {
  FrontEnds e{};
  double t = 0;
  double h = 0;
  bool ok = false;
  switch (kind) {
    case FrontKind::Hot:
      ok = stripe_amplitude(c, 1, t) && hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, 1, h);
      break;
    case FrontKind::Cold:
      ok = stripe_amplitude(c, -1, t) && hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, -1, h);
      break;
    case FrontKind::Mixed:
      mixed_amplitudes(c, t, h);
      ok = true;
      break;
  }
  if (!ok) throw std::domain_error("gl_front_solve: end states do not exist at this lambda");
  e.s1 = t;
  e.s2 = 0;
  e.h1 = h;
  e.h2 = h;
  return e;
}

struct FrontOps {
  int n;
  double h;
  int mirror(int i) const {
    if (i < 0) return -i;
    if (i > n - 1) return 2 * (n - 1) - i;
    return i;
  }
  double d2(const VectorXd& a, int i) const {
    return (-a(mirror(i - 2)) + 16 * a(mirror(i - 1)) - 30 * a(i) + 16 * a(mirror(i + 1)) -
            a(mirror(i + 2))) / (12 * h * h);
  }
  double d1(const VectorXd& a, int i) const {
    return (a(mirror(i - 2)) - 8 * a(mirror(i - 1)) + 8 * a(mirror(i + 1)) - a(mirror(i + 2))) /
           (12 * h);
  }
};

Vector3d front_rhs(const LandauCoeffs& c, FrontKind kind, double a1, double a2) {
  const Vector3d a(a1, a2, a2);
  return kind == FrontKind::Mixed ? mixed_rhs(c, a) : landau_rhs(c, a);
}

Matrix3d front_jac(const LandauCoeffs& c, FrontKind kind, double a1, double a2) {
  const Vector3d a(a1, a2, a2);
  return kind == FrontKind::Mixed ? mixed_jacobian(c, a) : landau_jacobian(c, a);
}

VectorXd front_residual(const LandauCoeffs& c, FrontKind kind, const FrontOps& op,
                        const VectorXd& a1, const VectorXd& a2) {
  const int n = op.n;
  VectorXd r(2 * n);
  for (int i = 0; i < n; ++i) {
    const Vector3d f = front_rhs(c, kind, a1(i), a2(i));
    r(i) = c.c0 * op.d2(a1, i) + f(0);
    r(n + i) = 0.25 * c.c0 * op.d2(a2, i) + f(1);
  }
  return r;
}

}  // namespace

GLFrontProfile gl_front_solve(double lambda, FrontKind kind, double sigma,
                              const GLFrontSettings& settings, double d) {
  if (settings.nodes < 16) throw std::invalid_argument("gl_front_solve: need at least 16 nodes");
  ModelParams<double> base;
  base.d = d;
  base.sigma = sigma;
  base.lambda = lambda;
  require_valid(base);
  const double kc = critical_values(d).k_c;
  const double L = settings.half_length > 0 ? settings.half_length : 24 * std::numbers::pi / kc;
  const int n = settings.nodes;
  const FrontOps op{n, 2 * L / (n - 1)};
  const bool free = settings.free_lambda;
  const int nu = 2 * n + (free ? 1 : 0);

  LandauCoeffs c = landau_coefficients(base);
  const FrontEnds e0 = front_ends(c, kind);
  const double w = settings.width > 0 ? settings.width : (kind == FrontKind::Cold ? 15.0 : 5.0) / kc;

  GLFrontProfile out;
  out.kind = kind;
  out.sigma = sigma;
  out.x.resize(n);
  VectorXd a1(n);
  VectorXd a2(n);
  for (int i = 0; i < n; ++i) {
    out.x(i) = -L + i * op.h;
    const double t = 0.5 * (1 + std::tanh(out.x(i) / w));
    a1(i) = e0.s1 + t * (e0.h1 - e0.s1);
    a2(i) = e0.s2 + t * (e0.h2 - e0.s2);
  }
  // phase condition against the initial profile pins the front position
  const VectorXd tmpl1 = a1;
  VectorXd dtmpl(n);
  for (int i = 0; i < n; ++i) dtmpl(i) = op.d1(tmpl1, i) * op.h;

  double lam = lambda;
  auto full_residual = [&](const VectorXd& x1, const VectorXd& x2, const LandauCoeffs& cc) {
    VectorXd r(nu);
    r.head(2 * n) = front_residual(cc, kind, op, x1, x2);
    if (free) r(2 * n) = (x1 - tmpl1).dot(dtmpl);
    return r;
  };
  VectorXd r = full_residual(a1, a2, c);
  double res = r.head(2 * n).lpNorm<Eigen::Infinity>();
  int it = 0;
  const double c2d = 1.0 / (12 * op.h * op.h);
  const int stencil[5] = {-2, -1, 0, 1, 2};
  const double weights[5] = {-1, 16, -30, 16, -1};
  while (res > settings.tol || (free && std::abs(r(2 * n)) > settings.tol)) {
    if (it >= settings.max_iter) {
      throw std::runtime_error("gl_front_solve: Newton did not converge, residual " +
                               std::to_string(res));
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(14 * n);
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < 5; ++s) {
        const int j = op.mirror(i + stencil[s]);
        t.emplace_back(i, j, c.c0 * weights[s] * c2d);
        t.emplace_back(n + i, n + j, 0.25 * c.c0 * weights[s] * c2d);
      }
      const Matrix3d jf = front_jac(c, kind, a1(i), a2(i));
      t.emplace_back(i, i, jf(0, 0));
      t.emplace_back(i, n + i, jf(0, 1) + jf(0, 2));
      t.emplace_back(n + i, i, jf(1, 0));
      t.emplace_back(n + i, n + i, jf(1, 1) + jf(1, 2));
    }
    Eigen::SparseMatrix<double> jm(2 * n, 2 * n);
    jm.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(jm);
    if (lu.info() != Eigen::Success) throw std::runtime_error("gl_front_solve: singular Jacobian");
    VectorXd step(nu);
    if (free) {
      // bordered system [[J, dR/dlambda], [dtmpl^T, 0]] by block elimination
      const double dl = 1e-6;
      const LandauCoeffs cp = landau_coefficients(base.with_lambda(lam + dl));
      const LandauCoeffs cm = landau_coefficients(base.with_lambda(lam - dl));
      const VectorXd dr = (front_residual(cp, kind, op, a1, a2) - front_residual(cm, kind, op, a1, a2)) / (2 * dl);
      const VectorXd y1 = lu.solve(-r.head(2 * n));
      const VectorXd y2 = lu.solve(dr);
      const double den = dtmpl.dot(y2.head(n));
      if (den == 0) throw std::runtime_error("gl_front_solve: singular bordered system");
      const double dlam = (r(2 * n) + dtmpl.dot(y1.head(n))) / den;
      step.head(2 * n) = y1 - dlam * y2;
      step(2 * n) = dlam;
    } else {
      step = lu.solve(-r);
    }
    // damped update
    const double r0 = r.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12; ++k, alpha *= 0.5) {
      const VectorXd n1 = a1 + alpha * step.head(n);
      const VectorXd n2 = a2 + alpha * step.segment(n, n);
      const double nl = free ? lam + alpha * step(2 * n) : lam;
      LandauCoeffs cn;
      try {
        cn = free ? landau_coefficients(base.with_lambda(nl)) : c;
        const VectorXd rn = full_residual(n1, n2, cn);
        if (!rn.allFinite() || (rn.norm() >= r0 && k < 11)) continue;
        a1 = n1;
        a2 = n2;
        lam = nl;
        c = cn;
        r = rn;
        accepted = true;
        break;
      } catch (const std::domain_error&) {
        continue;
      }
    }
    if (!accepted) throw std::runtime_error("gl_front_solve: line search failed");
    res = r.head(2 * n).lpNorm<Eigen::Infinity>();
    ++it;
  }

  const FrontEnds e = front_ends(c, kind);
  out.lambda = lam;
  out.coeffs = c;
  out.a1 = a1;
  out.a2 = a2;
  out.residual = res;
  out.iterations = it;
  if ((a1.maxCoeff() - a1.minCoeff()) < 1e-3 * std::max(std::abs(e.s1 - e.h1), 1e-12)) {
    throw std::runtime_error("gl_front_solve: no front at this lambda (collapsed to a constant state)");
  }
  out.endpoint_error = std::max({std::abs(a1(0) - e.s1), std::abs(a2(0) - e.s2),
                                 std::abs(a1(n - 1) - e.h1), std::abs(a2(n - 1) - e.h2)});
  const EnergyVariant var = kind == FrontKind::Mixed ? EnergyVariant::Mixed : EnergyVariant::Standard;
  out.energy.resize(n);
  double epot_scale = 0;
  for (int i = 0; i < n; ++i) {
    const double p1 = op.d1(a1, i);
    const double p2 = op.d1(a2, i);
    const double ep = potential_energy(c, Vector3d(a1(i), a2(i), a2(i)), var);
    epot_scale = std::max(epot_scale, std::abs(ep));
    out.energy(i) = 0.5 * c.c0 * (p1 * p1 + 0.5 * p2 * p2) + ep;
    out.max_slope_a1 = std::max(out.max_slope_a1, std::abs(p1));
  }
  out.energy_drift = (out.energy.maxCoeff() - out.energy.minCoeff()) / std::max(epot_scale, 1e-300);
  return out;
}

Field ansatz_reconstruct(const ModelParams<double>& p, const AmplitudeState& a,
                         const DomainSpec& spec, AnsatzOrder order) {
  require_valid(p);
  const CriticalModes cm = critical_modes(p);
  Correctors cr{Vec2<double>::Zero(), Vec2<double>::Zero(), Vec2<double>::Zero()};
  if (order == AnsatzOrder::Full) cr = correctors(p);
  const double kc = cm.k_c;
  const double r3 = std::sqrt(3.0);
  const Eigen::Vector2d kv[3] = {Eigen::Vector2d(kc, 0), Eigen::Vector2d(-0.5 * kc, 0.5 * r3 * kc),
                                 Eigen::Vector2d(-0.5 * kc, -0.5 * r3 * kc)};
  const Vec2<double> ws = homogeneous_state(p);
  Field f(spec);
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      const Eigen::Vector2d x(spec.x(i), spec.y(j));
      Vec2<double> w = ws;
      for (int q = 0; q < 3; ++q) {
        w += 2 * a(q) * std::cos(kv[q].dot(x)) * cm.phi;
        w += a(q) * a(q) * cr.phi0;
        w += 2 * a(q) * a(q) * std::cos(2 * kv[q].dot(x)) * cr.phi1;
        for (int r = q + 1; r < 3; ++r) {
          w += 2 * a(q) * a(r) * std::cos((kv[q] - kv[r]).dot(x)) * cr.phi2;
        }
      }
      const int k = spec.index(i, j);
      f.u(k) = w(0);
      f.v(k) = w(1);
    }
  }
  return f;
}

double fold_criterion(const LandauCoeffs& c) {
  const double g = c.c3 + 2 * c.c4;
  if (g == 0) throw std::domain_error("fold_criterion: c3 + 2 c4 = 0");
  return c.c2 * c.c2 / (4 * g);
}

double predicted_hexagon_fold(double sigma, double d) {
  ModelParams<double> p;
  p.d = d;
  p.sigma = sigma;
  const double lc = critical_values(d).lambda_c;
  auto g = [&](double l) {
    const LandauCoeffs c = landau_coefficients(p.with_lambda(l));
    return c.c1 - fold_criterion(c);
  };
  // g > 0 on the side where the hexagons exist
  double lo = lc;
  double glo = g(lo);
  const int n = 400;
  for (int i = 1; i <= n; ++i) {
    const double l = lc * (1 + 0.2 * i / n);
    const double gl = g(l);
    if ((gl < 0) != (glo < 0)) return bisect(g, lo, l, glo, 1e-10);
    lo = l;
    glo = gl;
  }
  throw std::runtime_error("predicted_hexagon_fold: no fold above lambda_c");
}

void write_coefficient_sweep(const std::filesystem::path& path, const std::vector<LandauCoeffs>& cs,
                             const std::string& row_key) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << row_key << ",c0,c1,c2,c3,c4,c31,c41\n";
  for (const auto& c : cs) {
    out << (row_key == "sigma" ? c.sigma : c.lambda) << "," << c.c0 << "," << c.c1 << "," << c.c2
        << "," << c.c3 << "," << c.c4 << "," << c.c31 << "," << c.c41 << "\n";
  }
}

void write_energy_sweep(const std::filesystem::path& path, const ModelParams<double>& base,
                        const std::vector<double>& lambdas) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << "lambda,E_Tplus,E_Tminus,E_Pplus,E_Pminus\n";
  for (double l : lambdas) {
    const LandauCoeffs c = landau_coefficients(base.with_lambda(l));
    double t = 0;
    out << l;
    for (int s : {1, -1}) {
      if (stripe_amplitude(c, s, t)) {
        out << "," << potential_energy(c, Vector3d(t, 0, 0));
      } else {
        out << ",nan";
      }
    }
    for (int s : {1, -1}) {
      if (hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, s, t)) {
        out << "," << potential_energy(c, Vector3d(t, t, t));
      } else {
        out << ",nan";
      }
    }
    out << "\n";
  }
}

void write_fixed_point_sweep(const std::filesystem::path& path, const ModelParams<double>& base,
                             const std::vector<double>& lambdas) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << "lambda,A,B,type,n_unstable\n";
  for (double l : lambdas) {
    const LandauCoeffs c = landau_coefficients(base.with_lambda(l));
    for (const auto& fp : landau_fixed_points(c)) {
      out << l << "," << fp.state(0) << "," << fp.state(1) << "," << to_string(fp.type) << ","
          << landau_stability(c, fp.state) << "\n";
    }
  }
}

void write_front_csv(const std::filesystem::path& path, const GLFrontProfile& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(14);
  out << "x,A1,A2,E_total\n";
  for (Eigen::Index i = 0; i < f.x.size(); ++i) {
    out << f.x(i) << "," << f.a1(i) << "," << f.a2(i) << "," << f.energy(i) << "\n";
  }
}

}  // namespace turing

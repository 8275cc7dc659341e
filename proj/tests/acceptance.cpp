// Acceptance suite: one PASS/FAIL line per criterion.
#include "turing/amplitude.hpp"
#include "turing/continuation.hpp"
#include "turing/eigs.hpp"
#include "turing/timestep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace turing;

namespace {

// ------------------------------------------------------------------ tolerances

namespace tol {
// 1
constexpr double closed_form = 1e-10;
constexpr double max_oracle = 1e-8;
constexpr double runtime1 = 1.0;
// 2
constexpr double hot = 2.62, hot_tol = 0.02;
constexpr double cold = 3.11, cold_tol = 0.02;
constexpr double hom = 3.219, hom_tol = 0.003;
constexpr double mixed = 2.67, mixed_tol = 0.03;
constexpr double runtime2 = 10.0;
// 3
constexpr double c3_root_lo = -0.35, c3_root_hi = -0.25;
constexpr double g_root = -0.369, g_root_tol = 0.01;
constexpr double runtime3 = 5.0;
// 4
constexpr double hex_fold = 3.22, hex_fold_tol = 0.02;
constexpr double stripe_begin = 3.15, stripe_end = 2.51, stripe_tol = 0.05;
constexpr double hh_begin = 2.73, hh_tol = 0.05;
constexpr double ch_end = 3.03, ch_tol = 0.05;
constexpr double hom_bif_lo = 3.155, hom_bif_hi = 3.22;
constexpr int hom_bif_count = 10;
// 5
constexpr int snake_folds = 3;
constexpr double snake_lo = 2.50, snake_hi = 2.80;
// 6
constexpr double cold_window_lo = 3.0, cold_window_hi = 3.2;
constexpr int cold_nx = 481, cold_ny = 41;
constexpr double cover_lo = 0.1, cover_hi = 0.9;
constexpr int cold_points = 250;
constexpr double snake_sigma = -0.35;
constexpr int sigma_snake_folds = 2;
// 7
constexpr double front_residual = 1e-10;
constexpr double front_drift = 1e-6;
constexpr double front_endpoint = 1e-3;
constexpr double runtime7 = 30.0;
// 8
constexpr double symmetry = 1e-12;
constexpr double pairing = 1e-12;
constexpr double corrector = 1e-12;
constexpr double gradient = 1e-8;
constexpr double fixed_point = 1e-12;
constexpr double jacobian_fd = 1e-6;
constexpr double laplacian = 1e-9;
constexpr double equilibrium = 1e-12;
constexpr double runtime8 = 60.0;
}  // namespace tol

struct Outcome {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ModelParams<double> params(double lambda, double sigma = 0.0) {
  ModelParams<double> p;
  p.lambda = lambda;
  p.sigma = sigma;
  return p;
}

bool within(double x, double target, double t) { return std::abs(x - target) <= t; }

double bisect(const std::function<double(double)>& f, double lo, double hi, double eps) {
  double flo = f(lo);
  if (flo * f(hi) > 0) return NAN;
  while (hi - lo > eps) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------------------ 1

// d mu_+/dk from first-order eigenvalue perturbation, dL/dk = -2 k diag(1, d).
double dmu_dk(const ModelParams<double>& p, double k) {
  const Mat2<double> l = dispersion_matrix(p, k);
  Eigen::EigenSolver<Mat2<double>> es(l);
  Eigen::EigenSolver<Mat2<double>> et(Mat2<double>(l.transpose()));
  int i = es.eigenvalues().real()(0) > es.eigenvalues().real()(1) ? 0 : 1;
  int j = et.eigenvalues().real()(0) > et.eigenvalues().real()(1) ? 0 : 1;
  const Vec2<double> phi = es.eigenvectors().col(i).real();
  const Vec2<double> psi = et.eigenvectors().col(j).real();
  const Mat2<double> dl = Vec2<double>(-2 * k, -2 * k * p.d).asDiagonal();
  return psi.dot(dl * phi) / psi.dot(phi);
}

double max_mu_over_k(const ModelParams<double>& p) {
  const double k = bisect([&](double q) { return dmu_dk(p, q); }, 0.3, 1.2, 1e-14);
  return mu_plus(p, k);
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const CriticalValues cv = critical_values(60.0);
  const double lc = std::sqrt(60.0) * std::sqrt(3.0 - std::sqrt(8.0));
  const double kc = std::sqrt(std::sqrt(2.0) - 1.0);
  const double e_closed = std::max(std::abs(cv.lambda_c - lc), std::abs(cv.k_c - kc));
  const double l_oracle = bisect([](double l) { return max_mu_over_k(params(l)); }, 3.0, 3.4, 1e-14);
  const double k_oracle = bisect([&](double q) { return dmu_dk(params(l_oracle), q); }, 0.3, 1.2, 1e-14);
  const double e_oracle = std::max(std::abs(cv.lambda_c - l_oracle), std::abs(cv.k_c - k_oracle));
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = e_closed <= tol::closed_form && e_oracle <= tol::max_oracle && t < tol::runtime1;
  o.detail = "lambda_c " + fmt("%.10f", cv.lambda_c) + " k_c " + fmt("%.10f", cv.k_c) +
             ", closed-form error " + fmt("%.1e", e_closed) + ", oracle error " +
             fmt("%.1e", e_oracle) + ", " + fmt("%.2f", t) + " s";
  return o;
}

// ------------------------------------------------------------------ 2

Outcome criterion2() {
  const auto t0 = Clock::now();
  const double hot = maxwell_point(MaxwellKind::Hot, 0.0);
  const double cold = maxwell_point(MaxwellKind::Cold, 0.0);
  const double hom = maxwell_point(MaxwellKind::Homogeneous, 0.0);
  const double mixed = maxwell_point(MaxwellKind::MixedHot, 0.0);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = within(hot, tol::hot, tol::hot_tol) && within(cold, tol::cold, tol::cold_tol) &&
           within(hom, tol::hom, tol::hom_tol) && within(mixed, tol::mixed, tol::mixed_tol) &&
           t < tol::runtime2;
  o.detail = "hot " + fmt("%.4f", hot) + ", cold " + fmt("%.4f", cold) + ", homogeneous " +
             fmt("%.4f", hom) + ", mixed-hot " + fmt("%.4f", mixed) + ", " + fmt("%.2f", t) + " s";
  return o;
}

// ------------------------------------------------------------------ 3

Outcome criterion3() {
  const auto t0 = Clock::now();
  const double lc = critical_values(60.0).lambda_c;
  const double r3 = bisect([&](double s) { return landau_coefficients(params(lc, s)).c3; }, -0.6, 0.0, 1e-10);
  const double rg = bisect(
      [&](double s) {
        const LandauCoeffs c = landau_coefficients(params(lc, s));
        return c.c3 + 2 * c.c4;
      },
      -0.6, 0.0, 1e-10);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = r3 >= tol::c3_root_lo && r3 <= tol::c3_root_hi && within(rg, tol::g_root, tol::g_root_tol) &&
           t < tol::runtime3;
  o.detail = "c3 = 0 at sigma " + fmt("%.4f", r3) + ", c3 + 2 c4 = 0 at sigma " + fmt("%.4f", rg) +
             ", " + fmt("%.2f", t) + " s";
  return o;
}

// ------------------------------------------------------------------ 4

const BranchEvent* first_instability(const Branch& b) {
  for (const auto& e : b.events) {
    if (e.count_before == 0 && e.count_after > 0) return &e;
  }
  return nullptr;
}

bool has_instability(const Branch& b) { return first_instability(b) != nullptr; }

BranchPoint ansatz_start(const ContProblem& prob, double lambda, const AmplitudeState& a, int dir) {
  const Field g = ansatz_reconstruct(prob.at(lambda), a, prob.lap.spec);
  return make_start_point(prob, g, lambda, dir);
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  const DomainSpec spec = build_domain(2, 2, 129, 97);
  ContSettings cs;
  cs.dsmax = 0.05;
  cs.bif_loc_tol = 1e-6;
  const ContProblem prob(spec, params(3.0), cs);
  std::ostringstream d;
  bool pass = true;
  auto report = [&](const std::string& name, double x, bool ok) {
    d << name << " " << fmt("%.4f", x) << (ok ? "" : " (out of range)") << "; ";
    pass = pass && ok;
  };

  // homogeneous branch
  {
    ContSettings hs = cs;
    hs.ds0 = 0.01;
    hs.dsmax = 0.02;
    const ContProblem hp(spec, params(3.0), hs);
    const double l0 = 3.25;
    const BranchPoint st = make_start_point(hp, Field::constant(spec, l0, 1 / l0), l0, -1);
    StopRule sr;
    sr.lambda_min = 3.0;
    sr.lambda_max = 3.3;
    sr.until = [](const Branch& b) {
      int n = 0;
      for (const auto& e : b.events) n += e.kind == EventKind::Bifurcation;
      return n >= tol::hom_bif_count;
    };
    const Branch b = run_branch(hp, st, sr, "hom");
    std::vector<double> ls;
    for (const auto& e : b.events) {
      if (e.kind == EventKind::Bifurcation && static_cast<int>(ls.size()) < tol::hom_bif_count) {
        ls.push_back(e.located_lambda);
      }
    }
    bool ok = static_cast<int>(ls.size()) == tol::hom_bif_count;
    for (double l : ls) ok = ok && l >= tol::hom_bif_lo && l <= tol::hom_bif_hi;
    d << "homogeneous bifurcations " << ls.size() << " in [" << fmt("%.4f", ls.empty() ? NAN : ls.back())
      << ", " << fmt("%.4f", ls.empty() ? NAN : ls.front()) << "]" << (ok ? "" : " (out of range)") << "; ";
    pass = pass && ok;
  }

  StopRule first;
  first.lambda_min = 2.3;
  first.lambda_max = 3.3;
  first.max_points = 120;
  first.until = has_instability;

  // stripes from the stable state at 3.0, both directions
  {
    const LandauCoeffs c = landau_coefficients(params(3.0));
    double t = 0;
    stripe_amplitude(c, 1, t);
    const BranchPoint up = ansatz_start(prob, 3.0, AmplitudeState(t, 0, 0), 1);
    const BranchPoint down = ansatz_start(prob, 3.0, AmplitudeState(t, 0, 0), -1);
    const Branch bu = run_branch(prob, up, first, "stripes_up");
    const Branch bd = run_branch(prob, down, first, "stripes_down");
    const BranchEvent* eu = first_instability(bu);
    const BranchEvent* ed = first_instability(bd);
    const double lu = eu ? eu->located_lambda : NAN;
    const double ld = ed ? ed->located_lambda : NAN;
    report("stripes stable from", lu, up.n_unstable == 0 && within(lu, tol::stripe_begin, tol::stripe_tol));
    report("to", ld, within(ld, tol::stripe_end, tol::stripe_tol));
  }

  // cold hexagons from the stable state at 3.15: fold above, instability below
  {
    const LandauCoeffs c = landau_coefficients(params(3.15));
    double h = 0;
    hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, -1, h);
    const BranchPoint up = ansatz_start(prob, 3.15, AmplitudeState(h, h, h), 1);
    StopRule to_fold = first;
    to_fold.until = [](const Branch& b) {
      for (const auto& e : b.events) {
        if (e.kind == EventKind::Fold) return true;
      }
      return false;
    };
    const Branch bu = run_branch(prob, up, to_fold, "cold_up");
    double fold = NAN;
    for (const auto& e : bu.events) {
      if (e.kind == EventKind::Fold) {
        fold = e.located_lambda;
        break;
      }
    }
    report("hexagon fold", fold, up.n_unstable == 0 && within(fold, tol::hex_fold, tol::hex_fold_tol));
    const BranchPoint down = ansatz_start(prob, 3.15, AmplitudeState(h, h, h), -1);
    const Branch bd = run_branch(prob, down, first, "cold_down");
    const BranchEvent* e = first_instability(bd);
    const double l = e ? e->located_lambda : NAN;
    report("cold hexagons stable down to", l, within(l, tol::ch_end, tol::ch_tol));
  }

  // hot hexagons from the stable state at 2.6, upward
  {
    const LandauCoeffs c = landau_coefficients(params(2.6));
    double h = 0;
    hexagon_amplitude(c.c1, c.c2, c.c3, c.c4, 1, h);
    const BranchPoint up = ansatz_start(prob, 2.6, AmplitudeState(h, h, h), 1);
    const Branch bu = run_branch(prob, up, first, "hot_up");
    const BranchEvent* e = first_instability(bu);
    const double l = e ? e->located_lambda : NAN;
    report("hot hexagons stable up to", l, up.n_unstable == 0 && within(l, tol::hh_begin, tol::hh_tol));
  }
  d << fmt("%.0f", seconds_since(t0)) << " s";
  return {pass, d.str()};
}

// ------------------------------------------------------------------ 5, 6

std::vector<const BranchEvent*> folds_of(const Branch& b) {
  std::vector<const BranchEvent*> out;
  for (const auto& e : b.events) {
    if (e.kind == EventKind::Fold) out.push_back(&e);
  }
  return out;
}

int bifurcations_of(const Branch& b) {
  int n = 0;
  for (const auto& e : b.events) n += e.kind == EventKind::Bifurcation;
  return n;
}

const BranchEvent* nth_bifurcation(const Branch& b, int n) {
  for (const auto& e : b.events) {
    if (e.kind == EventKind::Bifurcation && --n == 0) return &e;
  }
  return nullptr;
}

/// Folds across which the unstable count flips between 0 and 2, judged at
/// the middle point of the segments on either side.
int stability_toggles(const Branch& b, const std::vector<const BranchEvent*>& folds) {
  std::vector<int> seg;
  int begin = 0;
  for (std::size_t i = 0; i <= folds.size(); ++i) {
    const int end = i < folds.size() ? folds[i]->index : static_cast<int>(b.points.size()) - 1;
    seg.push_back(b.points[(begin + 1 + end) / 2].n_unstable);
    begin = end;
  }
  int n = 0;
  for (std::size_t i = 1; i + 1 < seg.size(); ++i) {
    n += (seg[i - 1] == 0 && seg[i] == 2) || (seg[i - 1] == 2 && seg[i] == 0);
  }
  return n;
}

/// Share of the domain covered by hexagons in a stripes/hexagons state: the
/// mean over x of the y-range of u, relative to the value 8/(4.5 pi) of
/// ideal hexagons with the same overall u-range. Stripes give 0.
double hexagon_cover(const Field& f) {
  const Eigen::Map<const Eigen::MatrixXd> u(f.u.data(), f.spec.nx, f.spec.ny);
  const double range = f.u.maxCoeff() - f.u.minCoeff();
  if (range <= 0) return 0;
  const double ideal = 8 / (4.5 * std::numbers::pi);
  return (u.rowwise().maxCoeff() - u.rowwise().minCoeff()).mean() / (range * ideal);
}

std::string list(const std::vector<const BranchEvent*>& ev) {
  std::string s;
  for (const auto* e : ev) s += (s.empty() ? "" : " ") + fmt("%.4f", e->located_lambda);
  return "[" + s + "]";
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  const DomainSpec spec = build_domain(4, 2, 129, 49);
  ContSettings cs;
  cs.dsmax = 0.05;
  cs.bif_loc_tol = 1e-5;
  const ContProblem prob(spec, params(2.6), cs);

  // hot stripes down to their first instability
  const LandauCoeffs c = landau_coefficients(params(2.6));
  double t = 0;
  stripe_amplitude(c, 1, t);
  StopRule sr;
  sr.lambda_min = 2.2;
  sr.lambda_max = 3.0;
  sr.max_points = 60;
  sr.until = has_instability;
  const Branch hs = run_branch(prob, ansatz_start(prob, 2.6, AmplitudeState(t, 0, 0), -1), sr, "hs");
  const BranchEvent* e0 = first_instability(hs);
  if (!e0) return {false, "hot stripes never lose stability"};

  // beans up to their second bifurcation
  StopRule sb;
  sb.lambda_min = 2.3;
  sb.lambda_max = 2.9;
  sb.max_points = 150;
  sb.until = [](const Branch& b) { return bifurcations_of(b) >= 2; };
  const Branch hb = run_branch(prob, branch_switch(prob, *e0, 1, 0.02).point, sb, "hb");
  const BranchEvent* e2 = nth_bifurcation(hb, 2);
  if (!e2) return {false, "bean branch has fewer than 2 bifurcations"};

  // localized branch until it leaves the snaking region again
  StopRule sl;
  sl.lambda_min = 2.3;
  sl.lambda_max = 2.9;
  sl.max_points = 200;
  sl.until = [](const Branch& b) {
    return !folds_of(b).empty() && b.points.back().lambda < tol::snake_lo;
  };
  const Branch hl = run_branch(prob, branch_switch(prob, *e2, 1, 0.02).point, sl, "hl");
  const auto f = folds_of(hl);
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto* e : f) {
    lo = std::min(lo, e->located_lambda);
    hi = std::max(hi, e->located_lambda);
  }
  const int toggles = stability_toggles(hl, f);
  const bool pass = static_cast<int>(f.size()) >= tol::snake_folds && lo >= tol::snake_lo &&
                    hi <= tol::snake_hi && lo < tol::hot && hi > tol::hot &&
                    toggles >= tol::snake_folds;
  std::ostringstream d;
  d << "stripes unstable at " << fmt("%.4f", e0->located_lambda) << "; second bean bifurcation "
    << fmt("%.4f", e2->located_lambda) << "; " << f.size() << " folds " << list(f) << "; "
    << toggles << " stability toggles 0<->2; " << fmt("%.0f", seconds_since(t0)) << " s";
  return {pass, d.str()};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  std::ostringstream d;
  bool pass = true;
  const double lc = critical_values(60.0).lambda_c;

  // sigma = 0, 12x2: cold stripes, cold beans, front branch from the first
  // bean bifurcation, followed until lambda leaves the window
  {
    const DomainSpec spec = build_domain(12, 2, tol::cold_nx, tol::cold_ny);
    ContSettings cs;
    cs.dsmax = 0.05;
    cs.bif_loc_tol = 1e-3;
    cs.n_eigs = 10;
    const ContProblem prob(spec, params(3.1), cs);
    const LandauCoeffs c = landau_coefficients(params(3.1));
    double t = 0;
    stripe_amplitude(c, 1, t);
    StopRule sr;
    sr.lambda_min = 2.9;
    sr.lambda_max = 3.3;
    sr.max_points = 60;
    sr.until = has_instability;
    const Branch cst = run_branch(prob, ansatz_start(prob, 3.1, AmplitudeState(-t, 0, 0), 1), sr, "cs");
    const BranchEvent* e0 = first_instability(cst);
    if (!e0) return {false, "cold stripes never lose stability"};
    StopRule sb;
    sb.lambda_min = 2.9;
    sb.lambda_max = 3.25;
    sb.max_points = 150;
    sb.until = [](const Branch& b) { return bifurcations_of(b) >= 1; };
    const Branch cb = run_branch(prob, branch_switch(prob, *e0, 1, 0.02).point, sb, "cb");
    const BranchEvent* e1 = nth_bifurcation(cb, 1);
    if (!e1) return {false, "cold bean branch has no bifurcation"};
    // the traverse runs from the first point with cover above cover_lo to the
    // first with cover above cover_hi
    StopRule sf;
    sf.lambda_min = tol::cold_window_lo;
    sf.lambda_max = tol::cold_window_hi;
    sf.max_points = tol::cold_points;
    sf.until = [](const Branch& b) { return hexagon_cover(b.points.back().state) >= tol::cover_hi; };
    const Branch cf = run_branch(prob, branch_switch(prob, *e1, 1, 0.02).point, sf, "cf");
    int i0 = -1;
    int i1 = -1;
    double lmin = INFINITY;
    double lmax = -INFINITY;
    for (std::size_t i = 0; i < cf.points.size(); ++i) {
      const double q = hexagon_cover(cf.points[i].state);
      if (i0 < 0 && q >= tol::cover_lo) i0 = static_cast<int>(i);
      if (i0 >= 0 && i1 < 0) {
        lmin = std::min(lmin, cf.points[i].lambda);
        lmax = std::max(lmax, cf.points[i].lambda);
      }
      if (i0 >= 0 && i1 < 0 && q >= tol::cover_hi) i1 = static_cast<int>(i);
    }
    std::vector<const BranchEvent*> f;
    for (const auto* e : folds_of(cf)) {
      if (i0 >= 0 && e->index >= i0 && (i1 < 0 || e->index < i1)) f.push_back(e);
    }
    const bool ok = i1 >= 0 && f.size() < 2 && lmin >= tol::cold_window_lo && lmax <= tol::cold_window_hi;
    d << "sigma 0: front branch from " << fmt("%.4f", e1->located_lambda);
    if (i1 >= 0) {
      d << ", hexagons invade over points " << i0 << ".." << i1 << " within lambda ["
        << fmt("%.4f", lmin) << ", " << fmt("%.4f", lmax) << "]";
    } else {
      d << ", front did not cross the domain in " << cf.points.size() << " points";
    }
    d << ", folds meanwhile " << list(f) << (ok ? "" : " (fold pair)") << "; ";
    pass = pass && ok;
  }

  // sigma = -0.35, 4x2: large cold hexagons through their fold, localized
  // branch from the first bifurcation on the small-amplitude side
  {
    const double sigma = tol::snake_sigma;
    const DomainSpec spec = build_domain(4, 2, 129, 49);
    ContSettings cs;
    cs.dsmax = 0.05;
    cs.bif_loc_tol = 1e-5;
    const ContProblem prob(spec, params(3.25, sigma), cs);
    const Field g = ansatz_reconstruct(params(3.25, sigma), AmplitudeState(-0.4, -0.4, -0.4), spec);
    TimestepSettings ts;
    ts.dt = 0.05;
    ts.max_steps = 40000;
    ts.residual_target = 1e-4;
    const IntegrationResult ir = integrate_to_residual(g, params(3.25, sigma), prob.lap, ts);
    if (!ir.reached) return {false, d.str() + "sigma -0.35: time integration did not settle"};
    const BranchPoint st = make_start_point(prob, ir.field, 3.25, 1);
    auto after_fold = [](const Branch& b) -> const BranchEvent* {
      bool fold = false;
      for (const auto& e : b.events) {
        if (e.kind == EventKind::Fold) {
          fold = true;
        } else if (fold && e.kind == EventKind::Bifurcation) {
          return &e;
        }
      }
      return nullptr;
    };
    StopRule sh;
    sh.lambda_min = lc;
    sh.lambda_max = 3.6;
    sh.max_points = 100;
    sh.until = [&](const Branch& b) { return after_fold(b) != nullptr; };
    const Branch ch = run_branch(prob, st, sh, "ch");
    const BranchEvent* e1 = after_fold(ch);
    if (!e1) return {false, d.str() + "sigma -0.35: no bifurcation past the hexagon fold"};
    StopRule sl;
    sl.lambda_min = lc;
    sl.lambda_max = 3.6;
    sl.max_points = 60;
    sl.until = [](const Branch& b) {
      return static_cast<int>(folds_of(b).size()) >= 2 * tol::sigma_snake_folds;
    };
    const Branch cl = run_branch(prob, branch_switch(prob, *e1, 1, 0.02).point, sl, "cl");
    const auto f = folds_of(cl);
    const bool ok = static_cast<int>(f.size()) >= tol::sigma_snake_folds;
    d << "sigma -0.35: stable hexagons from " << fmt("%.4f", st.lambda) << " (n_unstable "
      << st.n_unstable << "), localized branch from " << fmt("%.4f", e1->located_lambda) << ", "
      << f.size() << " folds " << list(f) << (ok ? "" : " (too few)") << "; ";
    pass = pass && ok && st.n_unstable == 0;
  }
  d << fmt("%.0f", seconds_since(t0)) << " s";
  return {pass, d.str()};
}

// ------------------------------------------------------------------ 7

Outcome criterion7() {
  const auto t0 = Clock::now();
  const GLFrontProfile hot = gl_front_solve(maxwell_point(MaxwellKind::Hot, 0.0), FrontKind::Hot);
  const GLFrontProfile cold = gl_front_solve(maxwell_point(MaxwellKind::Cold, 0.0), FrontKind::Cold);
  const double t = seconds_since(t0);
  auto ok = [](const GLFrontProfile& f) {
    return f.residual <= tol::front_residual && f.energy_drift <= tol::front_drift &&
           f.endpoint_error <= tol::front_endpoint;
  };
  auto describe = [](const char* name, const GLFrontProfile& f) {
    return std::string(name) + " front: lambda " + fmt("%.5f", f.lambda) + ", residual " +
           fmt("%.1e", f.residual) + ", drift " + fmt("%.1e", f.energy_drift) + ", endpoint " +
           fmt("%.1e", f.endpoint_error) + ", max slope " + fmt("%.5f", f.max_slope_a1);
  };
  Outcome o;
  o.pass = ok(hot) && ok(cold) && cold.max_slope_a1 < hot.max_slope_a1 && t < tol::runtime7;
  o.detail = describe("hot", hot) + "; " + describe("cold", cold) + "; " + fmt("%.2f", t) + " s";
  return o;
}

// ------------------------------------------------------------------ 8

struct Suite {
  std::vector<std::string> failed;
  int checks{0};
  void check(bool ok, const std::string& name) {
    ++checks;
    if (!ok) failed.push_back(name);
  }
};

void forms_and_modes(Suite& s, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  auto rnd = [&] { return Vec2<double>(nd(rng), nd(rng)); };
  for (double sigma : {0.0, -0.2, -0.35}) {
    for (double l : {2.6, 3.0, 3.2}) {
      const auto p = params(l, sigma);
      const Vec2<double> a = rnd();
      const Vec2<double> b = rnd();
      const Vec2<double> c = rnd();
      s.check((bilinear_B(p, a, b) - bilinear_B(p, b, a)).norm() <= tol::symmetry * (1 + bilinear_B(p, a, b).norm()),
              "B symmetry");
      const Vec2<double> abc = trilinear_C(p, a, b, c);
      const double sc = tol::symmetry * (1 + 1e3 * abc.norm());
      s.check((trilinear_C(p, b, c, a) - abc).norm() <= sc && (trilinear_C(p, c, a, b) - abc).norm() <= sc &&
                  (trilinear_C(p, b, a, c) - abc).norm() <= sc,
              "C symmetry");
      // Taylor consistency: remainder of the cubic expansion is O(e^4)
      const Vec2<double> ws = homogeneous_state(p);
      const Mat2<double> j = reaction_jacobian(p, ws);
      auto defect = [&](double e) {
        const Vec2<double> w = e * a;
        return (reaction(p, Vec2<double>(ws + w)) - j * w - bilinear_B(p, w, w) - trilinear_C(p, w, w, w)).norm();
      };
      const double d1 = defect(1e-2);
      const double d2 = defect(5e-3);
      s.check(d1 < 1e-13 || d2 < d1 / 10, "Taylor consistency");
      // linearization at w* independent of sigma
      s.check((j - reaction_jacobian(params(l), ws)).norm() <= 1e-13, "sigma invariance of J(w*)");

      const CriticalModes m = critical_modes(p);
      s.check(std::abs(m.phi.dot(m.phi_star) - 1) <= tol::pairing, "<Phi, Phi*> = 1");
      const Correctors cr = correctors(p);
      const Vec2<double> bb = bilinear_B(p, m.phi, m.phi);
      const double r = std::max({(dispersion_matrix(p, 0.0) * cr.phi0 + 2 * bb).norm(),
                                 (dispersion_matrix(p, 2 * m.k_c) * cr.phi1 + bb).norm(),
                                 (dispersion_matrix(p, std::sqrt(3.0) * m.k_c) * cr.phi2 + 2 * bb).norm()});
      s.check(r <= tol::corrector, "corrector residuals");
    }
  }
}

void landau_properties(Suite& s, std::mt19937& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (double l : {2.5, 2.65, 2.9, 3.1, 3.21}) {
    const LandauCoeffs c = landau_coefficients(params(l));
    for (int t = 0; t < 20; ++t) {
      const AmplitudeState a(ud(rng), ud(rng), ud(rng));
      Eigen::Vector3d g;
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-5;
        AmplitudeState ap = a;
        AmplitudeState am = a;
        ap(i) += h;
        am(i) -= h;
        g(i) = (potential_energy(c, ap) - potential_energy(c, am)) / (2 * h);
      }
      s.check((g - landau_rhs(c, a)).norm() <= tol::gradient, "energy gradient equals f");
    }
    for (const auto& fp : landau_fixed_points(c)) {
      s.check(landau_rhs(c, fp.state).norm() <= tol::fixed_point, "fixed-point certification");
    }
  }
}

void grid_properties(Suite& s, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  const DomainSpec spec = build_domain(1, 1, 21, 17);
  const NeumannLaplacian lap = build_laplacian(spec);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(spec.nodes());
  s.check((lap.matrix * one).cwiseAbs().maxCoeff() <= tol::laplacian, "Laplacian row sums");
  Eigen::VectorXd f(spec.nodes());
  Eigen::VectorXd g(spec.nodes());
  for (int k = 0; k < spec.nodes(); ++k) {
    f(k) = nd(rng);
    g(k) = nd(rng);
  }
  const double fg = lap.weights.dot((lap.matrix * f).cwiseProduct(g));
  const double gf = lap.weights.dot((lap.matrix * g).cwiseProduct(f));
  s.check(std::abs(fg - gf) <= tol::laplacian * (std::abs(fg) + 1), "Laplacian weighted symmetry");
  s.check(std::abs(lap.weights.dot(lap.matrix * f)) <= tol::laplacian * (lap.matrix * f).norm(),
          "Laplacian kernel of the adjoint");

  for (double sigma : {0.0, -0.3}) {
    const auto p = params(2.9, sigma);
    const Field u = make_initial_guess(spec, 2.9, 0.2, 0.1, 3.0);
    Eigen::VectorXd dir(2 * spec.nodes());
    for (int k = 0; k < dir.size(); ++k) dir(k) = nd(rng);
    const Eigen::VectorXd jd = assemble_jacobian(u, p, lap) * dir;
    const double h = 1e-6;
    const Eigen::VectorXd fd = (rd_residual(Field::from_stacked(spec, u.stacked() + h * dir), p, lap) -
                                rd_residual(Field::from_stacked(spec, u.stacked() - h * dir), p, lap)) /
                               (2 * h);
    s.check((fd - jd).norm() <= tol::jacobian_fd * jd.norm(), "Jacobian vs finite differences");

    const Field w = Field::constant(spec, 2.9, 1 / 2.9);
    const Field w1 = imex_step(w, p, lap, 0.1);
    s.check((w1.stacked() - w.stacked()).cwiseAbs().maxCoeff() <= tol::equilibrium, "IMEX equilibrium");
  }
}

int dense_unstable(const ContProblem& prob, const BranchPoint& p) {
  const Eigen::MatrixXd j(assemble_jacobian(p.state, prob.at(p.lambda), prob.lap));
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(j, false).eigenvalues();
  return count_unstable(ev);
}

void branch_rescans(Suite& s) {
  ContSettings cs;
  const ContProblem prob(build_domain(1, 1, 13, 11), params(3.0), cs);
  const DomainSpec& spec = prob.lap.spec;
  StopRule sr;
  sr.lambda_min = 3.0;
  sr.lambda_max = 3.3;
  sr.max_points = 40;
  const Branch hom = run_branch(prob, make_start_point(prob, Field::constant(spec, 3.25, 1 / 3.25), 3.25, -1), sr, "hom");
  s.check(!hom.events.empty(), "homogeneous branch has events");
  std::vector<Branch> branches{hom};
  if (!hom.events.empty()) {
    const SwitchResult sw = branch_switch(prob, hom.events.front(), 1, 0.02);
    StopRule s2 = sr;
    s2.lambda_min = 2.8;
    s2.max_points = 25;
    branches.push_back(run_branch(prob, sw.point, s2, "switched"));
  }
  for (const Branch& b : branches) {
    for (std::size_t k = 0; k < b.points.size(); ++k) {
      const BranchPoint& q = b.points[k];
      s.check(dense_unstable(prob, q) == q.n_unstable, "stored stability count re-scan");
      s.check(residual_inf(q.state, prob.at(q.lambda), prob.lap) <= 10 * cs.newton_tol, "stored residual");
      if (k == 0) continue;
      const BranchPoint& p = b.points[k - 1];
      const double chord = prob.norm(stack_point(q.state, q.lambda) - stack_point(p.state, p.lambda));
      const double arc = q.s - p.s;
      // the corrector lies on the hyperplane normal to the tangent, so the
      // chord is at least the step and exceeds it only at second order
      s.check(arc > 0 && chord >= arc * (1 - 1e-6) && chord <= 1.02 * arc, "arclength re-scan");
      int change = 0;
      for (const auto& e : b.events) {
        if (e.index == static_cast<int>(k) - 1) change += e.count_after - e.count_before;
      }
      s.check(change == q.n_unstable - p.n_unstable, "event consistency re-scan");
    }
  }
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  Suite s;
  std::mt19937 rng(2024);
  forms_and_modes(s, rng);
  landau_properties(s, rng);
  grid_properties(s, rng);
  branch_rescans(s);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = s.failed.empty() && t < tol::runtime8;
  o.detail = std::to_string(s.checks - s.failed.size()) + "/" + std::to_string(s.checks) + " checks";
  if (!s.failed.empty()) {
    std::vector<std::string> kinds = s.failed;
    std::sort(kinds.begin(), kinds.end());
    kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
    o.detail += ", failed:";
    for (const auto& k : kinds) o.detail += " [" + k + "]";
  }
  o.detail += ", " + fmt("%.1f", t) + " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};
  const std::function<Outcome()> fns[] = {criterion1, criterion2, criterion3, criterion4,
                                          criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int c : which) {
    Outcome o;
    try {
      o = fns[c - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}


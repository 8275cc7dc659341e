#include "turing/continuation.hpp"

#include "turing/timestep.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace turing {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Lu = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

void add_jacobian_triplets(std::vector<Eigen::Triplet<double>>& t, const Field& f,
                           const ModelParams<double>& p, const NeumannLaplacian& lap) {
  const int n = f.spec.nodes();
  const SpMat& l = lap.matrix;
  for (int c = 0; c < l.outerSize(); ++c) {
    for (SpMat::InnerIterator it(l, c); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(n + it.row(), n + it.col(), p.d * it.value());
    }
  }
  for (int k = 0; k < n; ++k) {
    const Mat2<double> jk = reaction_jacobian(p, Vec2<double>(f.u(k), f.v(k)));
    t.emplace_back(k, k, jk(0, 0));
    t.emplace_back(k, n + k, jk(0, 1));
    t.emplace_back(n + k, k, jk(1, 0));
    t.emplace_back(n + k, n + k, jk(1, 1));
  }
}

// [[J, R_lambda], [xi tau_U^T, tau_lambda]]; R_lambda is 1 on every v row.
SpMat bordered_matrix(const ContProblem& prob, const Field& f, double lambda,
                      const VectorXd& tau) {
  const int n = f.spec.nodes();
  const int m = 2 * n;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(16 * n);
  add_jacobian_triplets(t, f, prob.at(lambda), prob.lap);
  for (int k = 0; k < n; ++k) t.emplace_back(n + k, m, 1.0);
  const double xi = prob.xi();
  for (int k = 0; k < m; ++k) {
    if (tau(k) != 0.0) t.emplace_back(m, k, xi * tau(k));
  }
  t.emplace_back(m, m, tau(m));
  SpMat a(m + 1, m + 1);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

VectorXd unit_last(int size) {
  VectorXd e = VectorXd::Zero(size);
  e(size - 1) = 1.0;
  return e;
}

BranchPoint finish_point(const Field& f, double lambda, const VectorXd& tangent, double s,
                         double ds, double residual, int iterations) {
  BranchPoint bp;
  bp.s = s;
  bp.lambda = lambda;
  bp.state = f;
  bp.tangent = tangent;
  bp.norms = point_norms(f);
  bp.ds = ds;
  bp.residual = residual;
  bp.newton_iterations = iterations;
  return bp;
}

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

void ContSettings::validate() const {
  if (!(dsmin > 0) || !(dsmin <= ds0) || !(ds0 <= dsmax)) {
    throw std::invalid_argument("ContSettings: need 0 < dsmin <= ds0 <= dsmax");
  }
  if (!(newton_tol > 0)) throw std::invalid_argument("ContSettings: newton_tol must be positive");
  if (max_newton < 1) throw std::invalid_argument("ContSettings: max_newton must be >= 1");
  if (n_eigs < 1) throw std::invalid_argument("ContSettings: n_eigs must be >= 1");
  if (!(bif_loc_tol > 0)) throw std::invalid_argument("ContSettings: bif_loc_tol must be positive");
  if (!(grow >= 1)) throw std::invalid_argument("ContSettings: grow must be >= 1");
}

const char* to_string(EventKind k) { return k == EventKind::Fold ? "fold" : "bifurcation"; }

PointNorms point_norms(const Field& f) {
  PointNorms n;
  n.l2 = lp_norm(f, Component::U, 2.0);
  n.l8 = lp_norm(f, Component::U, 8.0);
  n.min_u = f.u.minCoeff();
  n.max_u = f.u.maxCoeff();
  n.u00 = f.u_center();
  return n;
}

ContProblem::ContProblem(const DomainSpec& spec, const ModelParams<double>& p,
                         const ContSettings& s)
    : lap(build_laplacian(spec)), params(p), settings(s) {
  settings.validate();
  if (!(p.d > 0) || !std::isfinite(p.sigma)) {
    throw std::invalid_argument("ContProblem: need d > 0 and finite sigma");
  }
}

double ContProblem::dot(const VectorXd& a, const VectorXd& b) const {
  const Eigen::Index m = a.size() - 1;
  return xi() * a.head(m).dot(b.head(m)) + a(m) * b(m);
}

SpMat assemble_jacobian(const Field& f, const ModelParams<double>& p,
                        const NeumannLaplacian& lap) {
  const int n = f.spec.nodes();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(14 * n);
  add_jacobian_triplets(t, f, p, lap);
  SpMat a(2 * n, 2 * n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

NewtonResult newton_correct(const Field& guess, const ModelParams<double>& p,
                            const NeumannLaplacian& lap, double tol, int max_iter) {
  NewtonResult r;
  r.state = guess;
  VectorXd res = rd_residual(r.state, p, lap);
  r.residual = res.lpNorm<Eigen::Infinity>();
  const double start = r.residual;
  while (r.residual > tol && r.iterations < max_iter) {
    Lu lu;
    lu.compute(assemble_jacobian(r.state, p, lap));
    if (lu.info() != Eigen::Success) break;
    const VectorXd dz = lu.solve(-res);
    r.state = Field::from_stacked(guess.spec, r.state.stacked() + dz);
    ++r.iterations;
    try {
      res = rd_residual(r.state, p, lap);
    } catch (const std::domain_error&) {
      break;
    }
    r.residual = res.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(r.residual) || r.residual > 1e6 * std::max(start, 1.0)) break;
  }
  r.converged = r.residual <= tol;
  return r;
}

VectorXd stack_point(const Field& f, double lambda) {
  VectorXd z(2 * f.spec.nodes() + 1);
  z << f.u, f.v, lambda;
  return z;
}

VectorXd compute_tangent(const ContProblem& prob, const Field& f, double lambda,
                         const VectorXd& orient) {
  const int m = 2 * f.spec.nodes() + 1;
  const VectorXd border = orient.size() == m ? orient : unit_last(m);
  Lu lu;
  lu.compute(bordered_matrix(prob, f, lambda, border));
  if (lu.info() != Eigen::Success) throw std::runtime_error("compute_tangent: singular system");
  VectorXd t = lu.solve(unit_last(m));
  t /= prob.norm(t);
  if (prob.dot(t, border) < 0) t = -t;
  return t;
}

std::optional<BranchPoint> extended_newton(const ContProblem& prob, const BranchPoint& from,
                                           double ds, const VectorXd* direction) {
  const ContSettings& st = prob.settings;
  const VectorXd& tau = direction ? *direction : from.tangent;
  const DomainSpec& spec = from.state.spec;
  const int n = spec.nodes();
  const int m = 2 * n;
  const VectorXd zpred = stack_point(from.state, from.lambda) + ds * tau;
  VectorXd z = zpred;

  auto eval = [&](const VectorXd& zz, VectorXd& f) {
    const Field fld = Field::from_stacked(spec, zz);
    f.resize(m + 1);
    f.head(m) = rd_residual(fld, prob.at(zz(m)), prob.lap);
    f(m) = prob.dot(zz - zpred, tau);
  };

  VectorXd fz;
  try {
    if (!(z(m) > 0)) return std::nullopt;
    eval(z, fz);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
  double res = fz.head(m).lpNorm<Eigen::Infinity>();
  const double res0 = std::max(res, 1e-3);
  int it = 0;
  Lu lu;
  bool factored = false;
  while (true) {
    const bool converged = res <= st.newton_tol && std::abs(fz(m)) <= st.newton_tol;
    if (converged && factored) break;
    if (it >= st.max_newton) return std::nullopt;
    const Field fld = Field::from_stacked(spec, z);
    lu.compute(bordered_matrix(prob, fld, z(m), tau));
    if (lu.info() != Eigen::Success) return std::nullopt;
    factored = true;
    if (converged) break;
    const VectorXd dz = lu.solve(-fz);
    z += dz;
    ++it;
    if (!(z(m) > 0) || !z.allFinite()) return std::nullopt;
    try {
      eval(z, fz);
    } catch (const std::domain_error&) {
      return std::nullopt;
    }
    res = fz.head(m).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res) || res > 1e3 * res0) return std::nullopt;
  }

  // Tangent from the last factorization (taken at or next to the solution).
  VectorXd t = lu.solve(unit_last(m + 1));
  if (!t.allFinite()) return std::nullopt;
  t /= prob.norm(t);
  if (prob.dot(t, tau) < 0) t = -t;
  const Field sol = Field::from_stacked(spec, z);
  return finish_point(sol, z(m), t, from.s + std::abs(ds), std::abs(ds), res, it);
}

int stability_count(const ContProblem& prob, const Field& f, double lambda) {
  const SpMat j = assemble_jacobian(f, prob.at(lambda), prob.lap);
  EigsSettings es;
  es.n_eigs = prob.settings.n_eigs;
  es.shift = prob.settings.shift;
  const int cap = std::min<int>(8 * prob.settings.n_eigs, static_cast<int>(j.rows()));
  for (;;) {
    const EigsResult r = eigs_near_shift(j, es);
    if (!r.converged) throw std::runtime_error("stability_count: eigensolver did not converge");
    // Unstable eigenvalues outside the disk of the n_eigs nearest are missed,
    // so the disk grows while unstable ones reach toward its rim.
    const double radius = (r.values.array() - r.shift).abs().maxCoeff();
    double reach = 0;
    for (Eigen::Index k = 0; k < r.values.size(); ++k) {
      if (r.values(k).real() > 0) reach = std::max(reach, std::abs(r.values(k) - r.shift));
    }
    if (reach <= 0.5 * radius || es.n_eigs >= cap) return count_unstable(r.values);
    es.n_eigs = std::min(2 * es.n_eigs, cap);
  }
}

BranchPoint make_start_point(const ContProblem& prob, const Field& guess, double lambda,
                             int direction) {
  const NewtonResult nr = newton_correct(guess, prob.at(lambda), prob.lap,
                                         prob.settings.newton_tol, 4 * prob.settings.max_newton);
  if (!nr.converged) {
    throw std::runtime_error("make_start_point: Newton failed, residual " +
                             std::to_string(nr.residual));
  }
  const int m = 2 * guess.spec.nodes() + 1;
  VectorXd orient = unit_last(m);
  if (direction < 0) orient = -orient;
  VectorXd t = compute_tangent(prob, nr.state, lambda, unit_last(m));
  if (prob.dot(t, orient) < 0) t = -t;
  BranchPoint bp = finish_point(nr.state, lambda, t, 0.0, prob.settings.ds0, nr.residual,
                                nr.iterations);
  if (prob.settings.stability) bp.n_unstable = stability_count(prob, bp.state, lambda);
  return bp;
}

namespace {

struct Bracket {
  double s;  // arclength offset from the left point
  int count;
  BranchPoint point;
};

void locate_bifurcations(const ContProblem& prob, const BranchPoint& a, const Bracket& lo,
                         const Bracket& hi, int k, std::vector<BranchEvent>& out) {
  const int diff = std::abs(hi.count - lo.count);
  if (diff == 0) return;
  const double tol = prob.settings.bif_loc_tol;
  std::optional<BranchPoint> mid;
  const double smid = 0.5 * (lo.s + hi.s);
  if (hi.s - lo.s > tol) mid = extended_newton(prob, a, smid);
  if (!mid) {
    // resolved to tolerance (or unresolvable): one event per unit change
    for (int i = 0; i < diff; ++i) {
      BranchEvent ev;
      ev.index = k;
      ev.kind = EventKind::Bifurcation;
      ev.located_lambda = 0.5 * (lo.point.lambda + hi.point.lambda);
      ev.count_before = lo.count;
      ev.count_after = hi.count;
      ev.located = lo.point;
      out.push_back(ev);
    }
    return;
  }
  mid->n_unstable = stability_count(prob, mid->state, mid->lambda);
  const Bracket m{smid, mid->n_unstable, *mid};
  locate_bifurcations(prob, a, lo, m, k, out);
  locate_bifurcations(prob, a, m, hi, k, out);
}

}  // namespace

std::vector<BranchEvent> detect_events(const ContProblem& prob, const Branch& branch, int k) {
  std::vector<BranchEvent> out;
  if (k < 0 || k + 1 >= static_cast<int>(branch.points.size())) return out;
  const BranchPoint& a = branch.points[k];
  const BranchPoint& b = branch.points[k + 1];
  const double ds = b.s - a.s;
  const bool fold = sign_of(a.tangent_lambda()) != sign_of(b.tangent_lambda());
  const bool have_counts = a.n_unstable >= 0 && b.n_unstable >= 0;
  const int dcount = have_counts ? std::abs(b.n_unstable - a.n_unstable) : 0;
  const bool locate = prob.settings.locate_events;

  if (fold) {
    BranchEvent ev;
    ev.index = k;
    ev.kind = EventKind::Fold;
    ev.count_before = a.n_unstable;
    ev.count_after = b.n_unstable;
    // bisection on the sign of the tangent's lambda component
    double lo = 0;
    double hi = ds;
    BranchPoint best = std::abs(a.tangent_lambda()) < std::abs(b.tangent_lambda()) ? a : b;
    while (locate && hi - lo > prob.settings.bif_loc_tol) {
      const double mid = 0.5 * (lo + hi);
      const auto pm = extended_newton(prob, a, mid);
      if (!pm) break;
      if (sign_of(pm->tangent_lambda()) == sign_of(a.tangent_lambda())) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (std::abs(pm->tangent_lambda()) < std::abs(best.tangent_lambda())) best = *pm;
    }
    if (!locate) {
      // linear interpolation of lambda where tangent_lambda vanishes
      const double ta = a.tangent_lambda();
      const double tb = b.tangent_lambda();
      const double w = ta / (ta - tb);
      best.lambda = a.lambda + w * (b.lambda - a.lambda);
    }
    ev.located = best;
    ev.located_lambda = best.lambda;
    out.push_back(ev);
  }

  const int bifs = dcount - (fold && dcount >= 1 ? 1 : 0);
  if (bifs > 0) {
    if (fold || !locate) {
      for (int i = 0; i < bifs; ++i) {
        BranchEvent ev;
        ev.index = k;
        ev.kind = EventKind::Bifurcation;
        ev.count_before = a.n_unstable;
        ev.count_after = b.n_unstable;
        ev.located = b;
        ev.located_lambda = 0.5 * (a.lambda + b.lambda);
        out.push_back(ev);
      }
    } else {
      locate_bifurcations(prob, a, Bracket{0.0, a.n_unstable, a},
                          Bracket{ds, b.n_unstable, b}, k, out);
    }
  }
  return out;
}

SwitchResult branch_switch(const ContProblem& prob, const BranchEvent& event, int direction,
                           double perturbation) {
  if (direction != 1 && direction != -1) {
    throw std::invalid_argument("branch_switch: direction must be +1 or -1");
  }
  if (!(perturbation > 0)) throw std::invalid_argument("branch_switch: perturbation must be positive");
  const BranchPoint& z0 = event.located;
  const DomainSpec& spec = z0.state.spec;
  const int n = spec.nodes();
  const int m = 2 * n;

  EigsSettings es;
  es.n_eigs = std::min(prob.settings.n_eigs, 8);
  es.shift = prob.settings.shift;
  const EigsResult er =
      eigs_near_shift(assemble_jacobian(z0.state, prob.at(z0.lambda), prob.lap), es, true);
  int best = -1;
  for (int i = 0; i < er.values.size(); ++i) {
    if (std::abs(er.values(i).imag()) > 1e-8) continue;
    if (best < 0 || std::abs(er.values(i)) < std::abs(er.values(best))) best = i;
  }
  if (best < 0) throw std::runtime_error("branch_switch: no real eigenvalue near zero");

  VectorXd phi = VectorXd::Zero(m + 1);
  phi.head(m) = er.vectors.col(best).real();
  phi -= prob.dot(phi, z0.tangent) * z0.tangent;
  phi /= prob.norm(phi);
  // sign convention: +1 raises u at the centre
  const Field pf = Field::from_stacked(spec, phi.head(m));
  double c = pf.u_center();
  if (std::abs(c) < 1e-8 * pf.u.cwiseAbs().maxCoeff()) {
    Eigen::Index imax = 0;
    pf.u.cwiseAbs().maxCoeff(&imax);
    c = pf.u(imax);
  }
  if (c < 0) phi = -phi;

  const VectorXd zstar = stack_point(z0.state, z0.lambda);
  double p = perturbation;
  for (int attempt = 0; attempt < 4; ++attempt, p *= 3.0) {
    auto np = extended_newton(prob, z0, direction * p, &phi);
    if (!np) continue;
    const VectorXd dz = stack_point(np->state, np->lambda) - zstar;
    if (std::abs(prob.dot(dz, z0.tangent)) > 10.0 * p) continue;  // fell back to the old branch
    VectorXd t = compute_tangent(prob, np->state, np->lambda, dz);
    np->tangent = t;
    np->s = p;
    np->ds = p;
    if (prob.settings.stability) np->n_unstable = stability_count(prob, np->state, np->lambda);
    return SwitchResult{*np, phi, p};
  }
  throw std::runtime_error("branch_switch: could not leave the old branch");
}

Branch run_branch(const ContProblem& prob, const BranchPoint& start, const StopRule& stop,
                  const std::string& label, const PointObserver& observer) {
  const ContSettings& st = prob.settings;
  Branch br;
  br.label = label;
  br.points.push_back(start);
  if (st.stability && br.points[0].n_unstable < 0) {
    br.points[0].n_unstable = stability_count(prob, start.state, start.lambda);
  }
  if (observer) observer(br);
  double ds = std::clamp(start.ds > 0 ? start.ds : st.ds0, st.dsmin, st.dsmax);
  while (static_cast<int>(br.points.size()) < stop.max_points) {
    const BranchPoint& last = br.points.back();
    std::optional<BranchPoint> next;
    try {
      next = extended_newton(prob, last, ds);
    } catch (const std::exception&) {
      next.reset();
    }
    // reject steps that turn the tangent sharply: likely a branch jump
    if (next && prob.dot(next->tangent, last.tangent) < 0.9 && ds > 4 * st.dsmin) next.reset();
    if (!next) {
      ds *= 0.5;
      if (ds < st.dsmin) {
        br.stop_reason = "step size below dsmin";
        break;
      }
      continue;
    }
    if (st.stability) {
      try {
        next->n_unstable = stability_count(prob, next->state, next->lambda);
      } catch (const std::exception& e) {
        br.stop_reason = std::string("eigensolver failure: ") + e.what();
        break;
      }
    }
    br.points.push_back(std::move(*next));
    const int k = static_cast<int>(br.points.size()) - 2;
    auto evs = detect_events(prob, br, k);
    br.events.insert(br.events.end(), evs.begin(), evs.end());
    const BranchPoint& np = br.points.back();
    if (np.newton_iterations <= st.easy_newton) ds = std::min(ds * st.grow, st.dsmax);
    if (observer) observer(br);
    if (np.lambda < stop.lambda_min || np.lambda > stop.lambda_max) {
      br.stop_reason = "lambda left the range";
      break;
    }
    if (stop.until && stop.until(br)) {
      br.stop_reason = "stop condition met";
      break;
    }
  }
  if (br.stop_reason.empty()) br.stop_reason = "max points reached";
  return br;
}

void write_branch_csv(const std::filesystem::path& path, const Branch& b) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << "s,lambda,L2_u,L8_u,min_u,max_u,u00,n_unstable,ds,event_flag\n";
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    int flag = 0;
    for (const auto& ev : b.events) {
      if (ev.index == static_cast<int>(i)) flag |= ev.kind == EventKind::Fold ? 1 : 2;
    }
    const BranchPoint& p = b.points[i];
    out << p.s << "," << p.lambda << "," << p.norms.l2 << "," << p.norms.l8 << ","
        << p.norms.min_u << "," << p.norms.max_u << "," << p.norms.u00 << "," << p.n_unstable
        << "," << p.ds << "," << flag << "\n";
  }
}

void write_events_csv(const std::filesystem::path& path, const Branch& b) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(12);
  out << "index,kind,located_lambda\n";
  for (const auto& ev : b.events) {
    out << ev.index << "," << to_string(ev.kind) << "," << ev.located_lambda << "\n";
  }
}

}  // namespace turing

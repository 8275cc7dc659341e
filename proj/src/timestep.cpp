#include "turing/timestep.hpp"

#include <stdexcept>

namespace turing {

Eigen::VectorXd rd_residual(const Field& f, const ModelParams<double>& p,
                            const NeumannLaplacian& lap) {
  const int n = f.spec.nodes();
  Eigen::VectorXd r(2 * n);
  r.head(n) = lap.matrix * f.u;
  r.tail(n) = p.d * (lap.matrix * f.v);
  for (int k = 0; k < n; ++k) {
    const Vec2<double> nk = reaction(p, Vec2<double>(f.u(k), f.v(k)));
    r(k) += nk(0);
    r(n + k) += nk(1);
  }
  return r;
}

double residual_inf(const Field& f, const ModelParams<double>& p, const NeumannLaplacian& lap) {
  return rd_residual(f, p, lap).lpNorm<Eigen::Infinity>();
}

void TimestepSettings::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("timestep: dt must be positive");
  if (!(residual_target > 0)) throw std::invalid_argument("timestep: residual_target must be positive");
  if (max_steps < 0) throw std::invalid_argument("timestep: max_steps must be non-negative");
  if (!(min_dt > 0) || min_dt > dt) throw std::invalid_argument("timestep: need 0 < min_dt <= dt");
}

ImexStepper::ImexStepper(const NeumannLaplacian& lap, double d, double dt)
    : lap_(&lap), d_(d), dt_(dt) {
  if (!(dt > 0)) throw std::invalid_argument("ImexStepper: dt must be positive");
  factorize();
}

void ImexStepper::set_dt(double dt) {
  if (!(dt > 0)) throw std::invalid_argument("ImexStepper: dt must be positive");
  if (dt == dt_) return;
  dt_ = dt;
  factorize();
}

void ImexStepper::factorize() {
  const int n = lap_->spec.nodes();
  Eigen::SparseMatrix<double> id(n, n);
  id.setIdentity();
  const Eigen::SparseMatrix<double> mu = id - dt_ * lap_->matrix;
  const Eigen::SparseMatrix<double> mv = id - (dt_ * d_) * lap_->matrix;
  lu_u_.compute(mu);
  lu_v_.compute(mv);
  if (lu_u_.info() != Eigen::Success || lu_v_.info() != Eigen::Success) {
    throw std::runtime_error("ImexStepper: factorization failed");
  }
}

Eigen::VectorXd ImexStepper::step_stacked(const Eigen::VectorXd& z,
                                          const Eigen::VectorXd& nz) const {
  const int n = lap_->spec.nodes();
  const Eigen::VectorXd rhs = z + dt_ * nz;
  Eigen::VectorXd out(2 * n);
  out.head(n) = lu_u_.solve(rhs.head(n));
  out.tail(n) = lu_v_.solve(rhs.tail(n));
  return out;
}

Field ImexStepper::step(const Field& f, const ModelParams<double>& p) const {
  const int n = f.spec.nodes();
  Eigen::VectorXd nz(2 * n);
  for (int k = 0; k < n; ++k) {
    const Vec2<double> nk = reaction(p, Vec2<double>(f.u(k), f.v(k)));
    nz(k) = nk(0);
    nz(n + k) = nk(1);
  }
  return Field::from_stacked(f.spec, step_stacked(f.stacked(), nz));
}

Field imex_step(const Field& f, const ModelParams<double>& p, const NeumannLaplacian& lap,
                double dt) {
  return ImexStepper(lap, p.d, dt).step(f, p);
}

IntegrationResult integrate_to_residual(const Field& f, const ModelParams<double>& p,
                                        const NeumannLaplacian& lap,
                                        const TimestepSettings& settings,
                                        const StepObserver& observer) {
  settings.validate();
  require_valid(p);
  IntegrationResult out;
  out.field = f;
  out.residual = residual_inf(f, p, lap);
  out.final_dt = settings.dt;
  if (out.residual <= settings.residual_target) {
    out.reached = true;
    return out;
  }
  ImexStepper stepper(lap, p.d, settings.dt);
  while (out.steps < settings.max_steps) {
    Field next = stepper.step(out.field, p);
    const double r = residual_inf(next, p, lap);
    if (!std::isfinite(r) || r > 10.0 * out.residual) {
      if (stepper.dt() * 0.5 < settings.min_dt) break;
      stepper.set_dt(stepper.dt() * 0.5);
      continue;
    }
    out.time += stepper.dt();
    out.field = std::move(next);
    out.residual = r;
    ++out.steps;
    if (observer) observer(out.steps, out.time, out.field, r);
    if (r <= settings.residual_target) {
      out.reached = true;
      break;
    }
  }
  out.final_dt = stepper.dt();
  return out;
}

}  // namespace turing

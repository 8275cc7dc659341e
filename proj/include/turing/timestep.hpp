// Stationary residual of the discretized reaction-diffusion system and
// semi-implicit (IMEX Euler) time integration.
#pragma once

#include "turing/grid.hpp"
#include "turing/model.hpp"

#include <Eigen/SparseLU>

#include <functional>

namespace turing {

/// R(U) = D Lap U + N(U), stacked as [u; v].
Eigen::VectorXd rd_residual(const Field& f, const ModelParams<double>& p,
                            const NeumannLaplacian& lap);

/// Max norm of R(U) over all nodes and both components.
double residual_inf(const Field& f, const ModelParams<double>& p, const NeumannLaplacian& lap);

struct TimestepSettings {
  double dt{0.1};
  int max_steps{10000};
  double residual_target{1e-3};
  double min_dt{1e-6};

  void validate() const;
};

/// Caches the LU factors of (I - dt Lap) and (I - dt d Lap) for repeated steps.
class ImexStepper {
 public:
  ImexStepper(const NeumannLaplacian& lap, double d, double dt);

  double dt() const { return dt_; }
  void set_dt(double dt);

  /// Solves (I - dt D Lap) z1 = z + dt nz for a given explicit term nz.
  Eigen::VectorXd step_stacked(const Eigen::VectorXd& z, const Eigen::VectorXd& nz) const;

  Field step(const Field& f, const ModelParams<double>& p) const;

 private:
  void factorize();

  const NeumannLaplacian* lap_;
  double d_;
  double dt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_u_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_v_;
};

/// One IMEX Euler step: (I - dt D Lap) U1 = U0 + dt N(U0).
Field imex_step(const Field& f, const ModelParams<double>& p, const NeumannLaplacian& lap,
                double dt);

struct IntegrationResult {
  Field field;
  int steps{0};
  double time{0};
  double residual{0};
  double final_dt{0};
  bool reached{false};
};

/// Called after every accepted step with (step, time, state, residual).
using StepObserver = std::function<void(int, double, const Field&, double)>;

/// Steps until residual_inf <= residual_target or max_steps. A step that
/// raises the residual more than tenfold is rejected and dt is halved.
IntegrationResult integrate_to_residual(const Field& f, const ModelParams<double>& p,
                                        const NeumannLaplacian& lap,
                                        const TimestepSettings& settings,
                                        const StepObserver& observer = {});

}  // namespace turing

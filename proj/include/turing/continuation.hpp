// Pseudo-arclength continuation of stationary states: Newton correction,
// stability counts, fold and bifurcation detection, branch switching.
#pragma once

#include "turing/eigs.hpp"
#include "turing/grid.hpp"
#include "turing/model.hpp"

#include <Eigen/Sparse>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace turing {

struct ContSettings {
  double ds0{0.02};
  double dsmin{1e-5};
  double dsmax{0.1};
  double newton_tol{1e-8};
  int max_newton{10};
  int n_eigs{20};
  double bif_loc_tol{1e-4};
  double shift{1e-3};
  double grow{1.3};
  int easy_newton{3};
  bool stability{true};
  bool locate_events{true};

  void validate() const;
};

struct PointNorms {
  double l2{0};
  double l8{0};
  double min_u{0};
  double max_u{0};
  double u00{0};
};

PointNorms point_norms(const Field& f);

struct BranchPoint {
  double s{0};
  double lambda{0};
  Field state;
  Eigen::VectorXd tangent;  // (dU, dlambda), unit length in the weighted norm
  int n_unstable{-1};       // -1: not computed
  PointNorms norms;
  double ds{0};
  double residual{0};
  int newton_iterations{0};

  double tangent_lambda() const { return tangent(tangent.size() - 1); }
};

enum class EventKind { Fold, Bifurcation };

const char* to_string(EventKind k);

struct BranchEvent {
  int index{0};  // last accepted point before the event
  EventKind kind{EventKind::Fold};
  double located_lambda{0};
  int count_before{-1};
  int count_after{-1};
  BranchPoint located;
};

struct Branch {
  std::string label;
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
  std::string stop_reason;
};

struct StopRule {
  double lambda_min{0.5};
  double lambda_max{5.0};
  int max_points{200};
  std::function<bool(const Branch&)> until;  // optional extra stop test after each point
};

/// Shared, read-only problem data: grid operator, fixed d and sigma.
struct ContProblem {
  NeumannLaplacian lap;
  ModelParams<double> params;  // lambda is ignored; the branch carries it
  ContSettings settings;

  ContProblem(const DomainSpec& spec, const ModelParams<double>& p, const ContSettings& s);

  ModelParams<double> at(double lambda) const { return params.with_lambda(lambda); }
  /// Weight of the state block in the arclength inner product, 1/(nx ny).
  double xi() const { return 1.0 / lap.spec.nodes(); }
  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const { return std::sqrt(dot(a, a)); }
};

/// D Lap + blockdiag of the pointwise reaction Jacobian, unknowns [u; v].
Eigen::SparseMatrix<double> assemble_jacobian(const Field& f, const ModelParams<double>& p,
                                              const NeumannLaplacian& lap);

struct NewtonResult {
  Field state;
  int iterations{0};
  double residual{0};
  bool converged{false};
};

/// Plain Newton for R(U) = 0 at fixed lambda.
NewtonResult newton_correct(const Field& guess, const ModelParams<double>& p,
                            const NeumannLaplacian& lap, double tol, int max_iter);

/// z = (U, lambda) stacked.
Eigen::VectorXd stack_point(const Field& f, double lambda);

/// Tangent at a solution point, oriented to have positive weighted product
/// with `orient` (or with +lambda when orient is empty).
Eigen::VectorXd compute_tangent(const ContProblem& prob, const Field& f, double lambda,
                                const Eigen::VectorXd& orient);

/// Pseudo-arclength corrector. Solves R = 0 together with
/// <z - z_pred, direction> = 0 from the predictor z_pred = from + ds * direction.
/// Returns nothing if Newton fails.
std::optional<BranchPoint> extended_newton(const ContProblem& prob, const BranchPoint& from,
                                           double ds,
                                           const Eigen::VectorXd* direction = nullptr);

/// Number of eigenvalues with positive real part among the n_eigs nearest
/// to the shift.
int stability_count(const ContProblem& prob, const Field& f, double lambda);

/// Corrects a guess at fixed lambda and builds a branch point whose tangent
/// points toward increasing (direction > 0) or decreasing lambda.
BranchPoint make_start_point(const ContProblem& prob, const Field& guess, double lambda,
                             int direction);

/// Fold and bifurcation events between points k and k+1 of a branch,
/// each located by bisection in arclength to bif_loc_tol.
std::vector<BranchEvent> detect_events(const ContProblem& prob, const Branch& branch, int k);

struct SwitchResult {
  BranchPoint point;
  Eigen::VectorXd kernel;  // unit kernel direction in (U, lambda) space
  double perturbation{0};
};

/// Steps off a located bifurcation along the near-kernel eigenvector.
/// direction = +1 moves toward larger u at the domain centre.
SwitchResult branch_switch(const ContProblem& prob, const BranchEvent& event, int direction,
                           double perturbation);

/// Called after every accepted point (branch so far).
using PointObserver = std::function<void(const Branch&)>;

Branch run_branch(const ContProblem& prob, const BranchPoint& start, const StopRule& stop,
                  const std::string& label = "", const PointObserver& observer = {});

void write_branch_csv(const std::filesystem::path& path, const Branch& b);
void write_events_csv(const std::filesystem::path& path, const Branch& b);

}  // namespace turing

// Landau and Ginzburg-Landau reduction at the Turing instability: critical
// modes, quadratic correctors, coefficients, fixed points, energies,
// Maxwell points and stationary amplitude fronts.
#pragma once

#include "turing/grid.hpp"
#include "turing/model.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace turing {

struct CriticalModes {
  Vec2<double> phi;       // eigenvector of L(k_c) for mu_+, first component 1
  Vec2<double> phi_star;  // adjoint eigenvector, <phi, phi_star> = 1
  double mu{0};
  double k_c{0};
};

/// Throws std::domain_error if mu_+(k_c) is part of a complex pair.
CriticalModes critical_modes(const ModelParams<double>& p);

struct Correctors {
  Vec2<double> phi0;  // wave vector 0
  Vec2<double> phi1;  // |k| = 2 k_c
  Vec2<double> phi2;  // |k| = sqrt(3) k_c
};

/// Throws std::domain_error naming k if a dispersion matrix is singular.
Correctors correctors(const ModelParams<double>& p);

struct LandauCoeffs {
  double c0{0};
  double c1{0};
  double c2{0};
  double c3{0};
  double c4{0};
  double c31{0};  // first-order ansatz (correctors set to zero)
  double c41{0};
  double lambda{0};
  double sigma{0};
};

LandauCoeffs landau_coefficients(const ModelParams<double>& p);

/// Real amplitudes (A1, A2, A3).
using AmplitudeState = Eigen::Vector3d;

/// Right-hand side f of the real Landau system.
Eigen::Vector3d landau_rhs(const LandauCoeffs& c, const AmplitudeState& a);
Eigen::Matrix3d landau_jacobian(const LandauCoeffs& c, const AmplitudeState& a);

enum class FixedPointType { Zero, StripePlus, StripeMinus, HexagonPlus, HexagonMinus, Mixed };

const char* to_string(FixedPointType t);

struct FixedPoint {
  AmplitudeState state;
  FixedPointType type{FixedPointType::Zero};
};

/// Stripe amplitudes T+- = +-sqrt(-c1/c3); false if not real.
bool stripe_amplitude(const LandauCoeffs& c, int sign, double& out);
/// Hexagon amplitudes P+- for given cubic coefficients c3, c4; false if not real.
bool hexagon_amplitude(double c1, double c2, double c3, double c4, int sign, double& out);

/// All real fixed points with A2 = A3 (zero, stripes, hexagons, mixed modes).
std::vector<FixedPoint> landau_fixed_points(const LandauCoeffs& c);

/// Number of eigenvalues with positive real part of the real 3x3 Jacobian.
int landau_stability(const LandauCoeffs& c, const AmplitudeState& a);

enum class EnergyVariant { Standard, Mixed };

/// Standard: E = sum(c1/2 A^2 + c3/4 A^4) + c2 A1A2A3 + c4/2 sum_{i<j} Ai^2 Aj^2,
/// with grad E = f. Mixed: the quartic self term interpolates between c3 at
/// the stripe amplitude S = T+ and c31 at the first-order hexagon amplitude
/// H = P+(c31, c41); the cross term uses c41. Throws std::domain_error if
/// S or H does not exist or S = H.
double potential_energy(const LandauCoeffs& c, const AmplitudeState& a,
                        EnergyVariant variant = EnergyVariant::Standard);

/// Gradient of the mixed energy (the right-hand side of the mixed system).
Eigen::Vector3d mixed_rhs(const LandauCoeffs& c, const AmplitudeState& a);

/// S = T+ and H = P+(c31, c41) used by the mixed system.
void mixed_amplitudes(const LandauCoeffs& c, double& s, double& h);

enum class MaxwellKind { Hot, Cold, Homogeneous, MixedHot };

const char* to_string(MaxwellKind k);

/// Energy difference whose zero defines the Maxwell point of the given kind.
/// Throws std::domain_error if one of the states does not exist at lambda.
double maxwell_gap(MaxwellKind kind, const ModelParams<double>& p);

/// Scans lambda in [lambda_lo, lambda_hi] for a sign change of maxwell_gap
/// and bisects it to tol. Throws std::runtime_error without a sign change.
double maxwell_point(MaxwellKind kind, double sigma, double d = 60.0, double lambda_lo = 0,
                     double lambda_hi = 0, double tol = 1e-7);

enum class FrontKind { Hot, Cold, Mixed };

const char* to_string(FrontKind k);

struct GLFrontSettings {
  double half_length{0};  // L; 0 selects 24 pi / k_c
  int nodes{4001};
  double width{0};        // tanh width of the guess; 0 selects 5 (hot) or 15 (cold) times 1/k_c
  bool free_lambda{true}; // solve for lambda with the front pinned at x = 0
  double tol{1e-10};
  int max_iter{60};
};

struct GLFrontProfile {
  Eigen::VectorXd x;
  Eigen::VectorXd a1;
  Eigen::VectorXd a2;  // A3 = A2
  Eigen::VectorXd energy;  // E_kin + E_pot at each node
  double lambda{0};
  double sigma{0};
  FrontKind kind{FrontKind::Hot};
  LandauCoeffs coeffs;
  double residual{0};
  double energy_drift{0};    // (max - min) of energy / max |E_pot|
  double endpoint_error{0};  // max distance of the ends from the fixed points
  double max_slope_a1{0};
  int iterations{0};
};

/// Stationary front c0 A1'' + f1 = 0, (c0/4) A2'' + f2 = 0 with A3 = A2 and
/// Neumann ends on [-L, L], from the stripe state (x < 0) to the hexagon
/// state (x > 0). Throws std::runtime_error if Newton fails or the solution
/// collapses to a constant state.
GLFrontProfile gl_front_solve(double lambda, FrontKind kind, double sigma = 0.0,
                              const GLFrontSettings& settings = {}, double d = 60.0);

enum class AnsatzOrder { First, Full };

/// w* + sum 2 A_i cos(k_i x) Phi + correctors (Full only), at grid nodes,
/// k_1 = k_c (1, 0), k_2,3 = k_c (-1/2, +-sqrt(3)/2).
Field ansatz_reconstruct(const ModelParams<double>& p, const AmplitudeState& a,
                         const DomainSpec& spec, AnsatzOrder order = AnsatzOrder::Full);

/// c_f = c2^2 / (4 (c3 + 2 c4)); throws std::domain_error if c3 + 2 c4 = 0.
double fold_criterion(const LandauCoeffs& c);

/// Lambda above lambda_c where c1 = c_f, i.e. where the hexagon amplitudes
/// P+- stop being real. Throws std::runtime_error if none is found below
/// 1.2 lambda_c.
double predicted_hexagon_fold(double sigma, double d = 60.0);

// CSV exports
void write_coefficient_sweep(const std::filesystem::path& path, const std::vector<LandauCoeffs>& cs,
                             const std::string& row_key);
void write_energy_sweep(const std::filesystem::path& path, const ModelParams<double>& base,
                        const std::vector<double>& lambdas);
void write_fixed_point_sweep(const std::filesystem::path& path, const ModelParams<double>& base,
                             const std::vector<double>& lambdas);
void write_front_csv(const std::filesystem::path& path, const GLFrontProfile& f);

}  // namespace turing

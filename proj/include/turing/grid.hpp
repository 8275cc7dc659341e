// Uniform node-centred grids on Omega = (-lx, lx) x (-ly, ly) with Neumann
// boundaries, two-component fields, norms, and field file formats.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <filesystem>
#include <string>

namespace turing {

/// Rectangular domain sized to host l1 x l2 critical hexagon cells:
/// lx = 2 l1 pi / k_c, ly = 2 l2 pi / (sqrt 3 k_c). A quasi-1D strip keeps
/// ny = 2 and a thin ly so that the y spacing equals the x spacing.
struct DomainSpec {
  double l1{2};
  double l2{2};
  int nx{2};
  int ny{2};
  bool quasi1d{false};
  double lx{0};
  double ly{0};
  double hx{0};
  double hy{0};

  int nodes() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  double x(int i) const { return -lx + i * hx; }
  double y(int j) const { return -ly + j * hy; }
  double area() const { return 4.0 * lx * ly; }

  bool operator==(const DomainSpec& o) const {
    return l1 == o.l1 && l2 == o.l2 && nx == o.nx && ny == o.ny && quasi1d == o.quasi1d &&
           lx == o.lx && ly == o.ly;
  }
};

DomainSpec build_domain(double l1, double l2, int nx, int ny, bool quasi1d = false);

/// A two-component grid function (u, v), row-major over nodes (i fastest).
struct Field {
  DomainSpec spec;
  Eigen::VectorXd u;
  Eigen::VectorXd v;

  Field() = default;
  explicit Field(const DomainSpec& s)
      : spec(s), u(Eigen::VectorXd::Zero(s.nodes())), v(Eigen::VectorXd::Zero(s.nodes())) {}

  static Field constant(const DomainSpec& s, double u0, double v0);
  static Field from_stacked(const DomainSpec& s, const Eigen::VectorXd& z);

  /// [u; v], the unknown ordering used by every linear system in the library.
  Eigen::VectorXd stacked() const;

  /// u at the domain centre (bilinear average of the central nodes when nx or ny is even).
  double u_center() const;
};

enum class Component { U, V };

/// 5-point Neumann Laplacian built with mirrored ghost nodes. The matrix is
/// symmetric in the trapezoidal inner product <f, g> = sum w_i f_i g_i
/// (weights() below), which is also the quadrature used for norms.
struct NeumannLaplacian {
  DomainSpec spec;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd weights;  // trapezoidal node weights, sum = |Omega|

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix * f; }
};

NeumannLaplacian build_laplacian(const DomainSpec& spec);

/// Trapezoidal quadrature weights for the node grid.
Eigen::VectorXd trapezoid_weights(const DomainSpec& spec);

/// (1/|Omega| int |f|^p)^(1/p) by trapezoidal quadrature.
double lp_norm(const Field& f, Component c, double p);
double lp_norm(const DomainSpec& spec, const Eigen::VectorXd& values, double p);

/// Localized hexagons-over-stripes guess: amplitude A stripes plus a
/// sech(x/L) envelope of hexagons (B) minus a stripe correction.
Field make_initial_guess(const DomainSpec& spec, double lambda, double A, double B, double L);

/// sum |U_num - U|_1 / sum |U_num|_1 over all nodes, both components.
double relative_l1_error(const Field& numeric, const Field& ansatz);

/// Extra data written with a field snapshot.
struct SnapshotMeta {
  double lambda{0};
  double sigma{0};
  double d{60};
  std::string label;
};

struct Snapshot {
  Field field;
  SnapshotMeta meta;
};

/// Plain text: header lines "key value" for nx, ny, lx, ly, lambda, sigma,
/// label, then nx*ny u values and nx*ny v values, one per line. A JSON file
/// with the same stem and a ".json" suffix carries the full metadata.
void write_snapshot(const std::filesystem::path& path, const Field& f, const SnapshotMeta& meta);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Binary PPM (P6) of u, one pixel per node, top row = largest y, linear
/// blue-white-red colormap over [min u, max u].
void write_ppm(const std::filesystem::path& path, const Field& f);

}  // namespace turing

#include "turing/grid.hpp"

#include "turing/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace turing {

namespace {

double critical_k() { return critical_values(60.0).k_c; }

}  // namespace

DomainSpec build_domain(double l1, double l2, int nx, int ny, bool quasi1d) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("build_domain: need nx, ny >= 2");
  if (!(l1 > 0) || (!quasi1d && !(l2 > 0))) {
    throw std::invalid_argument("build_domain: l1 and l2 must be positive");
  }
  const double kc = critical_k();
  DomainSpec s;
  s.l1 = l1;
  s.l2 = quasi1d ? 0.0 : l2;
  s.nx = nx;
  s.ny = quasi1d ? 2 : ny;
  s.quasi1d = quasi1d;
  s.lx = 2.0 * l1 * std::numbers::pi / kc;
  s.hx = 2.0 * s.lx / (nx - 1);
  if (quasi1d) {
    s.ly = 0.5 * s.hx;
  } else {
    s.ly = 2.0 * l2 * std::numbers::pi / (std::sqrt(3.0) * kc);
  }
  s.hy = 2.0 * s.ly / (s.ny - 1);
  return s;
}

Field Field::constant(const DomainSpec& s, double u0, double v0) {
  Field f(s);
  f.u.setConstant(u0);
  f.v.setConstant(v0);
  return f;
}

Field Field::from_stacked(const DomainSpec& s, const Eigen::VectorXd& z) {
  const int n = s.nodes();
  if (z.size() < 2 * n) throw std::invalid_argument("Field::from_stacked: vector too short");
  Field f(s);
  f.u = z.head(n);
  f.v = z.segment(n, n);
  return f;
}

Eigen::VectorXd Field::stacked() const {
  Eigen::VectorXd z(u.size() + v.size());
  z << u, v;
  return z;
}

double Field::u_center() const {
  const int i0 = (spec.nx - 1) / 2;
  const int j0 = (spec.ny - 1) / 2;
  const int i1 = spec.nx % 2 == 1 ? i0 : i0 + 1;
  const int j1 = spec.ny % 2 == 1 ? j0 : j0 + 1;
  return 0.25 * (u(spec.index(i0, j0)) + u(spec.index(i1, j0)) + u(spec.index(i0, j1)) +
                 u(spec.index(i1, j1)));
}

Eigen::VectorXd trapezoid_weights(const DomainSpec& spec) {
  Eigen::VectorXd w(spec.nodes());
  for (int j = 0; j < spec.ny; ++j) {
    const double wy = (j == 0 || j == spec.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i < spec.nx; ++i) {
      const double wx = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
      w(spec.index(i, j)) = wx * wy * spec.hx * spec.hy;
    }
  }
  return w;
}

NeumannLaplacian build_laplacian(const DomainSpec& spec) {
  const int nx = spec.nx;
  const int ny = spec.ny;
  const double cx = 1.0 / (spec.hx * spec.hx);
  const double cy = 1.0 / (spec.hy * spec.hy);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * spec.nodes());
  // A ghost node mirrors its interior neighbour, so a boundary row picks up
  // that neighbour twice.
  auto add_dir = [&](int row, int lo, int hi, double c, int idx, int n, auto node) {
    if (idx == 0) {
      t.emplace_back(row, node(hi), 2.0 * c);
    } else if (idx == n - 1) {
      t.emplace_back(row, node(lo), 2.0 * c);
    } else {
      t.emplace_back(row, node(lo), c);
      t.emplace_back(row, node(hi), c);
    }
    t.emplace_back(row, row, -2.0 * c);
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = spec.index(i, j);
      add_dir(row, i - 1, i + 1, cx, i, nx, [&](int k) { return spec.index(k, j); });
      add_dir(row, j - 1, j + 1, cy, j, ny, [&](int k) { return spec.index(i, k); });
    }
  }
  NeumannLaplacian lap;
  lap.spec = spec;
  lap.matrix.resize(spec.nodes(), spec.nodes());
  lap.matrix.setFromTriplets(t.begin(), t.end());
  lap.matrix.makeCompressed();
  lap.weights = trapezoid_weights(spec);
  return lap;
}

double lp_norm(const DomainSpec& spec, const Eigen::VectorXd& values, double p) {
  if (!(p >= 1)) throw std::invalid_argument("lp_norm: p must be >= 1");
  const Eigen::VectorXd w = trapezoid_weights(spec);
  const double scale = values.cwiseAbs().maxCoeff();
  if (scale == 0) return 0;
  // scale first so that |u|^8 cannot overflow or lose precision
  const double s = (w.array() * (values.array().abs() / scale).pow(p)).sum() / w.sum();
  return scale * std::pow(s, 1.0 / p);
}

double lp_norm(const Field& f, Component c, double p) {
  return lp_norm(f.spec, c == Component::U ? f.u : f.v, p);
}

Field make_initial_guess(const DomainSpec& spec, double lambda, double A, double B, double L) {
  if (!(lambda > 0)) throw std::invalid_argument("make_initial_guess: lambda must be positive");
  if (!(L > 0)) throw std::invalid_argument("make_initial_guess: L must be positive");
  const double kc = critical_k();
  Field f(spec);
  for (int j = 0; j < spec.ny; ++j) {
    const double y = spec.y(j);
    for (int i = 0; i < spec.nx; ++i) {
      const double x = spec.x(i);
      const double sech = 1.0 / std::cosh(x / L);
      const double patch =
          sech * (2.0 * B * std::cos(0.5 * kc * x) * std::cos(kc * std::sqrt(3.0) / 2.0 * y) -
                  0.1 * std::cos(kc * x));
      const double m = A * std::cos(kc * x) + patch;
      const int k = spec.index(i, j);
      f.u(k) = lambda * (1.0 + m);
      f.v(k) = (1.0 - 0.5 * m) / lambda;
    }
  }
  return f;
}

double relative_l1_error(const Field& numeric, const Field& ansatz) {
  if (!(numeric.spec == ansatz.spec)) {
    throw std::invalid_argument("relative_l1_error: fields live on different grids");
  }
  const double num = (numeric.u - ansatz.u).cwiseAbs().sum() + (numeric.v - ansatz.v).cwiseAbs().sum();
  const double den = numeric.u.cwiseAbs().sum() + numeric.v.cwiseAbs().sum();
  if (den == 0) throw std::domain_error("relative_l1_error: numeric field is zero");
  return num / den;
}

void write_snapshot(const std::filesystem::path& path, const Field& f, const SnapshotMeta& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  out.precision(17);
  out << "nx " << f.spec.nx << "\n"
      << "ny " << f.spec.ny << "\n"
      << "lx " << f.spec.lx << "\n"
      << "ly " << f.spec.ly << "\n"
      << "lambda " << meta.lambda << "\n"
      << "sigma " << meta.sigma << "\n"
      << "label " << (meta.label.empty() ? "-" : meta.label) << "\n";
  for (double x : f.u) out << x << "\n";
  for (double x : f.v) out << x << "\n";
  if (!out) throw std::runtime_error("error while writing " + path.string());

  nlohmann::json j;
  j["nx"] = f.spec.nx;
  j["ny"] = f.spec.ny;
  j["l1"] = f.spec.l1;
  j["l2"] = f.spec.l2;
  j["lx"] = f.spec.lx;
  j["ly"] = f.spec.ly;
  j["quasi1d"] = f.spec.quasi1d;
  j["lambda"] = meta.lambda;
  j["sigma"] = meta.sigma;
  j["d"] = meta.d;
  j["label"] = meta.label;
  j["u_center"] = f.u_center();
  std::ofstream js(std::filesystem::path(path).concat(".json"));
  js << j.dump(2) << "\n";
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read snapshot " + path.string());
  auto expect = [&](const char* key) {
    std::string k;
    in >> k;
    if (k != key) throw std::runtime_error("snapshot " + path.string() + ": expected '" + key + "'");
  };
  int nx = 0;
  int ny = 0;
  double lx = 0;
  double ly = 0;
  Snapshot snap;
  expect("nx");
  in >> nx;
  expect("ny");
  in >> ny;
  expect("lx");
  in >> lx;
  expect("ly");
  in >> ly;
  expect("lambda");
  in >> snap.meta.lambda;
  expect("sigma");
  in >> snap.meta.sigma;
  expect("label");
  in >> snap.meta.label;
  if (snap.meta.label == "-") snap.meta.label.clear();
  if (!in || nx < 2 || ny < 2) throw std::runtime_error("snapshot " + path.string() + ": bad header");

  const double kc = critical_k();
  double l1 = lx * kc / (2.0 * std::numbers::pi);
  double l2 = ly * std::sqrt(3.0) * kc / (2.0 * std::numbers::pi);
  bool quasi1d = false;
  const auto meta_path = std::filesystem::path(path).concat(".json");
  if (std::filesystem::exists(meta_path)) {
    std::ifstream js(meta_path);
    const auto j = nlohmann::json::parse(js);
    l1 = j.at("l1").get<double>();
    l2 = j.at("l2").get<double>();
    quasi1d = j.at("quasi1d").get<bool>();
    snap.meta.d = j.value("d", 60.0);
  } else {
    quasi1d = ny == 2 && std::abs(ly - lx / (nx - 1)) < 1e-12 * lx;
  }
  const DomainSpec spec = build_domain(l1, l2, nx, ny, quasi1d);
  if (std::abs(spec.lx - lx) > 1e-9 * lx || std::abs(spec.ly - ly) > 1e-9 * std::max(ly, 1.0)) {
    throw std::runtime_error("snapshot " + path.string() + ": extents do not match l1/l2");
  }
  snap.field = Field(spec);
  for (int k = 0; k < spec.nodes(); ++k) in >> snap.field.u(k);
  for (int k = 0; k < spec.nodes(); ++k) in >> snap.field.v(k);
  if (!in) throw std::runtime_error("snapshot " + path.string() + ": truncated data");
  return snap;
}

void write_ppm(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const double lo = f.u.minCoeff();
  const double hi = f.u.maxCoeff();
  out << "P6\n" << f.spec.nx << " " << f.spec.ny << "\n255\n";
  for (int j = f.spec.ny - 1; j >= 0; --j) {
    for (int i = 0; i < f.spec.nx; ++i) {
      const double t = hi > lo ? (f.u(f.spec.index(i, j)) - lo) / (hi - lo) : 0.5;
      // blue (0,0,255) -> white -> red (255,0,0)
      double r = 0;
      double g = 0;
      double b = 0;
      if (t < 0.5) {
        r = g = 2.0 * t;
        b = 1.0;
      } else {
        r = 1.0;
        g = b = 2.0 * (1.0 - t);
      }
      const unsigned char px[3] = {static_cast<unsigned char>(std::lround(255 * r)),
                                   static_cast<unsigned char>(std::lround(255 * g)),
                                   static_cast<unsigned char>(std::lround(255 * b))};
      out.write(reinterpret_cast<const char*>(px), 3);
    }
  }
}

}  // namespace turing

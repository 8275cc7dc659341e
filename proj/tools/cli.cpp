#include "cli.hpp"

#include "turing/amplitude.hpp"
#include "turing/timestep.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace turing::cli {

using nlohmann::json;

// Missing keys keep their defaults; unknown keys are rejected.
#define TURING_JSON_FROM(v1) \
  nlohmann_json_t.v1 = nlohmann_json_j.value(#v1, nlohmann_json_default_obj.v1);
#define TURING_JSON_TYPE(Type, ...)                                                         \
  void to_json(json& nlohmann_json_j, const Type& nlohmann_json_t) {                        \
    NLOHMANN_JSON_EXPAND(NLOHMANN_JSON_PASTE(NLOHMANN_JSON_TO, __VA_ARGS__))                \
  }                                                                                         \
  void from_json(const json& nlohmann_json_j, Type& nlohmann_json_t) {                      \
    const Type nlohmann_json_default_obj{};                                                 \
    reject_unknown(nlohmann_json_j, json(nlohmann_json_default_obj), #Type);                \
    NLOHMANN_JSON_EXPAND(NLOHMANN_JSON_PASTE(TURING_JSON_FROM, __VA_ARGS__))                \
  }

namespace {

void reject_unknown(const json& j, const json& known, const char* type) {
  if (!j.is_object()) throw std::invalid_argument(std::string("config: ") + type + " must be an object");
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) {
      throw std::invalid_argument(std::string("config: unknown key '") + item.key() + "' in " + type);
    }
  }
}

}  // namespace


TURING_JSON_TYPE(ModelConfig, lambda0, d, sigma)
TURING_JSON_TYPE(DomainConfig, l1, l2, nx, ny, quasi1d)
TURING_JSON_TYPE(ContConfig, ds0, dsmin, dsmax, newton_tol,
                                                max_newton, n_eigs, bif_loc_tol, shift, stability,
                                                locate_events)
TURING_JSON_TYPE(DispConfig, k_min, k_max, k_count)
TURING_JSON_TYPE(LandauConfig, sweep, from, to, count)
TURING_JSON_TYPE(MaxwellConfig, sigma_values)
TURING_JSON_TYPE(GLFrontConfig, kind, lambda, half_length, nodes,
                                                free_lambda)
TURING_JSON_TYPE(StartConfig, type, lambda, direction, snapshot,
                                                amplitudes, order, A, B, L, dt, max_steps,
                                                residual_target)
TURING_JSON_TYPE(BranchConfig, label, parent, event, direction,
                                                perturbation, lambda_min, lambda_max, max_points)
TURING_JSON_TYPE(CmdContConfig, start, branches, snapshot_every)
TURING_JSON_TYPE(TintConfig, initial, snapshot, A, B, L,
                                                lambda_override, dt, max_steps, residual_target,
                                                snapshot_every, trace_every, newton)

TURING_JSON_TYPE(RunConfig, model, domain, cont, disp, landau, maxwell, glfront, continuation, tint,
                 output_dir)

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  try {
    return j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

FrontKind front_kind(const std::string& s) {
  if (s == "hot") return FrontKind::Hot;
  if (s == "cold") return FrontKind::Cold;
  if (s == "mixed") return FrontKind::Mixed;
  throw std::invalid_argument("config: glfront.kind must be hot, cold or mixed");
}

MaxwellKind maxwell_kind_for(FrontKind k) {
  switch (k) {
    case FrontKind::Hot: return MaxwellKind::Hot;
    case FrontKind::Cold: return MaxwellKind::Cold;
    case FrontKind::Mixed: return MaxwellKind::MixedHot;
  }
  return MaxwellKind::Hot;
}

ModelParams<double> model_params(const RunConfig& c) {
  ModelParams<double> p;
  p.lambda = c.model.lambda0;
  p.d = c.model.d;
  p.sigma = c.model.sigma;
  return p;
}

std::filesystem::path prepare_out(const RunConfig& c, const std::filesystem::path& out) {
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(c.output_dir) : out;
  std::filesystem::create_directories(dir);
  std::ofstream cfg(dir / "config.json");
  cfg << json(c).dump(2) << "\n";
  return dir;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

// ---------------------------------------------------------------- disp

int cmd_disp(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const ModelParams<double> p = model_params(c);
  const CriticalValues cv = critical_values(p.d);
  std::ofstream out(dir / "dispersion.csv");
  out.precision(12);
  out << "k,mu_plus,mu_minus,is_complex\n";
  double max_mu = -INFINITY;
  for (double k : linspace(c.disp.k_min, c.disp.k_max, c.disp.k_count)) {
    const DispersionResult r = dispersion(p, k);
    max_mu = std::max(max_mu, r.mu_plus);
    out << k << "," << r.mu_plus << "," << r.mu_minus << "," << (r.is_complex ? 1 : 0) << "\n";
  }
  write_json(dir / "summary.json", json{{"d", p.d},
                                        {"lambda", p.lambda},
                                        {"lambda_c", cv.lambda_c},
                                        {"k_c", cv.k_c},
                                        {"max_mu_plus", max_mu}});
  log << std::setprecision(10) << "lambda_c " << cv.lambda_c << "\nk_c " << cv.k_c
      << "\nmax mu_plus at lambda " << p.lambda << ": " << max_mu << "\n";
  return 0;
}

// ---------------------------------------------------------------- landau

std::vector<double> sign_changes(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> roots;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((y[i] < 0) != (y[i - 1] < 0)) {
      roots.push_back(x[i - 1] - y[i - 1] * (x[i] - x[i - 1]) / (y[i] - y[i - 1]));
    }
  }
  return roots;
}

int cmd_landau(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const ModelParams<double> base = model_params(c);
  const std::vector<double> xs = linspace(c.landau.from, c.landau.to, c.landau.count);
  std::vector<LandauCoeffs> cs;
  const bool by_sigma = c.landau.sweep == "sigma";
  for (double x : xs) {
    ModelParams<double> p = base;
    if (by_sigma) {
      p.sigma = x;
    } else {
      p.lambda = x;
    }
    cs.push_back(landau_coefficients(p));
  }
  write_coefficient_sweep(dir / "coefficients.csv", cs, c.landau.sweep);
  json summary;
  summary["sweep"] = c.landau.sweep;
  if (by_sigma) {
    std::vector<double> c3;
    std::vector<double> g;
    for (const auto& k : cs) {
      c3.push_back(k.c3);
      g.push_back(k.c3 + 2 * k.c4);
    }
    summary["c3_roots"] = sign_changes(xs, c3);
    summary["c3_plus_2c4_roots"] = sign_changes(xs, g);
    log << "c3 = 0 near sigma:";
    for (double r : sign_changes(xs, c3)) log << " " << r;
    log << "\nc3 + 2 c4 = 0 near sigma:";
    for (double r : sign_changes(xs, g)) log << " " << r;
    log << "\n";
  } else {
    write_energy_sweep(dir / "energies.csv", base, xs);
    write_fixed_point_sweep(dir / "fixed_points.csv", base, xs);
    log << "wrote " << cs.size() << " coefficient rows\n";
  }
  write_json(dir / "summary.json", summary);
  return 0;
}

// ---------------------------------------------------------------- maxwell

int cmd_maxwell(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  std::ofstream out(dir / "maxwell.csv");
  out.precision(10);
  out << "sigma,hot,cold,homogeneous,mixed_hot,hexagon_fold\n";
  json rows = json::array();
  const MaxwellKind kinds[] = {MaxwellKind::Hot, MaxwellKind::Cold, MaxwellKind::Homogeneous,
                               MaxwellKind::MixedHot};
  for (double s : c.maxwell.sigma_values) {
    json row{{"sigma", s}};
    out << s;
    log << "sigma " << s << ":";
    for (MaxwellKind k : kinds) {
      try {
        const double l = maxwell_point(k, s, c.model.d);
        row[to_string(k)] = l;
        out << "," << l;
        log << " " << to_string(k) << " " << std::setprecision(6) << l;
      } catch (const std::exception&) {
        row[to_string(k)] = nullptr;
        out << ",nan";
        log << " " << to_string(k) << " -";
      }
    }
    try {
      const double f = predicted_hexagon_fold(s, c.model.d);
      row["hexagon_fold"] = f;
      out << "," << f;
      log << " fold " << f;
    } catch (const std::exception&) {
      row["hexagon_fold"] = nullptr;
      out << ",nan";
    }
    out << "\n";
    log << "\n";
    rows.push_back(row);
  }
  write_json(dir / "summary.json", rows);
  return 0;
}

// ---------------------------------------------------------------- glfront

int cmd_glfront(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const FrontKind kind = front_kind(c.glfront.kind);
  double lambda = c.glfront.lambda;
  if (lambda <= 0) lambda = maxwell_point(maxwell_kind_for(kind), c.model.sigma, c.model.d);
  GLFrontSettings s;
  s.half_length = c.glfront.half_length;
  s.nodes = c.glfront.nodes;
  s.free_lambda = c.glfront.free_lambda;
  const GLFrontProfile f = gl_front_solve(lambda, kind, c.model.sigma, s, c.model.d);
  write_front_csv(dir / "front.csv", f);
  write_json(dir / "summary.json", json{{"kind", to_string(kind)},
                                        {"lambda_start", lambda},
                                        {"lambda", f.lambda},
                                        {"residual", f.residual},
                                        {"energy_drift", f.energy_drift},
                                        {"endpoint_error", f.endpoint_error},
                                        {"max_slope_a1", f.max_slope_a1},
                                        {"iterations", f.iterations}});
  log << to_string(kind) << " front at lambda " << std::setprecision(8) << f.lambda
      << " residual " << f.residual << " energy drift " << f.energy_drift << "\n";
  return 0;
}

// ---------------------------------------------------------------- cont

Field start_field(const RunConfig& c, const DomainSpec& spec, double lambda, std::ostream& log) {
  const StartConfig& st = c.continuation.start;
  ModelParams<double> p = model_params(c);
  p.lambda = lambda;
  if (st.type == "homogeneous") return Field::constant(spec, lambda, 1.0 / lambda);
  if (st.type == "snapshot") {
    Snapshot snap = read_snapshot(st.snapshot);
    if (!(snap.field.spec.nx == spec.nx && snap.field.spec.ny == spec.ny)) {
      throw std::invalid_argument("config: snapshot grid does not match the domain");
    }
    return snap.field;
  }
  if (st.type == "ansatz") {
    const AmplitudeState a(st.amplitudes[0], st.amplitudes[1], st.amplitudes[2]);
    return ansatz_reconstruct(p, a, spec, st.order == "first" ? AnsatzOrder::First : AnsatzOrder::Full);
  }
  // tint
  TimestepSettings ts;
  ts.dt = st.dt;
  ts.max_steps = st.max_steps;
  ts.residual_target = st.residual_target;
  const NeumannLaplacian lap = build_laplacian(spec);
  const IntegrationResult r =
      integrate_to_residual(make_initial_guess(spec, lambda, st.A, st.B, st.L), p, lap, ts);
  log << "time integration: " << r.steps << " steps, residual " << r.residual << "\n";
  return r.field;
}

std::string event_list(const Branch& b) {
  std::ostringstream s;
  for (std::size_t i = 0; i < b.events.size(); ++i) {
    s << " [" << i << "] " << to_string(b.events[i].kind) << " at " << b.events[i].located_lambda;
  }
  return s.str().empty() ? " none" : s.str();
}

void flush_branch(const std::filesystem::path& dir, const Branch& b) {
  write_branch_csv(dir / (b.label + "_branch.csv"), b);
  write_events_csv(dir / (b.label + "_events.csv"), b);
}

int cmd_cont(const RunConfig& c, const std::filesystem::path& dir, int threads, bool verbose,
             std::ostream& log) {
  const DomainSpec spec = domain_spec(c);
  const ContProblem prob(spec, model_params(c), cont_settings(c));
  const CmdContConfig& cc = c.continuation;
  std::map<std::string, Branch> done;
  const int every = cc.snapshot_every;

  std::mutex io;
  auto observer = [&](const Branch& b) {
    const std::lock_guard<std::mutex> lock(io);
    const std::size_t k = b.points.size() - 1;
    const BranchPoint& p = b.points.back();
    if (verbose) {
      log << b.label << " " << k << " lambda " << p.lambda << " n_unstable " << p.n_unstable << "\n";
    }
    if (every > 0 && k % every == 0) {
      std::ostringstream name;
      name << b.label << "_pt" << std::setw(4) << std::setfill('0') << k << ".txt";
      write_snapshot(dir / name.str(), p.state, SnapshotMeta{p.lambda, c.model.sigma, c.model.d, b.label});
    }
    flush_branch(dir, b);
  };

  std::optional<BranchPoint> start;
  auto run_one = [&](const BranchConfig& bc) -> Branch {
    BranchPoint first;
    if (bc.parent.empty()) {
      if (!start) {
        const double l = cc.start.lambda;
        start = make_start_point(prob, start_field(c, spec, l, log), l, cc.start.direction);
      }
      first = *start;
      if (bc.direction != 0 && bc.direction != cc.start.direction) {
        first.tangent = -first.tangent;
      }
    } else {
      const Branch& parent = done.at(bc.parent);
      if (bc.event < 0 || bc.event >= static_cast<int>(parent.events.size())) {
        throw std::invalid_argument("config: branch '" + bc.label + "' event index " +
                                    std::to_string(bc.event) + " out of range; events of '" +
                                    parent.label + "':" + event_list(parent));
      }
      const SwitchResult sw = branch_switch(prob, parent.events[bc.event], bc.direction < 0 ? -1 : 1, bc.perturbation);
      write_snapshot(dir / (bc.label + "_kernel.txt"),
                     Field::from_stacked(spec, sw.kernel.head(2 * spec.nodes())),
                     SnapshotMeta{parent.events[bc.event].located_lambda, c.model.sigma, c.model.d,
                                  bc.label + "_kernel"});
      first = sw.point;
    }
    StopRule stop;
    stop.lambda_min = bc.lambda_min;
    stop.lambda_max = bc.lambda_max;
    stop.max_points = bc.max_points;
    Branch b = run_branch(prob, first, stop, bc.label, observer);
    flush_branch(dir, b);
    log << bc.label << ": " << b.points.size() << " points, stop: " << b.stop_reason
        << ", events:" << event_list(b) << "\n";
    return b;
  };

  // validate the script before any work
  {
    std::map<std::string, int> seen;
    for (const auto& bc : cc.branches) {
      check(!bc.label.empty(), "branch labels must be non-empty");
      check(!seen.count(bc.label), "duplicate branch label '" + bc.label + "'");
      check(bc.parent.empty() || seen.count(bc.parent),
            "branch '" + bc.label + "' refers to unknown or later parent '" + bc.parent + "'");
      seen[bc.label] = 1;
    }
  }

  // Branches run in waves; a wave holds branches whose parents are done.
  std::vector<const BranchConfig*> pending;
  for (const auto& bc : cc.branches) pending.push_back(&bc);
  if (threads > 1) {
    const BranchConfig* root = nullptr;
    for (const auto* bc : pending) {
      if (bc->parent.empty()) root = bc;
    }
    if (root) {
      const double l = cc.start.lambda;
      start = make_start_point(prob, start_field(c, spec, l, log), l, cc.start.direction);
    }
  }
  while (!pending.empty()) {
    std::vector<const BranchConfig*> wave;
    std::vector<const BranchConfig*> rest;
    for (const auto* bc : pending) {
      const bool ready = bc->parent.empty() || done.count(bc->parent);
      if (ready && (threads > 1 || wave.empty())) {
        wave.push_back(bc);
      } else {
        rest.push_back(bc);
      }
    }
    if (threads > 1 && wave.size() > 1) {
      std::vector<std::future<Branch>> futs;
      for (std::size_t i = 0; i < wave.size(); i += static_cast<std::size_t>(threads)) {
        futs.clear();
        for (std::size_t j = i; j < std::min(wave.size(), i + threads); ++j) {
          futs.push_back(std::async(std::launch::async, run_one, std::cref(*wave[j])));
        }
        for (std::size_t j = 0; j < futs.size(); ++j) done[wave[i + j]->label] = futs[j].get();
      }
    } else {
      for (const auto* bc : wave) done[bc->label] = run_one(*bc);
    }
    pending = rest;
  }
  return 0;
}

// ---------------------------------------------------------------- tint

int cmd_tint(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log) {
  const TintConfig& t = c.tint;
  ModelParams<double> p = model_params(c);
  Field f;
  if (t.initial == "snapshot") {
    Snapshot s = read_snapshot(t.snapshot);
    f = s.field;
    if (s.meta.lambda > 0) p.lambda = s.meta.lambda;
  } else {
    f = make_initial_guess(domain_spec(c), p.lambda, t.A, t.B, t.L);
  }
  if (t.lambda_override > 0) p.lambda = t.lambda_override;
  const NeumannLaplacian lap = build_laplacian(f.spec);
  TimestepSettings ts;
  ts.dt = t.dt;
  ts.max_steps = t.max_steps;
  ts.residual_target = t.residual_target;

  std::ofstream trace(dir / "trace.csv");
  trace.precision(8);
  trace << "step,time,residual,L2_u";
  for (int i = 0; i < f.spec.nx; ++i) trace << ",u" << i;
  trace << "\n";
  auto write_trace = [&](int step, double time, const Field& g, double r) {
    trace << step << "," << time << "," << r << "," << lp_norm(g, Component::U, 2.0);
    for (int i = 0; i < g.spec.nx; ++i) trace << "," << g.u(g.spec.index(i, 0));
    trace << "\n";
  };
  write_trace(0, 0.0, f, residual_inf(f, p, lap));
  const SnapshotMeta meta{p.lambda, p.sigma, p.d, "tint"};
  const IntegrationResult r = integrate_to_residual(
      f, p, lap, ts, [&](int step, double time, const Field& g, double res) {
        if (t.trace_every > 0 && step % t.trace_every == 0) write_trace(step, time, g, res);
        if (t.snapshot_every > 0 && step % t.snapshot_every == 0) {
          std::ostringstream name;
          name << "tint_" << std::setw(6) << std::setfill('0') << step << ".txt";
          write_snapshot(dir / name.str(), g, meta);
        }
      });
  write_snapshot(dir / "tint_final.txt", r.field, meta);
  json summary{{"steps", r.steps},       {"time", r.time},          {"residual", r.residual},
               {"reached", r.reached},   {"final_dt", r.final_dt},  {"lambda", p.lambda}};
  log << "time integration: " << r.steps << " steps, t = " << r.time << ", residual " << r.residual << "\n";
  int code = 0;
  if (t.newton) {
    const NewtonResult nr = newton_correct(r.field, p, lap, c.cont.newton_tol, 4 * c.cont.max_newton);
    summary["newton_converged"] = nr.converged;
    summary["newton_residual"] = nr.residual;
    summary["newton_iterations"] = nr.iterations;
    log << "Newton: " << (nr.converged ? "converged" : "failed") << ", residual " << nr.residual << "\n";
    if (nr.converged) {
      write_snapshot(dir / "newton_final.txt", nr.state, meta);
      summary["u_center"] = nr.state.u_center();
      summary["L2_u"] = lp_norm(nr.state, Component::U, 2.0);
    } else {
      code = 2;
    }
  }
  write_json(dir / "summary.json", summary);
  return code;
}

// ---------------------------------------------------------------- render

int cmd_render(const std::filesystem::path& snapshot, const std::filesystem::path& out,
               std::ostream& log) {
  Snapshot s;
  try {
    s = read_snapshot(snapshot);
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
  const std::filesystem::path dir = out.empty() ? snapshot.parent_path() : out;
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const std::filesystem::path img = dir / (snapshot.stem().string() + ".ppm");
  write_ppm(img, s.field);
  log << "wrote " << img.string() << "\n";
  return 0;
}

}  // namespace

ContSettings cont_settings(const RunConfig& c) {
  ContSettings s;
  s.ds0 = c.cont.ds0;
  s.dsmin = c.cont.dsmin;
  s.dsmax = c.cont.dsmax;
  s.newton_tol = c.cont.newton_tol;
  s.max_newton = c.cont.max_newton;
  s.n_eigs = c.cont.n_eigs;
  s.bif_loc_tol = c.cont.bif_loc_tol;
  s.shift = c.cont.shift;
  s.stability = c.cont.stability;
  s.locate_events = c.cont.locate_events;
  return s;
}

DomainSpec domain_spec(const RunConfig& c) {
  return build_domain(c.domain.l1, c.domain.l2, c.domain.nx, c.domain.ny, c.domain.quasi1d);
}

void validate(const RunConfig& c, const std::string& command) {
  check(c.model.d > 0, "model.d must be positive");
  check(std::isfinite(c.model.sigma), "model.sigma must be finite");
  if (command == "disp") {
    check(c.model.lambda0 > 0, "model.lambda0 must be positive");
    check(c.disp.k_min >= 0, "disp.k_min must be >= 0");
    check(c.disp.k_max > c.disp.k_min, "disp k-range is empty");
    check(c.disp.k_count >= 2, "disp.k_count must be >= 2");
  } else if (command == "landau") {
    check(c.landau.sweep == "lambda" || c.landau.sweep == "sigma", "landau.sweep must be lambda or sigma");
    check(c.landau.count >= 2 && c.landau.to > c.landau.from, "landau sweep range is empty");
    check(c.landau.sweep == "sigma" || c.landau.from > 0, "landau lambda range must be positive");
    check(c.landau.sweep == "lambda" || c.model.lambda0 > 0, "model.lambda0 must be positive");
  } else if (command == "maxwell") {
    check(!c.maxwell.sigma_values.empty(), "maxwell.sigma_values is empty");
  } else if (command == "glfront") {
    front_kind(c.glfront.kind);
    check(c.glfront.nodes >= 16, "glfront.nodes must be >= 16");
    check(c.glfront.lambda >= 0, "glfront.lambda must be >= 0");
  } else if (command == "cont" || command == "tint") {
    check(c.domain.nx >= 2 && c.domain.ny >= 2, "domain.nx and domain.ny must be >= 2");
    check(c.domain.l1 > 0 && (c.domain.quasi1d || c.domain.l2 > 0), "domain.l1, domain.l2 must be positive");
    cont_settings(c).validate();
    if (command == "cont") {
      const StartConfig& s = c.continuation.start;
      check(s.type == "homogeneous" || s.type == "snapshot" || s.type == "ansatz" || s.type == "tint",
            "continuation.start.type must be homogeneous, snapshot, ansatz or tint");
      check(s.lambda > 0, "continuation.start.lambda must be positive");
      check(s.direction == 1 || s.direction == -1, "continuation.start.direction must be +1 or -1");
      check(s.type != "snapshot" || !s.snapshot.empty(), "continuation.start.snapshot is empty");
      check(s.amplitudes.size() == 3, "continuation.start.amplitudes needs three values");
      check(!c.continuation.branches.empty(), "continuation.branches is empty");
      for (const auto& b : c.continuation.branches) {
        check(b.direction >= -1 && b.direction <= 1, "branch direction must be -1, 0 or +1");
        check(b.perturbation > 0, "branch perturbation must be positive");
        check(b.lambda_min < b.lambda_max, "branch lambda range is empty");
        check(b.max_points >= 1, "branch max_points must be >= 1");
        check(b.parent.empty() || b.event >= 0, "branch '" + b.label + "' needs an event index");
      }
    } else {
      const TintConfig& t = c.tint;
      check(t.initial == "guess" || t.initial == "snapshot", "tint.initial must be guess or snapshot");
      check(t.initial != "snapshot" || !t.snapshot.empty(), "tint.snapshot is empty");
      check(t.initial == "snapshot" || c.model.lambda0 > 0, "model.lambda0 must be positive");
      check(t.L > 0, "tint.L must be positive");
      check(t.dt > 0 && t.residual_target > 0 && t.max_steps >= 0, "tint step settings invalid");
    }
  } else if (command != "render") {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
}

int run(const Options& opt, std::ostream& log) {
  try {
    RunConfig c;
    if (!opt.config.empty()) c = load_config(opt.config);
    validate(c, opt.command);
    if (opt.command == "render") {
      if (opt.snapshot.empty()) throw std::invalid_argument("render needs a snapshot path");
      return cmd_render(opt.snapshot, opt.out, log);
    }
    const std::filesystem::path dir = prepare_out(c, opt.out);
    if (opt.command == "disp") return cmd_disp(c, dir, log);
    if (opt.command == "landau") return cmd_landau(c, dir, log);
    if (opt.command == "maxwell") return cmd_maxwell(c, dir, log);
    if (opt.command == "glfront") return cmd_glfront(c, dir, log);
    if (opt.command == "cont") return cmd_cont(c, dir, opt.threads, opt.verbose, log);
    if (opt.command == "tint") return cmd_tint(c, dir, log);
    throw std::invalid_argument("unknown command '" + opt.command + "'");
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace turing::cli

// chtlab: numerical laboratory for the coupled Cahn-Hilliard/nutrient tumor
// model. Commands: simulate, equilibrate, stability, steady, decay-fit,
// optimize, gradcheck.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cht/adjoint.hpp"
#include "cht/config.hpp"
#include "cht/io.hpp"
#include "cht/longtime.hpp"
#include "cht/optimize.hpp"
#include "cht/random.hpp"
#include "cht/sensitivity.hpp"
#include "cht/spectral.hpp"
#include "cht/state.hpp"

namespace fs = std::filesystem;
using namespace cht;

namespace {

struct Cli {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 12345;
  bool seed_given = false;
};

struct Job {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 0;
};

Job prepare(const Cli& cli) {
  Job j{Config::load(cli.config_path), fs::path(), 0};
  j.seed = cli.seed_given ? cli.seed : j.cfg.seed(12345);
  std::string dir = cli.out_dir.empty() ? j.cfg.str("output.dir", "out") : cli.out_dir;
  j.out = fs::path(dir);
  fs::create_directories(j.out);
  return j;
}

void write_diagnostics_csv(const fs::path& path, const Trajectory& traj) {
  CsvWriter csv(path.string(),
                {"step", "t", "E", "mass_phi", "mass_sigma", "mass_total_predicted",
                 "A", "energy_identity_residual", "source_work"});
  for (const auto& d : traj.diagnostics)
    csv.row({static_cast<double>(d.step), d.t, d.energy, d.mass_phi, d.mass_sigma,
             d.mass_total_predicted, d.dissipation, d.energy_identity_residual,
             d.source_work});
}

void write_state_snapshots(const fs::path& dir, const Trajectory& traj,
                           const std::string& fields) {
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const State& s = traj.states[i];
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%06zu", i);
    if (fields.find("phi") != std::string::npos)
      write_snapshot((dir / ("phi_" + std::string(tag) + ".pfc")).string(), s.phi, s.t);
    if (fields.find("sigma") != std::string::npos)
      write_snapshot((dir / ("sigma_" + std::string(tag) + ".pfc")).string(), s.sigma,
                     s.t);
    if (fields.find("mu") != std::string::npos)
      write_snapshot((dir / ("mu_" + std::string(tag) + ".pfc")).string(), s.mu, s.t);
  }
}

int cmd_simulate(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  const SchemeParams scheme = make_scheme(j.cfg, model);
  const Field phi0 = make_initial_field(j.cfg, grid, "init.phi", j.seed);
  const Field sigma0 = make_initial_field(j.cfg, grid, "init.sigma", j.seed + 1);
  const Control control = make_control(j.cfg, grid, scheme.t_end);

  const long snap = j.cfg.integer("simulate.snapshot_every", 0);
  const long no_snap = std::clamp<long>(scheme.max_steps, 1, 1 << 30);
  const int store = static_cast<int>(snap > 0 ? snap : no_snap);
  Trajectory traj = run(model, phi0, sigma0, control, scheme, store);

  write_diagnostics_csv(j.out / "diagnostics.csv", traj);
  if (snap > 0)
    write_state_snapshots(j.out, traj, j.cfg.str("simulate.fields", "phi,sigma,mu"));

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("simulate"));
  rep.kv("steps", traj.steps_taken);
  rep.kv("t_final", traj.final_state().t);
  rep.kv("energy_final", traj.diagnostics.back().energy);
  rep.kv("mass_total_final",
         traj.diagnostics.back().mass_phi + traj.diagnostics.back().mass_sigma);
  return 0;
}

int cmd_equilibrate(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  const SchemeParams scheme = make_scheme(j.cfg, model);
  const Field phi0 = make_initial_field(j.cfg, grid, "init.phi", j.seed);
  const Field sigma0 = make_initial_field(j.cfg, grid, "init.sigma", j.seed + 1);
  const Control control = make_control(j.cfg, grid, scheme.t_end);

  EquilibriumOptions opts;
  opts.tol = j.cfg.number("equilibrate.tol", 1e-9);
  opts.residual_accept = j.cfg.number("equilibrate.residual_accept", 1e-6);

  auto [traj, eq] = run_to_equilibrium(model, phi0, sigma0, control, scheme, opts);
  write_diagnostics_csv(j.out / "diagnostics.csv", traj);
  write_snapshot((j.out / "phi_inf.pfc").string(), eq.phi_inf, eq.t_final);

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("equilibrate"));
  rep.kv("converged", eq.converged);
  rep.kv("steps", eq.steps);
  rep.kv("t_final", eq.t_final);
  rep.kv("sigma_inf_mean", eq.sigma_inf_mean);
  rep.kv("sigma_inf_std", eq.sigma_inf_std);
  rep.kv("mu_inf_mean", eq.mu_inf_mean);
  rep.kv("residual_stationary", eq.residual_stationary);
  rep.kv("relation_gap", eq.relation_gap);
  rep.kv("mu_mean_gap", eq.mu_mean_gap);
  rep.kv("reaction_residual", eq.reaction_residual);
  rep.kv("mass_m_inf", eq.mass_m_inf);
  rep.kv("mass_ledger_gap", eq.mass_ledger_gap);
  rep.kv("energy_inf", eq.energy_inf);
  if (control.is_zero()) {
    // heuristic exponent estimate from the gradient inequality regression
    LojasiewiczEstimate loj = estimate_lojasiewicz(traj, eq);
    rep.kv("lojasiewicz_theta_hat", loj.theta_hat);
    rep.kv("lojasiewicz_slope", loj.slope);
    rep.kv("lojasiewicz_reliable", loj.reliable);
  }
  return 0;
}

int cmd_stability(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  const SchemeParams scheme = make_scheme(j.cfg, model);
  const Field phi_star = make_initial_field(j.cfg, grid, "init.phi", j.seed);
  const Field sigma_star = make_initial_field(j.cfg, grid, "init.sigma", j.seed + 1);

  const double eta = j.cfg.number("stability.eta");
  const double eps = j.cfg.number("stability.epsilon");
  const double horizon = j.cfg.number("stability.horizon", 50.0);
  const int n_probes = static_cast<int>(j.cfg.integer("stability.n_probes", 8));

  StabilityReport rep =
      lyapunov_probe(model, phi_star, sigma_star, eta, eps, horizon, n_probes, j.seed,
                     scheme);

  CsvWriter csv((j.out / "probes.csv").string(), {"probe", "sup_deviation"});
  for (std::size_t i = 0; i < rep.probe_sup.size(); ++i)
    csv.row({static_cast<double>(i), rep.probe_sup[i]});

  ReportWriter out((j.out / "report.txt").string(), j.cfg.hash());
  out.kv("command", std::string("stability"));
  out.kv("eta", rep.eta);
  out.kv("epsilon", rep.epsilon);
  out.kv("horizon", rep.horizon);
  out.kv("n_probes", static_cast<long>(rep.n_probes));
  out.kv("sup_deviation", rep.sup_deviation);
  out.kv("stayed_within", rep.stayed_within);
  return 0;
}

int cmd_steady(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  const double m = j.cfg.number("steady.m");
  const Field phi_init = make_initial_field(j.cfg, grid, "init.phi", j.seed);

  SteadyOptions opts;
  opts.tol = j.cfg.number("steady.tol", 1e-8);
  opts.max_iterations = j.cfg.integer("steady.max_iterations", 500000);

  SteadyResult res = solve_nonlocal_elliptic(model, m, phi_init, opts);
  write_snapshot((j.out / "phi_steady.pfc").string(), res.phi, 0.0);
  CsvWriter hist((j.out / "upsilon_history.csv").string(), {"iterate", "upsilon"});
  for (std::size_t i = 0; i < res.upsilon_history.size(); ++i)
    hist.row({static_cast<double>(i), res.upsilon_history[i]});

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("steady"));
  rep.kv("converged", res.converged);
  rep.kv("iterations", res.iterations);
  rep.kv("residual", res.residual);
  rep.kv("upsilon", res.upsilon_value);
  rep.kv("phi_mean", mean(res.phi));
  rep.kv("phi_min", *std::min_element(res.phi.values.begin(), res.phi.values.end()));
  rep.kv("phi_max", *std::max_element(res.phi.values.begin(), res.phi.values.end()));
  return 0;
}

int cmd_decay_fit(const Job& j) {
  std::vector<double> t, v;
  const auto spec = j.cfg.str("decay.series", "synthetic:3,2,200,50");
  const auto pos = spec.find(':');
  const std::string kind = spec.substr(0, pos);
  if (kind == "synthetic") {
    // synthetic:C,lambda,n,t_max
    const std::string payload = pos == std::string::npos ? "" : spec.substr(pos + 1);
    double C = 3, lam = 2, tmax = 50;
    long n = 200;
    if (!payload.empty()) {
      std::vector<std::string> parts;
      std::string cur;
      std::istringstream ss(payload);
      while (std::getline(ss, cur, ',')) parts.push_back(cur);
      if (parts.size() != 4) j.cfg.fail("decay.series", "synthetic needs C,lambda,n,t_max");
      C = std::stod(parts[0]);
      lam = std::stod(parts[1]);
      n = std::stol(parts[2]);
      tmax = std::stod(parts[3]);
    }
    for (long i = 0; i < n; ++i) {
      const double ti = tmax * (i + 1.0) / n;
      t.push_back(ti);
      v.push_back(C * std::pow(1.0 + ti, -lam));
    }
  } else if (kind == "file") {
    std::tie(t, v) = read_series_csv(spec.substr(pos + 1));
  } else {
    j.cfg.fail("decay.series", "expected synthetic:... or file:<path>");
  }

  const double ta = j.cfg.number("decay.window_a", t.front());
  const double tb = j.cfg.number("decay.window_b", t.back());
  DecayFit fit = fit_decay_rate(t, v, ta, tb);

  CsvWriter csv((j.out / "series.csv").string(), {"t", "value", "fit"});
  for (std::size_t i = 0; i < t.size(); ++i)
    csv.row({t[i], v[i], fit.prefactor * std::pow(1.0 + t[i], -fit.lambda)});

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("decay-fit"));
  rep.kv("lambda", fit.lambda);
  rep.kv("prefactor", fit.prefactor);
  rep.kv("window_a", fit.t_a);
  rep.kv("window_b", fit.t_b);
  rep.kv("r_squared", fit.r_squared);
  rep.kv("n_samples", static_cast<long>(fit.n_samples));
  rep.kv("super_polynomial", fit.super_polynomial);
  return 0;
}

int cmd_optimize(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  SchemeParams scheme = make_scheme(j.cfg, model);
  const Field phi0 = make_initial_field(j.cfg, grid, "init.phi", j.seed);
  const Field sigma0 = make_initial_field(j.cfg, grid, "init.sigma", j.seed + 1);
  CostSpec cost = make_cost(j.cfg, grid);
  scheme.t_end = cost.T;

  const double lo = j.cfg.number("control.u_min");
  const double hi = j.cfg.number("control.u_max");
  const long n_steps = std::lround(cost.T / scheme.dt);
  const long n_slabs = j.cfg.integer("control.n_slabs", n_steps);
  double init = 0.5 * (lo + hi);
  const auto init_spec = j.cfg.str("control.init", "auto");
  if (init_spec == "zero" || (init_spec == "auto" && lo <= 0.0 && 0.0 <= hi))
    init = 0.0;
  else if (init_spec != "midpoint" && init_spec != "auto")
    init = std::stod(init_spec);

  Control u0 = Control::tabulated(grid, static_cast<int>(n_slabs), cost.T, init, lo, hi);
  if (j.cfg.has("control.radius_R")) {
    const double R = j.cfg.number("control.radius_R");
    const double worst = std::max(std::abs(lo), std::abs(hi)) *
                         std::sqrt(grid.measure() * cost.T);
    if (worst > R)
      j.cfg.fail("control.radius_R",
                 "box bound exceeds the configured L2(Q) radius");
  }

  OptimizeOptions opts;
  opts.tol_u = j.cfg.number("optimize.tol_u", 1e-8);
  opts.tol_tau = j.cfg.number("optimize.tol_tau", 1e-8);
  opts.max_outer = static_cast<int>(j.cfg.integer("optimize.max_outer", 100));

  OptimizeResult res = optimize(model, cost, phi0, sigma0, u0, scheme, opts);

  CsvWriter hist((j.out / "J_history.csv").string(), {"iterate", "J"});
  for (std::size_t i = 0; i < res.J_history.size(); ++i)
    hist.row({static_cast<double>(i), res.J_history[i]});
  for (int s = 0; s < res.u_star.n_slabs(); ++s) {
    Field us(grid);
    std::copy(res.u_star.slab(s), res.u_star.slab(s) + grid.cells(), us.values.begin());
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%04d", s);
    write_snapshot((j.out / ("u_star_" + std::string(tag) + ".pfc")).string(), us,
                   s * res.u_star.slab_length());
  }

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("optimize"));
  rep.kv("converged", res.converged);
  rep.kv("iterations", static_cast<long>(res.iterations));
  rep.kv("J_final", res.J_history.back());
  rep.kv("tau_star", res.tau_star);
  rep.kv("fonc_residual_u", res.fonc_residual_u);
  rep.kv("dJ_dtau", res.dJ_dtau_star);
  rep.kv("tau_classification", std::string(to_string(res.tau_class)));
  return 0;
}

int cmd_gradcheck(const Job& j) {
  const Grid grid = make_grid(j.cfg);
  const ModelSpec model = make_model(j.cfg);
  SchemeParams scheme = make_scheme(j.cfg, model);
  const Field phi0 = make_initial_field(j.cfg, grid, "init.phi", j.seed);
  const Field sigma0 = make_initial_field(j.cfg, grid, "init.sigma", j.seed + 1);
  CostSpec cost = make_cost(j.cfg, grid);
  scheme.t_end = cost.T;
  const Control u = make_control(j.cfg, grid, cost.T);

  std::vector<double> epsilons;
  for (const auto& part : [&] {
         std::vector<std::string> parts;
         std::string cur;
         std::istringstream ss(j.cfg.str("gradcheck.epsilons",
                                         "1e-1,3e-2,1e-2,3e-3,1e-3,3e-4,1e-4"));
         while (std::getline(ss, cur, ',')) parts.push_back(cur);
         return parts;
       }())
    epsilons.push_back(std::stod(part));

  const int kmax = static_cast<int>(j.cfg.integer("gradcheck.direction_kmax", 3));
  Rng rng(j.seed ^ 0xd1ec7ull);
  Field hfield = band_limited_noise(grid, kmax, rng);
  hfield.axpy(0.3, Field(grid, 1.0));
  const double hscale = max_abs(hfield);
  if (hscale > 0) hfield *= 1.0 / hscale;
  const Control h = Control::decaying_source(hfield, 1.0);

  FrechetReport fr = frechet_check(model, phi0, sigma0, u, h, epsilons, scheme);
  CsvWriter fcsv((j.out / "frechet.csv").string(),
                 {"epsilon", "err_phi", "err_sigma", "err_total", "floored"});
  for (const auto& r : fr.rows)
    fcsv.row({r.epsilon, r.err_phi, r.err_sigma, r.err_total, r.floored ? 1.0 : 0.0});

  // Adjoint-gradient check: <grad_u, h> against finite differences of the
  // reduced cost in random tabulated directions, with its own eps-vs-error
  // table (one-sided differences) and a central-difference summary.
  const double fd_eps = j.cfg.number("gradcheck.fd_epsilon", 1e-4);
  const int n_dirs = static_cast<int>(j.cfg.integer("gradcheck.n_directions", 5));
  const double tau = cost.T;
  const long n_steps = std::lround(cost.T / scheme.dt);

  Trajectory base = run(model, phi0, sigma0, u, scheme, 1);
  auto adj = solve_adjoint(model, base, cost, tau);
  ReducedGradient rg = reduced_gradient(base, adj, cost, tau);
  const double grad_norm = rg.grad_u.l2q_norm();
  const double J0 = evaluate_cost(base, cost, tau);

  std::vector<Field> dirs;
  for (int d = 0; d < n_dirs; ++d) {
    Rng drng(j.seed + 1000 + static_cast<std::uint64_t>(d));
    Field dir = band_limited_noise(grid, kmax, drng);
    dir.axpy(0.5, Field(grid, 1.0));
    const double dscale = max_abs(dir);
    if (dscale > 0) dir *= 1.0 / dscale;
    dirs.push_back(std::move(dir));
  }

  auto cost_at = [&](const Field& dir, double eps) {
    Control up = Control::tabulated(grid, static_cast<int>(n_steps), cost.T, 0.0,
                                    Field(grid, -1e300), Field(grid, 1e300));
    Field us(grid);
    for (long s = 0; s < n_steps; ++s) {
      u.sample_into(s * scheme.dt, us);
      double* slab = up.slab(static_cast<int>(s));
      for (int i = 0; i < grid.cells(); ++i) slab[i] = us[i] + eps * dir[i];
    }
    Trajectory traj = run(model, phi0, sigma0, up, scheme, 1);
    return evaluate_cost(traj, cost, tau);
  };
  auto pairing = [&](const Field& dir) {
    double ip = 0.0;
    const double slab_len = rg.grad_u.slab_length();
    for (int s = 0; s < rg.grad_u.n_slabs(); ++s) {
      const double* gs = rg.grad_u.slab(s);
      double cell = 0.0;
      for (int i = 0; i < grid.cells(); ++i) cell += gs[i] * dir[i];
      ip += cell * grid.cell_volume() * slab_len;
    }
    return ip;
  };

  // eps table: worst one-sided FD error over directions, floored at the
  // adjoint-consistency level
  CsvWriter ecsv((j.out / "adjoint_eps.csv").string(), {"epsilon", "err_max"});
  std::vector<double> errs;
  for (double eps : epsilons) {
    double worst_err = 0.0;
    for (const Field& dir : dirs) {
      const double fd = (cost_at(dir, eps) - J0) / eps;
      worst_err = std::max(worst_err, std::abs(fd - pairing(dir)));
    }
    ecsv.row({eps, worst_err});
    errs.push_back(worst_err);
  }
  double adj_slope = 0.0;
  {
    int used = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < errs.size(); ++i) {
      if (errs[i] <= 0.0) break;
      if (i > 0 && errs[i] >= 0.9 * errs[i - 1]) break;  // resolution floor
      const double x = std::log(epsilons[i]), y = std::log(errs[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++used;
    }
    const double det = used * sxx - sx * sx;
    if (used >= 2 && det != 0.0) adj_slope = (used * sxy - sx * sy) / det;
  }

  CsvWriter acsv((j.out / "adjoint_check.csv").string(),
                 {"direction", "inner_grad_h", "fd_value", "rel_error"});
  double worst = 0.0;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const double fd =
        (cost_at(dirs[d], fd_eps) - cost_at(dirs[d], -fd_eps)) / (2.0 * fd_eps);
    const double ip = pairing(dirs[d]);
    // relative to the pairing scale |grad| |h|; random directions can be
    // nearly orthogonal to the gradient
    const double h_norm = l2_norm(dirs[d]) * std::sqrt(cost.T);
    const double scale = std::max(grad_norm * h_norm, std::abs(fd));
    const double rel = std::abs(fd - ip) / std::max(1e-300, scale);
    worst = std::max(worst, rel);
    acsv.row({static_cast<double>(d), ip, fd, rel});
  }

  ReportWriter rep((j.out / "report.txt").string(), j.cfg.hash());
  rep.kv("command", std::string("gradcheck"));
  rep.kv("frechet_slope", fr.slope);
  rep.kv("frechet_rows_used", static_cast<long>(fr.n_used));
  rep.kv("adjoint_fd_slope", adj_slope);
  rep.kv("adjoint_worst_rel_error", worst);
  rep.kv("fd_epsilon", fd_eps);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for a Cahn-Hilliard tumor-growth model"};
  app.require_subcommand(1);

  Cli cli;
  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", cli.config_path, "configuration file")->required();
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--seed", cli.seed, "RNG seed")->each([&](const std::string&) {
      cli.seed_given = true;
    });
    sub->callback([&cli, name] { cli.command = name; });
    return sub;
  };
  add("simulate", "integrate the state system and write diagnostics");
  add("equilibrate", "run to equilibrium and characterize it");
  add("stability", "Lyapunov probes around a steady state");
  add("steady", "solve the nonlocal elliptic steady problem");
  add("decay-fit", "fit a power-law decay rate to a series");
  add("optimize", "solve the free-terminal-time control problem");
  add("gradcheck", "linearization and adjoint-gradient checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors share the config exit code
  }

  try {
    Job job = prepare(cli);
    if (cli.command == "simulate") return cmd_simulate(job);
    if (cli.command == "equilibrate") return cmd_equilibrate(job);
    if (cli.command == "stability") return cmd_stability(job);
    if (cli.command == "steady") return cmd_steady(job);
    if (cli.command == "decay-fit") return cmd_decay_fit(job);
    if (cli.command == "optimize") return cmd_optimize(job);
    if (cli.command == "gradcheck") return cmd_gradcheck(job);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

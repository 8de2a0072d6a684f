#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdlib>
#include <filesystem>

#include "pspin/accept.hpp"
#include "pspin/critical.hpp"
#include "pspin/fdt.hpp"
#include "pspin/langevin.hpp"
#include "pspin/noncrossing.hpp"
#include "pspin/twotime.hpp"
#include "pspin/version.hpp"

namespace pspin::cli {

namespace {

namespace fs = std::filesystem;

std::string artifact_header(const LoadedConfig& cfg) {
  return std::string("# pspin ") + PSPIN_VERSION + "\n# config_fnv1a=" + cfg.hash_hex + "\n";
}

std::string out_path(const CommonOptions& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  return (fs::path(opt.out_dir) / name).string();
}

json meta(const LoadedConfig& cfg) {
  return json{{"version", PSPIN_VERSION}, {"config_fnv1a", cfg.hash_hex}};
}

int resolve_threads(const CommonOptions& opt, int config_threads) {
  if (opt.threads > 0) return opt.threads;
  if (config_threads > 0) return config_threads;
  if (const char* env = std::getenv("PSPIN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::string trim_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

SoftPotential soft_from(const json& doc) {
  return SoftPotential(get_num(doc, "L"), get_int_or(doc, "k", 1));
}

}  // namespace

int cmd_critical(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc, {"terms", "beta_min", "beta_max", "beta_steps", "tol"}, "critical config");
  const Mixture mix = mixture_from(cfg.doc);
  const double beta_min = get_num(cfg.doc, "beta_min");
  const double beta_max = get_num(cfg.doc, "beta_max");
  const int steps = get_int(cfg.doc, "beta_steps");
  const double tol = get_num_or(cfg.doc, "tol", 1e-12);
  require(steps >= 1 && beta_max >= beta_min && beta_min >= 0.0, errc::invalid_argument,
          "critical: need beta_max >= beta_min >= 0 and beta_steps >= 1");

  CsvWriter csv(out_path(opt, "critical.csv"), artifact_header(cfg),
                "beta,beta_c,x_star,q,q_is_trivial,gamma,d_infinity,i_gamma,crit_sufficient,"
                "crit_necessary");
  for (int k = 0; k < steps; ++k) {
    const double beta =
        steps == 1 ? beta_min : beta_min + (beta_max - beta_min) * k / (steps - 1.0);
    const auto cp = critical_profile(mix, beta, tol);
    csv.row({beta, cp.beta_c, cp.x_star, cp.q, cp.q_is_trivial ? 1.0 : 0.0, cp.gamma,
             cp.d_infinity, cp.i_gamma, cp.decay.criterion_sufficient ? 1.0 : 0.0,
             cp.decay.criterion_necessary ? 1.0 : 0.0});
  }
  auto doc = meta(cfg);
  doc["rows"] = steps;
  const auto bc = beta_c(mix, tol);
  doc["beta_c"] = bc.beta_c;
  doc["x_star"] = bc.x_star;
  write_json(out_path(opt, "critical.json"), doc);
  return 0;
}

int cmd_solve_fdt(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc,
             {"terms", "beta", "gamma", "b", "delta", "horizon", "method", "tol", "max_iter",
              "quadrature"},
             "solve-fdt config");
  const Mixture mix = mixture_from(cfg.doc);
  const double beta = get_num(cfg.doc, "beta");
  const double b = get_num_or(cfg.doc, "b", 0.5);
  const double gamma =
      get_num_or(cfg.doc, "gamma", std::numeric_limits<double>::quiet_NaN());
  const double delta = get_num_or(cfg.doc, "delta", 1e-3);
  const double horizon = get_num_or(cfg.doc, "horizon", 0.0);
  const std::string method = get_str_or(cfg.doc, "method", "direct");
  const std::string quad_name = get_str_or(cfg.doc, "quadrature", "trapezoid");
  require(quad_name == "trapezoid" || quad_name == "midpoint", errc::invalid_argument,
          "solve-fdt: quadrature must be trapezoid or midpoint");

  const auto problem = FdtProblem::from_mixture(mix, beta, delta, horizon, gamma, b);
  FdtSolution sol;
  if (method == "direct") {
    sol = solve_direct(problem, quad_name == "midpoint" ? Quadrature::midpoint
                                                        : Quadrature::trapezoid);
  } else if (method == "fixed-point") {
    sol = solve_fixed_point(problem, get_num_or(cfg.doc, "tol", 1e-10),
                            get_int_or(cfg.doc, "max_iter", 200));
  } else {
    fail(errc::invalid_argument, "solve-fdt: method must be 'direct' or 'fixed-point'");
  }
  const auto pair = fdt_pair(sol, b);

  CsvWriter csv(out_path(opt, "fdt.csv"), artifact_header(cfg), "tau,D,Dprime,C_fdt,R_fdt");
  for (std::size_t i = 0; i < sol.D.size(); ++i)
    csv.row({static_cast<double>(i) * sol.delta, sol.D[i], sol.Dprime[i], pair.C[i], pair.R[i]});

  auto doc = meta(cfg);
  doc["b"] = b;
  doc["gamma"] = std::isnan(gamma) ? gamma_of_beta(mix, beta) : gamma;
  doc["mu"] = sol.mu;
  doc["d_infinity"] = sol.d_inf;
  doc["method"] = method;
  doc["iterations"] = sol.iterations;
  doc["residual"] = sol.residual;
  doc["delta"] = sol.delta;
  doc["horizon"] = problem.horizon;
  // stationary residuals need the response tail to clear 1e-8 at the horizon
  try {
    const double g_used = doc["gamma"].get<double>();
    const auto res = stationary_residuals(pair.C, pair.R, sol.delta, mix, beta, g_used, b);
    doc["residuals"] = {{"res_R", res.res_R},
                        {"res_C", res.res_C},
                        {"res_mu", res.res_mu},
                        {"mu_recovered", res.mu_recovered},
                        {"i_gamma", res.i_gamma},
                        {"tail_cut", res.tail_cut}};
  } catch (const error& e) {
    doc["residuals"] = nullptr;
    doc["residuals_note"] = e.what();
  }
  // tail rate of the decaying part
  try {
    std::vector<double> excess(sol.D.size());
    for (std::size_t i = 0; i < sol.D.size(); ++i) excess[i] = sol.D[i] - sol.d_inf;
    const auto fit =
        decay_rate_fit(excess, sol.delta, problem.horizon / 2.0, problem.horizon);
    doc["tail_rate"] = fit.rate;
    doc["tail_r2"] = fit.r2;
  } catch (const error&) {
    doc["tail_rate"] = nullptr;
  }
  write_json(out_path(opt, "fdt.json"), doc);
  return 0;
}

int cmd_solve_twotime(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc,
             {"terms", "beta", "mode", "delta", "horizon", "L", "k", "K0", "sections",
              "tau_sections", "diagnostics", "window", "t_min", "export_h_kernel"},
             "solve-twotime config");
  const Mixture mix = mixture_from(cfg.doc);
  const double beta = get_num(cfg.doc, "beta");
  const double delta = get_num(cfg.doc, "delta");
  const double horizon = get_num(cfg.doc, "horizon");
  const std::string mode = get_str_or(cfg.doc, "mode", "spherical");

  TwoTimeGrid grid;
  if (mode == "spherical") {
    grid = solve_spherical(mix, beta, delta, horizon);
  } else if (mode == "soft") {
    grid = solve_soft(mix, beta, soft_from(cfg.doc), get_num_or(cfg.doc, "K0", 1.0), delta,
                      horizon);
  } else {
    fail(errc::invalid_argument, "solve-twotime: mode must be 'spherical' or 'soft'");
  }

  save_checkpoint(grid, out_path(opt, "grid.ttg"));

  {
    CsvWriter csv(out_path(opt, "diagonal.csv"), artifact_header(cfg), "s,K,mu");
    for (int i = 0; i <= grid.n; ++i) csv.row({i * delta, grid.K[i], grid.mu[i]});
  }
  if (cfg.doc.contains("sections")) {
    require(cfg.doc["sections"].is_array(), errc::invalid_argument,
            "solve-twotime: 'sections' must be an array of times");
    for (const auto& tv : cfg.doc["sections"]) {
      const double t = tv.get<double>();
      const auto sec = fdt_section(grid, t, horizon - t);
      CsvWriter csv(out_path(opt, "section_t" + trim_num(t) + ".csv"), artifact_header(cfg),
                    "tau,C,R");
      for (std::size_t k = 0; k < sec.tau.size(); ++k) csv.row({sec.tau[k], sec.C[k], sec.R[k]});
    }
  }
  if (cfg.doc.contains("tau_sections")) {
    require(cfg.doc["tau_sections"].is_array(), errc::invalid_argument,
            "solve-twotime: 'tau_sections' must be an array of lags");
    for (const auto& tv : cfg.doc["tau_sections"]) {
      const double tau = tv.get<double>();
      const int k = grid.index_of(tau);
      CsvWriter csv(out_path(opt, "tausection_" + trim_num(tau) + ".csv"), artifact_header(cfg),
                    "t,C,R");
      for (int j = 0; j + k <= grid.n; ++j)
        csv.row({j * delta, grid.C.at(j + k, j), grid.R.at(j + k, j)});
    }
  }

  if (cfg.doc.contains("export_h_kernel") && cfg.doc["export_h_kernel"].get<bool>()) {
    const auto kernel = h_ode(grid.C, mix, beta);
    CsvWriter csv(out_path(opt, "hkernel.csv"), artifact_header(cfg), "s,t,H");
    for (int i = 0; i <= kernel.H.n(); ++i)
      for (int j = 0; j <= i; ++j) csv.row({i * delta, j * delta, kernel.H.at(i, j)});
  }

  auto doc = meta(cfg);
  doc["mode"] = mode;
  doc["delta"] = delta;
  doc["horizon"] = horizon;
  doc["mu_final"] = grid.mu.back();
  doc["K_final"] = grid.K.back();
  const auto rb = response_bound_check(grid);
  doc["response_bound"] = {{"worst_ratio", rb.worst_ratio},
                           {"s", rb.s},
                           {"t1", rb.t1},
                           {"t2", rb.t2}};
  const bool want_diag = !cfg.doc.contains("diagnostics") || cfg.doc["diagnostics"].get<bool>();
  if (want_diag) {
    const auto d = fdt_violation(grid, mix, beta, get_num_or(cfg.doc, "window", 3.0),
                                 get_num_or(cfg.doc, "t_min", 5.0));
    doc["diagnostics"] = {{"rho", d.rho},
                          {"i_hat", d.i_hat},
                          {"diag_identity_sup", d.diag_identity_sup},
                          {"g_sup_window", d.g_sup_window},
                          {"window", d.window},
                          {"t_min", d.t_min}};
  }
  write_json(out_path(opt, "twotime.json"), doc);
  return 0;
}

int cmd_psi_iterate(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc, {"terms", "beta", "delta", "horizon", "iterations", "start"},
             "psi-iterate config");
  const Mixture mix = mixture_from(cfg.doc);
  const double beta = get_num(cfg.doc, "beta");
  const double delta = get_num(cfg.doc, "delta");
  const double horizon = get_num(cfg.doc, "horizon");
  const int iterations = get_int_or(cfg.doc, "iterations", 6);
  const std::string start = get_str_or(cfg.doc, "start", "ou");
  require(iterations >= 1 && iterations <= 64, errc::invalid_argument,
          "psi-iterate: iterations must be in [1, 64]");

  const auto reference = solve_spherical(mix, beta, delta, horizon);
  TwoTimeGrid current = reference;
  if (start == "ou") {
    for (int i = 0; i <= current.n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = std::exp(-0.5 * (i - j) * delta);
        current.R.at(i, j) = v;
        current.C.at(i, j) = v;
      }
  } else {
    require(start == "solve", errc::invalid_argument,
            "psi-iterate: start must be 'ou' or 'solve'");
  }

  auto sup_dists = [](const TwoTimeGrid& a, const TwoTimeGrid& b) {
    double dR = 0.0, dC = 0.0;
    for (int i = 0; i <= a.n; ++i)
      for (int j = 0; j <= i; ++j) {
        dR = std::max(dR, std::abs(a.R.at(i, j) - b.R.at(i, j)));
        dC = std::max(dC, std::abs(a.C.at(i, j) - b.C.at(i, j)));
      }
    return std::pair<double, double>(dR, dC);
  };

  CsvWriter csv(out_path(opt, "psi.csv"), artifact_header(cfg), "iter,dR,dC,step,ratio");
  double prev_step = -1.0;
  double last_step = 0.0;
  for (int k = 1; k <= iterations; ++k) {
    const auto next = apply_psi(current, mix, beta);
    const auto [dR, dC] = sup_dists(next, current);
    last_step = dR + dC;
    csv.row({static_cast<double>(k), dR, dC, last_step,
             prev_step > 0.0 ? last_step / prev_step : 0.0});
    prev_step = last_step;
    current = next;
  }
  const auto [fR, fC] = sup_dists(current, reference);
  auto doc = meta(cfg);
  doc["iterations"] = iterations;
  doc["start"] = start;
  doc["final_step"] = last_step;
  doc["distance_to_solution"] = {{"dR", fR}, {"dC", fC}};
  write_json(out_path(opt, "psi.json"), doc);
  return 0;
}

namespace {

LangevinConfig langevin_config_from(const json& doc, const CommonOptions& opt) {
  LangevinConfig cfg;
  cfg.N = get_int(doc, "N");
  cfg.dt = get_num(doc, "dt");
  cfg.horizon = get_num(doc, "horizon");
  cfg.replicas = get_int_or(doc, "replicas", 4);
  cfg.seed = get_u64_or(doc, "seed", 1);
  cfg.save_stride = get_int_or(doc, "save_stride", 50);
  cfg.threads = resolve_threads(opt, get_int_or(doc, "threads", 0));
  if (opt.has_seed_override) cfg.seed = opt.seed_override;
  return cfg;
}

void write_run_csv(const LangevinRun& run, const std::string& path, const std::string& header) {
  CsvWriter csv(path, header, "s,t,C_N_mean,C_N_se,chi_N_mean,chi_N_se");
  std::size_t q = 0;
  for (int a = 0; a < run.slices(); ++a)
    for (int b = 0; b <= a; ++b, ++q)
      csv.row({run.times[a], run.times[b], run.C_mean[q], run.C_se[q], run.chi_mean[q],
               run.chi_se[q]});
}

json run_meta(const LoadedConfig& cfg, const LangevinRun& run) {
  auto doc = meta(cfg);
  doc["N"] = run.config.N;
  doc["dt"] = run.config.dt;
  doc["horizon"] = run.config.horizon;
  doc["replicas"] = run.config.replicas;
  doc["seed"] = run.config.seed;
  doc["save_stride"] = run.config.save_stride;
  doc["beta"] = run.beta;
  doc["L"] = run.soft_L;
  doc["k"] = run.soft_k;
  json terms = json::array();
  for (const auto& t : run.mixture_terms) terms.push_back({{"p", t.p}, {"a", t.a}});
  doc["terms"] = terms;
  return doc;
}

}  // namespace

int cmd_simulate(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc,
             {"terms", "beta", "L", "k", "N", "dt", "horizon", "replicas", "seed",
              "save_stride", "threads"},
             "simulate config");
  const Mixture mix = mixture_from(cfg.doc);
  const double beta = get_num(cfg.doc, "beta");
  const auto pot = soft_from(cfg.doc);
  const auto lc = langevin_config_from(cfg.doc, opt);
  const auto run = simulate(mix, beta, pot, lc);
  write_run_csv(run, out_path(opt, "sim.csv"), artifact_header(cfg));
  write_json(out_path(opt, "sim.json"), run_meta(cfg, run));
  return 0;
}

int cmd_compare(const LoadedConfig& cfg, const CommonOptions& opt) {
  check_keys(cfg.doc,
             {"terms", "beta", "L", "k", "N", "dt", "horizon", "replicas", "seed",
              "save_stride", "threads", "grid"},
             "compare config");
  const std::string grid_path = get_str_or(cfg.doc, "grid", "");
  require(!grid_path.empty(), errc::invalid_argument,
          "compare: 'grid' must point to a twotime checkpoint (.ttg)");
  const auto grid = load_checkpoint(grid_path);
  const Mixture mix = mixture_from(cfg.doc);
  const double beta = get_num(cfg.doc, "beta");
  const auto pot = soft_from(cfg.doc);
  const auto lc = langevin_config_from(cfg.doc, opt);
  const auto run = simulate(mix, beta, pot, lc);
  const auto rep = compare_to_limit(run, grid);

  CsvWriter csv(out_path(opt, "compare.csv"), artifact_header(cfg),
                "s,t,C_N,C_grid,dC,chi_N,chi_grid,dchi,C_se,chi_se");
  std::size_t q = 0;
  for (int a = 0; a < run.slices(); ++a)
    for (int b = 0; b <= a; ++b, ++q) {
      const double s = run.times[a], t = run.times[b];
      const double cg = grid_interp_c(grid, s, t);
      const double xg = grid_interp_chi(grid, s, t);
      csv.row({s, t, run.C_mean[q], cg, run.C_mean[q] - cg, run.chi_mean[q], xg,
               run.chi_mean[q] - xg, run.C_se[q], run.chi_se[q]});
    }
  auto doc = run_meta(cfg, run);
  doc["grid"] = grid_path;
  doc["discrepancy"] = {{"sup_C", rep.sup_C},     {"rms_C", rep.rms_C},
                        {"sup_chi", rep.sup_chi}, {"rms_chi", rep.rms_chi},
                        {"max_se_C", rep.max_se_C}, {"max_se_chi", rep.max_se_chi},
                        {"pairs", rep.pairs}};
  write_json(out_path(opt, "compare.json"), doc);
  return 0;
}

int cmd_verify(const std::string& level_name, const CommonOptions& opt) {
  accept::Level level;
  if (level_name == "quick") level = accept::Level::quick;
  else if (level_name == "full") level = accept::Level::full;
  else fail(errc::invalid_argument, "verify: level must be 'quick' or 'full'");

  json items = json::array();
  bool all_pass = true;
  accept::run_acceptance(level, {}, [&](const accept::CriterionResult& r) {
    all_pass = all_pass && r.pass;
    std::printf("%-4s %s (%.1f s): %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                r.details.c_str());
    std::fflush(stdout);
    items.push_back(
        {{"id", r.id}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
  });
  json doc = {{"version", PSPIN_VERSION},
              {"level", level_name},
              {"criteria", items},
              {"all_pass", all_pass}};
  write_json(out_path(opt, "verify.json"), doc);
  if (!all_pass) {
    std::fprintf(stderr, "verify: failing criteria:");
    for (const auto& it : items)
      if (!it["pass"].get<bool>()) std::fprintf(stderr, " %s", it["id"].get<std::string>().c_str());
    std::fprintf(stderr, "\n");
    return 1;
  }
  return 0;
}

}  // namespace pspin::cli

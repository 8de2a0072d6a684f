#include "pspin/accept.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pspin/critical.hpp"
#include "pspin/errors.hpp"
#include "pspin/fdt.hpp"
#include "pspin/langevin.hpp"
#include "pspin/noncrossing.hpp"
#include "pspin/twotime.hpp"

namespace pspin::accept {

namespace {

using clock_type = std::chrono::steady_clock;

const Mixture& two_spin() {
  static const Mixture m = Mixture::pure(2, 1.0);
  return m;
}
const Mixture& three_spin() {
  static const Mixture m = Mixture::pure(3, std::sqrt(6.0));
  return m;
}

struct Check {
  bool pass = true;
  std::string details;

  void add(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!details.empty()) details += "; ";
    details += (ok ? "" : "FAILED: ") + what;
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double sup_error_vs_exponential(const TwoTimeGrid& g, double rate) {
  double worst = 0.0;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double ex = std::exp(-rate * (i - j) * g.delta);
      worst = std::max(worst, std::abs(g.C.at(i, j) - ex));
      worst = std::max(worst, std::abs(g.R.at(i, j) - ex));
    }
  return worst;
}

double grid_sup_distance(const TwoTimeGrid& a, const TwoTimeGrid& b) {
  double d = 0.0;
  for (int i = 0; i <= a.n; ++i)
    for (int j = 0; j <= i; ++j) {
      d = std::max(d, std::abs(a.C.at(i, j) - b.C.at(i, j)));
      d = std::max(d, std::abs(a.R.at(i, j) - b.R.at(i, j)));
    }
  return d;
}

// ---- criteria ----

Check a1(Level level) {
  const double delta = level == Level::full ? 0.005 : 0.01;
  const double horizon = level == Level::full ? 5.0 : 3.0;
  const auto t0 = clock_type::now();
  const auto g = solve_spherical(two_spin(), 0.0, delta, horizon);
  const double el = std::chrono::duration<double>(clock_type::now() - t0).count();
  double mu_err = 0.0;
  for (double m : g.mu) mu_err = std::max(mu_err, std::abs(m - 0.5));
  const double err = std::max(sup_error_vs_exponential(g, 0.5), mu_err);
  Check c;
  c.add(err < 1e-3, "free-dynamics sup error " + num(err) + " < 1e-3");
  c.add(el < 10.0, "runtime " + num(el) + " s < 10 s");
  return c;
}

Check a2(Level level) {
  const bool full = level == Level::full;
  const double delta = full ? 0.01 : 0.02;
  const double horizon = full ? 12.0 : 8.0;
  const double t_section = full ? 9.0 : 5.0;
  const double tau_max = full ? 3.0 : 2.0;
  const auto t0 = clock_type::now();
  const auto g = solve_spherical(three_spin(), 0.05, delta, horizon);
  const auto p = FdtProblem::from_mixture(three_spin(), 0.05, 1e-3, 20.0);
  const auto ref = solve_direct(p);
  const auto sec = fdt_section(g, t_section, tau_max);
  double dc = 0.0, dr = 0.0;
  for (std::size_t k = 0; k < sec.tau.size(); ++k) {
    const int i_f = static_cast<int>(std::lround(sec.tau[k] / p.delta));
    dc = std::max(dc, std::abs(sec.C[k] - ref.D[i_f]));
    dr = std::max(dr, std::abs(sec.R[k] + 2.0 * ref.Dprime[i_f]));
  }
  const double el = std::chrono::duration<double>(clock_type::now() - t0).count();
  Check c;
  c.add(dc < 0.02,
        "sup |C(t+tau,t) - C_fdt(tau)| = " + num(dc) + " < 0.02 at t=" + num(t_section));
  c.add(dr < 0.03, "sup |R(t+tau,t) + 2 C_fdt'(tau)| = " + num(dr) + " < 0.03");
  c.add(el < 300.0, "runtime " + num(el) + " s < 300 s");
  return c;
}

Check a3(Level level) {
  const bool full = level == Level::full;
  const double delta = full ? 0.01 : 0.02;
  const double horizon = full ? 12.0 : 8.0;
  const auto g = solve_spherical(three_spin(), 0.05, delta, horizon);
  const double delta_beta = 0.5 - 2.0 * 0.05 * std::sqrt(three_spin().nu2(1.0));
  double viol = -1e9;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= i; ++j)
      viol = std::max(viol, g.R.at(i, j) - std::exp(-delta_beta * (i - j) * delta));
  const double t_fit = full ? 4.0 : 0.0;
  const double tau_fit = full ? 8.0 : 6.0;
  const auto sec = fdt_section(g, t_fit, tau_fit);
  const auto fit = decay_rate_fit(sec.C, delta, 2.0, tau_fit);
  Check c;
  c.add(viol <= 10 * delta, "R <= exp(-delta_beta (s-t)) with delta_beta=" + num(delta_beta) +
                                ", worst excess " + num(viol) + " <= " + num(10 * delta));
  c.add(fit.rate > 0.2, "fitted C-tail rate " + num(fit.rate) + " > 0.2");
  c.add(fit.r2 > 0.99, "fit r^2 " + num(fit.r2) + " > 0.99");
  return c;
}

Check a4(Level level) {
  const auto t0 = clock_type::now();
  Check c;
  const std::uint64_t expected[6] = {1, 2, 5, 14, 42, 132};
  bool counts_ok = true;
  for (int n = 1; n <= 6; ++n) {
    const auto all = enumerate_nc(n);
    counts_ok = counts_ok && all.size() == expected[n - 1] && all.size() == catalan(n);
    for (const auto& s : all) counts_ok = counts_ok && is_noncrossing_involution(s);
  }
  c.add(counts_ok, "enumeration counts = Catalan(1..6) = 1,2,5,14,42,132");

  // h_ode on a fine mesh vs the Richardson-extrapolated series on T = 2
  auto sampled = [](int n, double dt) {
    TriangularField C(n, dt);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) C.at(i, j) = std::exp(-0.5 * (i - j) * dt);
    return C;
  };
  const int n_ode = 400;  // keeps the ODE-side truncation under the 1e-6 floor
  (void)level;
  for (const Mixture* mix : {&two_spin(), &three_spin()}) {
    const double beta = mix->max_p() == 2 ? 0.2 : 0.15;
    const auto kernel = h_ode(sampled(n_ode, 2.0 / n_ode), *mix, beta);
    const auto Ca = sampled(50, 0.04);
    const auto Cb = sampled(100, 0.02);
    double worst = 0.0, bound = 1e-6;
    for (double tau : {1.0, 2.0}) {
      const auto ra = h_series(Ca, *mix, beta, static_cast<int>(tau * 25), 0, 7);
      const auto rb = h_series(Cb, *mix, beta, static_cast<int>(tau * 50), 0, 7);
      const double series = (4.0 * rb.value - ra.value) / 3.0;
      const double ode = kernel.H.at(static_cast<int>(tau * n_ode / 2), 0);
      worst = std::max(worst, std::abs(ode - series));
      bound = std::max(bound, rb.tail_bound);
    }
    c.add(worst < bound, "h_ode vs h_series (p=" + std::to_string(mix->max_p()) +
                             "): " + num(worst) + " < " + num(bound));
  }
  const double el = std::chrono::duration<double>(clock_type::now() - t0).count();
  c.add(el < 30.0, "runtime " + num(el) + " s < 30 s");
  return c;
}

Check a5(Level level) {
  const bool full = level == Level::full;
  const double delta = full ? 0.01 : 0.02;
  const double horizon = full ? 12.0 : 6.0;
  const double beta = 0.05;
  const auto sol = solve_spherical(three_spin(), beta, delta, horizon);
  const auto img = apply_psi(sol, three_spin(), beta);
  const double fp = grid_sup_distance(sol, img);
  auto perturb = [&](double amp) {
    TwoTimeGrid g = sol;
    for (int i = 0; i <= g.n; ++i)
      for (int j = 0; j < i; ++j) {
        const double tau = (i - j) * delta;
        const double bump = amp * (1.0 - std::exp(-tau)) * std::exp(-tau / 4.0);
        g.R.at(i, j) = sol.R.at(i, j) * (1.0 + bump);
        g.C.at(i, j) = sol.C.at(i, j) * (1.0 - bump);
      }
    return g;
  };
  auto norm_dist = [](const TwoTimeGrid& a, const TwoTimeGrid& b) {
    double sR = 0.0, sC = 0.0;
    for (int i = 0; i <= a.n; ++i)
      for (int j = 0; j <= i; ++j) {
        sR = std::max(sR, std::abs(a.R.at(i, j) - b.R.at(i, j)));
        sC = std::max(sC, std::abs(a.C.at(i, j) - b.C.at(i, j)));
      }
    return sR + sC;
  };
  const auto x = perturb(0.10), y = perturb(-0.06);
  const double factor =
      norm_dist(apply_psi(x, three_spin(), beta), apply_psi(y, three_spin(), beta)) /
      norm_dist(x, y);
  Check c;
  c.add(fp < 20 * delta, "fixed point residual " + num(fp) + " < " + num(20 * delta));
  c.add(factor <= 0.67 + 0.05, "contraction factor " + num(factor) + " <= 0.72");
  return c;
}

Check a6(Level level) {
  const bool full = level == Level::full;
  const double delta = full ? 0.005 : 0.01;
  const double horizon = full ? 5.0 : 3.0;
  const double beta = 0.05;
  const auto sph = solve_spherical(three_spin(), beta, delta, horizon);
  Check c;
  double prev = 1e9, last = 0.0;
  bool monotone = true;
  for (double L : {10.0, 100.0, 1000.0}) {
    const auto g = solve_soft(three_spin(), beta, SoftPotential(L, 1), 1.0, delta, horizon);
    last = grid_sup_distance(g, sph);
    monotone = monotone && last < prev;
    prev = last;
  }
  c.add(monotone, "soft->spherical distance decreases over L = 10, 100, 1000");
  c.add(last < 0.02, "distance at L=1000 is " + num(last) + " < 0.02");
  double prev_b = -1.0;
  bool k_lower = true, b_stable = true;
  for (double L : {250.0, 500.0, 1000.0}) {
    const auto g = solve_soft(three_spin(), beta, SoftPotential(L, 1), 1.0, delta, horizon);
    double kmax = -1e9, kmin = 1e9;
    for (double k : g.K) {
      kmax = std::max(kmax, k);
      kmin = std::min(kmin, k);
    }
    k_lower = k_lower && kmin >= 1.0 - 10 * delta;
    const double B = L * (kmax - 1.0);
    if (prev_b >= 0.0) b_stable = b_stable && B < 2 * prev_b + 0.05 && B > 0.5 * prev_b - 0.05;
    prev_b = B;
  }
  c.add(k_lower, "K_L >= 1 - 10 delta for all L");
  c.add(b_stable, "fitted B = L sup|K_L - 1| stable under L-doubling (last " + num(prev_b) + ")");
  return c;
}

Check a7(Level level) {
  const bool full = level == Level::full;
  Check c;
  {
    FdtProblem p;
    p.b = 0.5;
    p.phi = PhiFunction::constant(0.5);
    p.d_inf = 0.0;
    p.delta = 1e-3;
    p.horizon = 5.0;
    const auto s = solve_direct(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.D.size(); ++i)
      worst = std::max(worst, std::abs(s.D[i] - std::exp(-0.5 * i * p.delta)));
    c.add(worst < 1e-5, "phi = 1/2 gives D = e^{-s/2} to " + num(worst) + " < 1e-5");
  }
  {
    const double horizon = full ? 40.0 : 20.0;
    const auto p = FdtProblem::from_mixture(two_spin(), 1.0, 2e-3, horizon, 0.0);
    const auto s = solve_direct(p);
    const int iT = static_cast<int>(std::lround(horizon / p.delta));
    const double gap = std::abs(s.D[iT] - 0.5);
    const double law = 1.0 / (2.0 * std::sqrt(std::numbers::pi * horizon));
    c.add(gap < 0.01, "|D(" + num(horizon) + ") - 0.5| = " + num(gap) +
                          " < 0.01 (the true tail is algebraic, D - 1/2 ~ 1/(2 sqrt(pi s)) = " +
                          num(law) + " here, so 0.01 is out of reach before s ~ 800)");
    double prev_rate = 1e9;
    bool decreasing = true;
    double last_rate = 0.0;
    for (double T : {horizon / 2, horizon}) {
      const auto pT = FdtProblem::from_mixture(two_spin(), 1.0, 4e-3, T, 0.0);
      const auto sT = solve_direct(pT);
      std::vector<double> excess(sT.D.size());
      for (std::size_t i = 0; i < sT.D.size(); ++i) excess[i] = sT.D[i] - 0.5;
      last_rate = decay_rate_fit(excess, pT.delta, T / 2, T).rate;
      decreasing = decreasing && last_rate < prev_rate;
      prev_rate = last_rate;
    }
    c.add(decreasing && last_rate < 0.05,
          "equality case: fitted tail rate vanishes (last " + num(last_rate) + ")");
    const auto sf = solve_fixed_point(p);
    double d2 = 0.0;
    for (std::size_t i = 0; i < s.D.size(); ++i) d2 = std::max(d2, std::abs(s.D[i] - sf.D[i]));
    c.add(d2 < 1e-4, "2-spin direct vs fixed point " + num(d2) + " < 1e-4");
  }
  {
    const auto p = FdtProblem::from_mixture(three_spin(), 0.05, 1e-3, full ? 10.0 : 6.0);
    const auto sd = solve_direct(p);
    const auto sf = solve_fixed_point(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < sd.D.size(); ++i)
      worst = std::max(worst, std::abs(sd.D[i] - sf.D[i]));
    c.add(worst < 1e-4, "3-spin direct vs fixed point " + num(worst) + " < 1e-4");
  }
  return c;
}

Check a8(Level) {
  Check c;
  const double tol = 1e-12;
  {
    const auto bc = beta_c(two_spin(), tol);
    const auto q = q_of_beta(two_spin(), 1.0, tol);
    const double gamma = gamma_of_beta(two_spin(), 1.0, tol);
    const double ig = i_gamma(two_spin(), 1.0, gamma, 0.5, tol);
    c.add(std::abs(bc.beta_c - 0.5) < 1e-9, "2-spin beta_c = 0.5 (" + num(bc.beta_c) + ")");
    c.add(std::abs(q.q - 0.5) < 1e-9, "2-spin q(1) = 0.5 (" + num(q.q) + ")");
    c.add(std::abs(gamma) < 1e-9, "2-spin gamma(1) = 0 (" + num(gamma) + ")");
    c.add(std::abs(ig) < 1e-9, "2-spin I_gamma(1) = 0 (" + num(ig) + ")");
  }
  {
    const auto bc = beta_c(three_spin(), tol);
    c.add(std::abs(bc.beta_c - 1.0 / std::sqrt(3.0)) < 1e-9,
          "3-spin beta_c = 1/sqrt(3) (" + num(bc.beta_c) + ")");
    c.add(std::abs(bc.x_star - 0.5) < 1e-9, "3-spin x* = 0.5 (" + num(bc.x_star) + ")");
  }
  bool identity_ok = true, defn_ok = true;
  for (const Mixture* mix : {&two_spin(), &three_spin()}) {
    const double bc = beta_c(*mix, tol).beta_c;
    for (double f = 1.05; f < 2.3; f += 0.117) {
      const double beta = f * bc;
      const double q = q_of_beta(*mix, beta, tol).q;
      const double gamma = gamma_of_beta(*mix, beta, tol);
      const double ig = gamma - 0.5 + 2 * beta * beta * q * mix->nu1(q);
      const double rhs = 4 * beta * beta * (1 - q) * (mix->nu2(q) - mix->nu1(q)) - 1.0;
      identity_ok = identity_ok && std::abs(2 * ig - rhs) <= 1e-8;
      defn_ok =
          defn_ok && std::abs(4 * beta * beta * mix->nu2(q) * (1 - q) * (1 - q) - 1.0) <= 1e-9;
    }
  }
  c.add(identity_ok, "2 I_gamma = 4 beta^2 (1-q)[nu''(q)-nu'(q)] - 1 to 1e-8 above beta_c");
  c.add(defn_ok, "q solves 4 beta^2 nu''(q)(1-q)^2 = 1 to 1e-9");
  return c;
}

Check a9(Level level) {
  const bool full = level == Level::full;
  const double delta = full ? 0.01 : 0.02;
  const auto g = solve_spherical(three_spin(), 0.05, delta, full ? 12.0 : 8.0);
  const auto d = fdt_violation(g, three_spin(), 0.05, 3.0, 5.0);
  Check c;
  c.add(d.diag_identity_sup < 10 * delta,
        "sup |I(s,s) - (mu(s) - 1/2 - 2 beta^2 nu'(1))| = " + num(d.diag_identity_sup) + " < " +
            num(10 * delta));
  c.add(d.g_sup_window < 0.02,
        "sup |G(t+tau,t)| over t >= 5, tau <= 3 is " + num(d.g_sup_window) + " < 0.02");
  c.add(std::abs(d.i_hat) < 0.02, "|I_hat| = " + num(std::abs(d.i_hat)) + " < 0.02");
  return c;
}

Check a10(Level level) {
  const bool full = level == Level::full;
  const auto t0 = clock_type::now();
  Check c;
  {
    LangevinConfig cfg;
    cfg.N = full ? 400 : 200;
    cfg.dt = 2e-3;
    cfg.horizon = 3.0;
    cfg.replicas = full ? 8 : 4;
    cfg.seed = 20240915;
    cfg.save_stride = 50;
    const auto run = simulate(two_spin(), 0.0, SoftPotential(100.0, 1), cfg);
    double worst = 0.0;
    for (int a = 0; a < run.slices(); ++a)
      for (int b = 0; b <= a; ++b)
        worst = std::max(
            worst, std::abs(run.c_at(a, b) - std::exp(-0.5 * (run.times[a] - run.times[b]))));
    c.add(worst < 0.12, "beta=0, N=" + std::to_string(cfg.N) +
                            ": sup |C_N - e^{-tau/2}| = " + num(worst) + " < 0.12");
  }
  {
    LangevinConfig cfg;
    cfg.N = 200;
    cfg.dt = 2e-3;
    cfg.horizon = 3.0;
    cfg.replicas = full ? 4 : 2;
    cfg.seed = 7;
    cfg.save_stride = 100;
    const auto run = simulate(three_spin(), 0.05, SoftPotential(100.0, 1), cfg);
    const auto grid = solve_spherical(three_spin(), 0.05, 0.01, 3.0);
    const auto rep = compare_to_limit(run, grid);
    const double worst = std::max(rep.sup_C, rep.sup_chi);
    c.add(worst < 0.15, "3-spin N=200: sup discrepancy vs grid = " + num(worst) +
                            " < 0.15 (max SE " + num(std::max(rep.max_se_C, rep.max_se_chi)) +
                            ")");
  }
  {
    const auto grid = solve_spherical(two_spin(), 0.05, 0.01, 3.0);
    const std::vector<int> sizes =
        full ? std::vector<int>{50, 200, 800} : std::vector<int>{50, 200};
    const int samples = full ? 5 : 3;
    std::vector<double> medians;
    for (int N : sizes) {
      std::vector<double> d;
      for (int s = 0; s < samples; ++s) {
        LangevinConfig cfg;
        cfg.N = N;
        cfg.dt = 2e-3;
        cfg.horizon = 3.0;
        cfg.replicas = 2;
        cfg.seed = 1000 + 13 * s;
        cfg.save_stride = 100;
        const auto run = simulate(two_spin(), 0.05, SoftPotential(100.0, 1), cfg);
        const auto rep = compare_to_limit(run, grid);
        d.push_back(std::max(rep.sup_C, rep.sup_chi));
      }
      std::sort(d.begin(), d.end());
      medians.push_back(d[d.size() / 2]);
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < medians.size(); ++k)
      decreasing = decreasing && medians[k] < medians[k - 1];
    std::string med;
    for (double m : medians) med += num(m) + " ";
    c.add(decreasing, "median discrepancy decreases with N (2-spin sweep): " + med);
  }
  const double el = std::chrono::duration<double>(clock_type::now() - t0).count();
  c.add(el < 900.0, "runtime " + num(el) + " s < 900 s");
  return c;
}

Check a11(Level level) {
  const bool full = level == Level::full;
  Check c;
  const auto g0 = solve_spherical(two_spin(), 0.0, full ? 0.005 : 0.01, full ? 5.0 : 3.0);
  const auto g3 = solve_spherical(three_spin(), 0.05, 0.01, full ? 12.0 : 6.0);
  const auto gs =
      solve_soft(three_spin(), 0.05, SoftPotential(100.0, 1), 1.0, 0.01, full ? 5.0 : 3.0);
  for (const auto* g : {&g0, &g3, &gs}) {
    const auto rep = response_bound_check(*g);
    c.add(rep.worst_ratio <= 1.0 + 20 * g->delta,
          "ratio " + num(rep.worst_ratio) + " <= " + num(1.0 + 20 * g->delta));
  }
  return c;
}

}  // namespace

std::vector<std::string> criterion_ids() {
  return {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"};
}

CriterionResult run_criterion(const std::string& id, Level level) {
  const auto t0 = clock_type::now();
  Check c;
  if (id == "A1") c = a1(level);
  else if (id == "A2") c = a2(level);
  else if (id == "A3") c = a3(level);
  else if (id == "A4") c = a4(level);
  else if (id == "A5") c = a5(level);
  else if (id == "A6") c = a6(level);
  else if (id == "A7") c = a7(level);
  else if (id == "A8") c = a8(level);
  else if (id == "A9") c = a9(level);
  else if (id == "A10") c = a10(level);
  else if (id == "A11") c = a11(level);
  else fail(errc::invalid_argument, "unknown criterion id: " + id);
  CriterionResult r;
  r.id = id;
  r.pass = c.pass;
  r.details = c.details;
  r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(
    Level level, const std::vector<std::string>& only,
    const std::function<void(const CriterionResult&)>& on_each) {
  std::vector<CriterionResult> out;
  for (const auto& id : criterion_ids()) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    CriterionResult r;
    try {
      r = run_criterion(id, level);
    } catch (const std::exception& e) {
      r.id = id;
      r.pass = false;
      r.details = std::string("exception: ") + e.what();
    }
    if (on_each) on_each(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pspin::accept

#include "pspin/fdt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pspin/grid.hpp"

namespace pspin {

FdtProblem FdtProblem::from_mixture(const Mixture& mix, double beta, double delta,
                                    double horizon, double gamma, double b) {
  FdtProblem p;
  p.b = b;
  if (std::isnan(gamma)) gamma = gamma_of_beta(mix, beta);
  p.phi = PhiFunction::from_mixture(mix, beta, gamma);
  p.d_inf = d_infinity(p.phi, b);
  p.delta = delta;
  if (horizon <= 0.0) {
    const double eps = std::max(0.05, 0.5 - 2.0 * beta * beta * mix.nu2(0.0));
    horizon = std::max(20.0, 10.0 / eps);
  }
  p.horizon = horizon;
  return p;
}

void FdtProblem::validate() const {
  require(b > 0.0, errc::invalid_argument, "fdt: b must be positive");
  require(delta > 0.0 && horizon > delta, errc::invalid_argument,
          "fdt: need 0 < delta < horizon");
  const long n = std::lround(horizon / delta);
  require(n >= 2 && n <= 40'000'000L, errc::resource_limit, "fdt: mesh size out of range");
  // Feasibility (eq. of D_inf): sup phi(x)(1-x) >= b. d_infinity throws when
  // violated, so probing it here surfaces infeasible models early.
  (void)d_infinity(phi, b);
}

namespace {

int mesh_size(const FdtProblem& p) { return static_cast<int>(std::lround(p.horizon / p.delta)); }

void check_range(const std::vector<double>& D, double d_inf, double delta) {
  const double slack = 10.0 * delta * delta;
  for (double v : D)
    require(v >= -slack && v <= 1.0 + slack, errc::divergence,
            "fdt: D left [0,1] beyond the 10*delta^2 allowance");
  (void)d_inf;
}

}  // namespace

FdtSolution solve_direct(const FdtProblem& p, Quadrature quad) {
  p.validate();
  const int n = mesh_size(p);
  const double dt = p.delta;
  const double b = p.b;
  const auto& phi = p.phi;

  std::vector<double> D(n + 1), u(n + 1), ph(n + 1);  // ph caches phi(D_j)
  D[0] = 1.0;
  u[0] = -b;
  ph[0] = phi(1.0);
  const double mu = ph[0];

  for (int i = 1; i <= n; ++i) {
    // predict D_i to O(dt^3): Taylor start, then two-step Adams-Bashforth
    double Dpred = (i == 1) ? 1.0 - dt * b + 0.5 * dt * dt * mu * b
                            : D[i - 1] + 0.5 * dt * (3.0 * u[i - 1] - u[i - 2]);
    double ui = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double phi_i = phi(Dpred);
      if (quad == Quadrature::trapezoid) {
        // conv = dt [ phi_0 u_i / 2 + sum_{j=1}^{i-1} phi_j u_{i-j} + phi_i u_0 / 2 ]
        double s = 0.5 * phi_i * u[0];
        for (int j = 1; j < i; ++j) s += ph[j] * u[i - j];
        ui = (-b - dt * s) / (1.0 + 0.5 * dt * ph[0]);
      } else {
        // midpoint products of averaged nodes:
        // conv = (dt/2) sum_{j=0}^{i-1} phi((D_j+D_{j+1})/2) (u_{i-j} + u_{i-j-1})
        const double phb0 = phi(0.5 * (D[0] + ((i == 1) ? Dpred : D[1])));
        double s = 0.5 * phb0 * u[i - 1];
        for (int j = 1; j < i; ++j) {
          const double Dj1 = (j + 1 == i) ? Dpred : D[j + 1];
          s += 0.5 * phi(0.5 * (D[j] + Dj1)) * (u[i - j] + u[i - j - 1]);
        }
        ui = (-b - dt * s) / (1.0 + 0.5 * dt * phb0);
      }
      Dpred = D[i - 1] + 0.5 * dt * (u[i - 1] + ui);
    }
    u[i] = ui;
    D[i] = Dpred;
    ph[i] = phi(D[i]);
  }
  check_range(D, p.d_inf, dt);

  FdtSolution sol;
  sol.D = std::move(D);
  sol.Dprime = std::move(u);
  sol.delta = dt;
  sol.b = b;
  sol.d_inf = p.d_inf;
  sol.mu = mu;
  sol.method = FdtMethod::direct;
  sol.iterations = 1;
  sol.residual = 0.0;
  return sol;
}

namespace {

/// H_s(E) from d/ds H_s = int_0^s a(s-v) H_v dv with a(w) = b phi'(E(w)+D_inf) H_w,
/// Heun stepping with trapezoidal memory (same order as the direct scheme).
void solve_h_kernel(const FdtProblem& p, const std::vector<double>& E, std::vector<double>& H) {
  const int n = static_cast<int>(E.size()) - 1;
  const double dt = p.delta;
  std::vector<double> kprime(n + 1), a(n + 1), G(n + 1);
  for (int i = 0; i <= n; ++i) kprime[i] = p.b * p.phi.deriv(E[i] + p.d_inf);
  H.assign(n + 1, 0.0);
  H[0] = 1.0;
  a[0] = kprime[0];
  G[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    double Hp = H[i - 1] + dt * G[i - 1];
    a[i] = kprime[i] * Hp;
    // trapezoid of a(i-v) H(v) over v in [0, i]
    double s = 0.5 * (a[i] * H[0] + a[0] * Hp);
    for (int v = 1; v < i; ++v) s += a[i - v] * H[v];
    const double Gp = dt * s;
    H[i] = H[i - 1] + 0.5 * dt * (G[i - 1] + Gp);
    a[i] = kprime[i] * H[i];
    s = 0.5 * (a[i] * H[0] + a[0] * H[i]);
    for (int v = 1; v < i; ++v) s += a[i - v] * H[v];
    G[i] = dt * s;
  }
}

}  // namespace

FdtSolution solve_fixed_point(const FdtProblem& p, double tol, int max_iter,
                              const std::function<void(std::span<const double>)>& observer) {
  p.validate();
  require(tol > 0.0 && max_iter >= 1, errc::invalid_argument,
          "fdt fixed point: need tol > 0 and max_iter >= 1");
  const int n = mesh_size(p);
  const double dt = p.delta;
  const double mu = p.phi(1.0);
  const double e0 = 1.0 - p.d_inf;

  std::vector<double> E(n + 1, e0), Enew(n + 1), H;
  std::vector<double> expmu(n + 1);
  for (int i = 0; i <= n; ++i) expmu[i] = std::exp(-mu * i * dt);

  // Intermediate iterates may cross zero (the map clamps them); only the
  // converged image must stay clear of the truncation, which is checked after
  // the loop.
  const auto apply_phi = [&](double& clamp) {
    double acc = 0.0;
    clamp = 0.0;
    Enew[0] = e0;
    for (int i = 1; i <= n; ++i) {
      acc += 0.5 * dt * (expmu[i - 1] * H[i - 1] + expmu[i] * H[i]);
      double v = e0 - p.b * acc;
      if (v < 0.0) {
        clamp = std::max(clamp, -v);
        v = 0.0;
      }
      Enew[i] = v;
    }
  };

  double residual = 0.0, max_clamp = 0.0;
  int iter = 0;
  for (iter = 1; iter <= max_iter; ++iter) {
    solve_h_kernel(p, E, H);
    double clamp = 0.0;
    apply_phi(clamp);
    max_clamp = std::max(max_clamp, clamp);
    if (observer) observer(std::span<const double>(Enew.data(), Enew.size()));
    residual = 0.0;
    for (int i = 0; i <= n; ++i) residual = std::max(residual, std::abs(Enew[i] - E[i]));
    const double damp = (iter <= 5) ? 0.5 : 1.0;
    for (int i = 0; i <= n; ++i) E[i] += damp * (Enew[i] - E[i]);
    if (residual < tol) break;
  }
  if (iter > max_iter)
    fail(errc::non_convergence, "fdt fixed point: no convergence after " +
                                    std::to_string(max_iter) +
                                    " iterations, last residual " + std::to_string(residual));

  solve_h_kernel(p, E, H);
  double final_clamp = 0.0;
  apply_phi(final_clamp);
  require(final_clamp <= std::max(100.0 * dt * dt, 10.0 * tol), errc::divergence,
          "fdt fixed point: truncation (.)+ active at the converged solution; "
          "the problem is at or beyond the feasibility boundary");
  FdtSolution sol;
  sol.D.resize(n + 1);
  sol.Dprime.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    sol.D[i] = E[i] + p.d_inf;
    sol.Dprime[i] = -p.b * expmu[i] * H[i];  // E'(s) = -b e^{-mu s} H_s(E)
  }
  check_range(sol.D, p.d_inf, dt);
  sol.delta = dt;
  sol.b = p.b;
  sol.d_inf = p.d_inf;
  sol.mu = mu;
  sol.method = FdtMethod::fixed_point;
  sol.iterations = std::min(iter, max_iter);
  sol.residual = residual;
  sol.max_clamp = max_clamp;
  return sol;
}

FdtPair fdt_pair(const FdtSolution& sol, double b) {
  require(b > 0.0, errc::invalid_argument, "fdt_pair: b must be positive");
  FdtPair out;
  out.C = sol.D;
  out.R.resize(sol.Dprime.size());
  for (std::size_t i = 0; i < sol.Dprime.size(); ++i) out.R[i] = -sol.Dprime[i] / b;
  out.delta = sol.delta;
  return out;
}

StationaryResiduals stationary_residuals(std::span<const double> C, std::span<const double> R,
                                         double delta, const Mixture& mix, double beta,
                                         double gamma, double b, double tol) {
  require(C.size() == R.size() && C.size() >= 8, errc::invalid_argument,
          "stationary_residuals: profiles must share a mesh");
  const int n = static_cast<int>(C.size()) - 1;
  const PhiFunction phi = PhiFunction::from_mixture(mix, beta, gamma);
  const double mu = phi(1.0);
  const double ig = i_gamma(mix, beta, gamma, b, tol);

  // truncate the infinite integrals where the response has decayed
  int ncut = -1;
  for (int i = 0; i <= n; ++i)
    if (std::abs(R[i]) < 1e-8) {
      ncut = i;
      break;
    }
  require(ncut >= 1, errc::horizon_too_short,
          "stationary_residuals: response does not decay below 1e-8 before the horizon");

  const auto c_at = [&](int i) { return C[std::min(std::abs(i), n)]; };  // even extension

  std::vector<double> f(ncut + 1);
  // mu recovered from the diagonal equation with psi_hat(x) = x phi'(x) + phi(x) - gamma
  for (int i = 0; i <= ncut; ++i) {
    const double x = C[i];
    f[i] = (x * phi.deriv(x) + phi(x) - gamma) * R[i];
  }
  const double mu_rec = b + b * trapezoid(f.data(), 0, ncut, delta) + ig;

  StationaryResiduals out;
  out.mu_recovered = mu_rec;
  out.res_mu = std::abs(mu_rec - mu);
  out.i_gamma = ig;
  out.tail_cut = ncut * delta;

  const int stride = std::max(1, ncut / 400);
  std::vector<double> g(ncut + 1);
  for (int it = 0; it <= ncut; it += stride) {
    // derivatives of the profiles by central differences
    auto ddt = [&](std::span<const double> Y, int i) {
      if (i == 0) return (-3.0 * Y[0] + 4.0 * Y[1] - Y[2]) / (2.0 * delta);
      if (i >= n) return (3.0 * Y[n] - 4.0 * Y[n - 1] + Y[n - 2]) / (2.0 * delta);
      return (Y[i + 1] - Y[i - 1]) / (2.0 * delta);
    };
    // R equation: R' = -mu R + b int_0^tau R(tau-v) R(v) phi'(C(v)) dv
    for (int v = 0; v <= it; ++v) f[v] = R[it - v] * R[v] * phi.deriv(C[v]);
    const double convR = trapezoid(f.data(), 0, it, delta);
    const double rR = ddt(R, it) + mu * R[it] - b * convR;
    out.res_R = std::max(out.res_R, std::abs(rR));
    // C equation: C' = -mu C + b int_0^inf C(tau-v) R(v) phi'(C(v)) dv
    //                    + b int_0^inf [phi(C(tau+w)) - gamma] R(w) dw + I_gamma
    for (int v = 0; v <= ncut; ++v) g[v] = c_at(it - v) * R[v] * phi.deriv(C[v]);
    const double conv1 = trapezoid(g.data(), 0, ncut, delta);
    for (int w = 0; w <= ncut; ++w) g[w] = (phi(c_at(it + w)) - gamma) * R[w];
    const double conv2 = trapezoid(g.data(), 0, ncut, delta);
    const double rC = ddt(C, it) + mu * C[it] - b * conv1 - b * conv2 - ig;
    out.res_C = std::max(out.res_C, std::abs(rC));
  }
  return out;
}

RateFit decay_rate_fit(std::span<const double> profile, double delta, double s0, double s1) {
  require(s1 > s0 && s0 >= 0.0, errc::invalid_window, "decay_rate_fit: need 0 <= s0 < s1");
  const int n = static_cast<int>(profile.size()) - 1;
  const int i0 = static_cast<int>(std::ceil(s0 / delta));
  const int i1 = static_cast<int>(std::floor(s1 / delta));
  require(i0 >= 0 && i1 <= n && i1 - i0 >= 2, errc::invalid_window,
          "decay_rate_fit: window outside the profile mesh");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const int m = i1 - i0 + 1;
  for (int i = i0; i <= i1; ++i) {
    require(profile[i] > 0.0, errc::invalid_window,
            "decay_rate_fit: profile must be positive on the window");
    const double x = i * delta;
    const double y = std::log(profile[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / m;
  const double cxy = sxy - sx * sy / m;
  const double vy = syy - sy * sy / m;
  RateFit out;
  out.rate = -cxy / vx;
  out.r2 = (vy > 0.0) ? (cxy * cxy) / (vx * vy) : 1.0;
  return out;
}

}  // namespace pspin

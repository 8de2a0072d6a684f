#include "pspin/twotime.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace pspin {

namespace {

constexpr int kMaxRows = 20000;  // ~5 GB for the stored triangles

int mesh_rows(double delta, double horizon) {
  require(delta > 0.0, errc::invalid_argument, "twotime: delta must be positive");
  const int n = static_cast<int>(std::lround(horizon / delta));
  require(std::abs(n * delta - horizon) < 1e-9 * (1.0 + horizon), errc::invalid_argument,
          "twotime: horizon must be an integer multiple of delta");
  require(n >= 2, errc::invalid_argument, "twotime: horizon too short for the mesh");
  require(n <= kMaxRows, errc::resource_limit,
          "twotime: mesh exceeds the resource cap of 20000 rows");
  return n;
}

/// Column-major triangle, contiguous in the row index per column; used for
/// the R(u,t) / C(u,t) factors of the memory integrals.
struct ColMajor {
  int n = 0;
  std::vector<double> v;
  explicit ColMajor(int n_) : n(n_), v(static_cast<std::size_t>(n_ + 1) * (n_ + 2) / 2) {}
  std::size_t off(int j) const noexcept {
    return static_cast<std::size_t>(j) * (n + 1) - static_cast<std::size_t>(j) * (j - 1) / 2;
  }
  double* col(int j) noexcept { return v.data() + off(j); }        // entry (i,j) at col(j)[i-j]
  const double* col(int j) const noexcept { return v.data() + off(j); }
};

struct Marcher {
  const Mixture& mix;
  double beta, b2, dt;
  int n;
  ConstraintMode mode;
  SoftPotential pot{0.0, 1};
  double k0 = 1.0;

  TriangularField R, C;
  std::vector<double> K, mu, S;  // S(s) = 2 beta^2 int_0^s psi(C(s,u)) R(s,u) du
  ColMajor Rt, Ct;

  std::vector<double> Fr, Fc, Frp, Fcp, Rp, Cp, rnu, nup, scratch;

  Marcher(const Mixture& m, double beta_, double dt_, int n_, ConstraintMode mode_)
      : mix(m),
        beta(beta_),
        b2(beta_ * beta_),
        dt(dt_),
        n(n_),
        mode(mode_),
        R(n_, dt_),
        C(n_, dt_),
        K(n_ + 1, 1.0),
        mu(n_ + 1, 0.0),
        S(n_ + 1, 0.0),
        Rt(n_),
        Ct(n_),
        Fr(n_ + 1),
        Fc(n_ + 1),
        Frp(n_ + 1),
        Fcp(n_ + 1),
        Rp(n_ + 1),
        Cp(n_ + 1),
        rnu(n_ + 1),
        nup(n_ + 1),
        scratch(n_ + 1) {}

  double row_integral_psi(const double* Crow, const double* Rrow, int i) {
    for (int u = 0; u <= i; ++u) scratch[u] = mix.psi(Crow[u]) * Rrow[u];
    return trapezoid(scratch.data(), 0, i, dt);
  }

  // d/ds of R and C at row a evaluated on (Rrow, Crow) with damping mu_a.
  // Interior memory points come from finalized rows; the u = a endpoint uses
  // the row being evaluated, so the same code serves the corrector (predicted
  // row) and the cached-derivative refresh (final row).
  void derivative_pass(int a, const double* Rrow, const double* Crow, double mu_a,
                       double* outFr, double* outFc, int jmax) {
    for (int u = 0; u <= a; ++u) {
      rnu[u] = Rrow[u] * mix.nu2(Crow[u]);
      nup[u] = mix.nu1(Crow[u]);
    }
    for (int j = 0; j <= jmax; ++j) {
      const double* rcol = Rt.col(j);
      const double* ccol = Ct.col(j);
      const double* rrowj = R.row(j);
      const double* crowj = C.row(j);

      // T_R = int_t^s R(u,t) R(s,u) nu''(C(s,u)) du
      double tr = 0.0;
      if (a > j) {
        tr = 0.5 * (rnu[j] * rrowj[j] + Rrow[j] * rnu[a]);
        for (int u = j + 1; u < a; ++u) tr += rcol[u - j] * rnu[u];
        tr *= dt;
      }

      // T_C1 = int_0^s C(u,t) R(s,u) nu''(C(s,u)) du, C read symmetrically
      double tc1 = 0.0;
      if (a > 0) {
        // u in [0, j] from row j of C, u in [j, a] from column j
        double s1 = 0.0;
        if (j > 0) {
          s1 = 0.5 * (crowj[0] * rnu[0] + crowj[j] * rnu[j]);
          for (int u = 1; u < j; ++u) s1 += crowj[u] * rnu[u];
        }
        double s2 = 0.0;
        if (a > j) {
          const double diag = (j < a) ? Crow[j] : crowj[j];
          s2 = 0.5 * (ccol[0] * rnu[j] + diag * rnu[a]);
          for (int u = j + 1; u < a; ++u) s2 += ccol[u - j] * rnu[u];
        }
        tc1 = dt * (s1 + s2);
      }

      // T_C2 = int_0^t nu'(C(s,u)) R(t,u) du
      double tc2 = 0.0;
      if (j > 0) {
        tc2 = 0.5 * (nup[0] * rrowj[0] + nup[j] * rrowj[j]);
        for (int u = 1; u < j; ++u) tc2 += nup[u] * rrowj[u];
        tc2 *= dt;
      }

      outFr[j] = -mu_a * Rrow[j] + b2 * tr;
      outFc[j] = -mu_a * Crow[j] + b2 * (tc1 + tc2);
    }
  }

  double soft_g(double k) const { return -2.0 * pot.f(k, 1) * k + 1.0; }
  double soft_gprime(double k) const { return -2.0 * pot.f(k, 2) * k - 2.0 * pot.f(k, 1); }

  // Implicit trapezoid step for K' = g(K) + S(s); A-stable, so the ~4L
  // relaxation rate of the soft constraint does not limit dt.
  double solve_k_step(double k_prev, double s_prev, double s_new) const {
    const double rhs = k_prev + 0.5 * dt * (soft_g(k_prev) + s_prev + s_new);
    double k = k_prev;
    for (int it = 0; it < 100; ++it) {
      const double w = k - 0.5 * dt * soft_g(k) - rhs;
      const double wp = 1.0 - 0.5 * dt * soft_gprime(k);
      const double step = w / wp;
      k -= step;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(k))) break;
    }
    require(std::isfinite(k) && k > 0.0, errc::instability,
            "twotime: K update diverged; reduce delta");
    return k;
  }

  void finalize_row(int i) {
    const double* rrow = R.row(i);
    const double* crow = C.row(i);
    for (int j = 0; j <= i; ++j) {
      Rt.col(j)[i - j] = rrow[j];
      Ct.col(j)[i - j] = crow[j];
    }
    derivative_pass(i, rrow, crow, mu[i], Fr.data(), Fc.data(), i);
  }

  void check_row(int i) {
    const double tol = 10.0 * dt;
    const double* rrow = R.row(i);
    const double* crow = C.row(i);
    for (int j = 0; j <= i; ++j) {
      require(std::isfinite(rrow[j]) && std::isfinite(crow[j]), errc::instability,
              "twotime: non-finite field value; reduce delta");
      require(rrow[j] > -tol && crow[j] > -tol, errc::instability,
              "twotime: positivity lost beyond the 10*delta allowance; reduce delta");
      if (mode == ConstraintMode::spherical)
        require(crow[j] < 1.0 + tol, errc::instability,
                "twotime: C exceeded 1 beyond the 10*delta allowance; reduce delta");
    }
    require(K[i] > 0.0, errc::instability, "twotime: K must stay positive; reduce delta");
  }

  void init_row0() {
    R.at(0, 0) = 1.0;
    K[0] = (mode == ConstraintMode::spherical) ? 1.0 : k0;
    C.at(0, 0) = K[0];
    S[0] = 0.0;
    mu[0] = (mode == ConstraintMode::spherical) ? 0.5 : pot.f(K[0], 1);
    finalize_row(0);
  }

  void step(int i) {
    const double* prevR = R.row(i - 1);
    const double* prevC = C.row(i - 1);
    for (int j = 0; j < i; ++j) {
      Rp[j] = prevR[j] + dt * Fr[j];
      Cp[j] = prevC[j] + dt * Fc[j];
    }
    Rp[i] = 1.0;

    double mu_star, k_star = 1.0, s_star = 0.0;
    if (mode == ConstraintMode::spherical) {
      Cp[i] = 1.0;
      mu_star = 0.5 + b2 * row_integral_psi(Cp.data(), Rp.data(), i);
    } else {
      Cp[i] = K[i - 1];
      for (int pass = 0; pass < 2; ++pass) {
        s_star = 2.0 * b2 * row_integral_psi(Cp.data(), Rp.data(), i);
        k_star = solve_k_step(K[i - 1], S[i - 1], s_star);
        Cp[i] = k_star;
      }
      mu_star = pot.f(k_star, 1);
    }

    derivative_pass(i, Rp.data(), Cp.data(), mu_star, Frp.data(), Fcp.data(), i - 1);

    double* curR = R.row(i);
    double* curC = C.row(i);
    for (int j = 0; j < i; ++j) {
      curR[j] = prevR[j] + 0.5 * dt * (Fr[j] + Frp[j]);
      curC[j] = prevC[j] + 0.5 * dt * (Fc[j] + Fcp[j]);
    }
    curR[i] = 1.0;

    if (mode == ConstraintMode::spherical) {
      curC[i] = 1.0;
      K[i] = 1.0;
      S[i] = 2.0 * b2 * row_integral_psi(curC, curR, i);
      mu[i] = 0.5 + 0.5 * S[i];
    } else {
      curC[i] = k_star;
      for (int pass = 0; pass < 2; ++pass) {
        S[i] = 2.0 * b2 * row_integral_psi(curC, curR, i);
        K[i] = solve_k_step(K[i - 1], S[i - 1], S[i]);
        curC[i] = K[i];
      }
      mu[i] = pot.f(K[i], 1);
    }

    check_row(i);
    finalize_row(i);
  }

  TwoTimeGrid take(double horizon) {
    TwoTimeGrid g;
    g.mode = mode;
    g.terms = mix.terms();
    g.beta = beta;
    g.soft_L = pot.L;
    g.soft_k = pot.k;
    g.k0 = k0;
    g.delta = dt;
    g.horizon = horizon;
    g.n = n;
    g.R = std::move(R);
    g.C = std::move(C);
    g.K = std::move(K);
    g.mu = std::move(mu);
    return g;
  }
};

}  // namespace

int TwoTimeGrid::index_of(double time) const {
  const int i = static_cast<int>(std::lround(time / delta));
  require(i >= 0 && i <= n && std::abs(i * delta - time) < 1e-9 * (1.0 + horizon),
          errc::invalid_argument, "twotime: time is not a mesh point of the grid");
  return i;
}

TwoTimeGrid solve_spherical(const Mixture& mix, double beta, double delta, double horizon) {
  const int n = mesh_rows(delta, horizon);
  Marcher m(mix, beta, delta, n, ConstraintMode::spherical);
  m.init_row0();
  for (int i = 1; i <= n; ++i) m.step(i);
  return m.take(horizon);
}

TwoTimeGrid solve_soft(const Mixture& mix, double beta, const SoftPotential& pot, double K0,
                       double delta, double horizon) {
  pot.validate_against(mix);
  require(K0 > 0.0, errc::invalid_argument, "twotime: K0 must be positive");
  require(delta * pot.L <= 10.0, errc::invalid_argument,
          "twotime: stiffness guard delta*L <= 10 violated");
  const int n = mesh_rows(delta, horizon);
  Marcher m(mix, beta, delta, n, ConstraintMode::soft);
  m.pot = pot;
  m.k0 = K0;
  m.init_row0();
  for (int i = 1; i <= n; ++i) m.step(i);
  return m.take(horizon);
}

TwoTimeGrid apply_psi(const TwoTimeGrid& grid, const Mixture& mix, double beta) {
  require(grid.mode == ConstraintMode::spherical, errc::invalid_argument,
          "apply_psi: input grid must be in spherical mode");
  const int n = grid.n;
  const double dt = grid.delta;
  const double b2 = beta * beta;
  const TriangularField& Rin = grid.R;
  const TriangularField& Cin = grid.C;

  // mu_{R,C}(s) = 1/2 + beta^2 int_0^s psi(C(s,u)) R(s,u) du from the input pair
  std::vector<double> mu_in(n + 1), scratch(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double* crow = Cin.row(i);
    const double* rrow = Rin.row(i);
    for (int u = 0; u <= i; ++u) scratch[u] = mix.psi(crow[u]) * rrow[u];
    mu_in[i] = 0.5 + b2 * trapezoid(scratch.data(), 0, i, dt);
  }

  ColMajor Ct_in(n);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) Ct_in.col(j)[i - j] = Cin.at(i, j);

  // --- Rt: self-coupled renormalized response march with frozen mu_in ---
  TriangularField Rt_field(n, dt);
  ColMajor Rt_cols(n);
  std::vector<double> F(n + 1), Fp(n + 1), Rp(n + 1), rnu(n + 1);

  auto r_derivative = [&](int a, const double* Rrow, double* out, int jmax) {
    const double* crow = Cin.row(a);
    for (int u = 0; u <= a; ++u) rnu[u] = Rrow[u] * mix.nu2(crow[u]);
    for (int j = 0; j <= jmax; ++j) {
      double tr = 0.0;
      if (a > j) {
        const double* rcol = Rt_cols.col(j);
        tr = 0.5 * (rnu[j] * Rt_field.at(j, j) + Rrow[j] * rnu[a]);
        for (int u = j + 1; u < a; ++u) tr += rcol[u - j] * rnu[u];
        tr *= dt;
      }
      out[j] = -mu_in[a] * Rrow[j] + b2 * tr;
    }
  };

  Rt_field.at(0, 0) = 1.0;
  Rt_cols.col(0)[0] = 1.0;
  r_derivative(0, Rt_field.row(0), F.data(), 0);
  for (int i = 1; i <= n; ++i) {
    const double* prev = Rt_field.row(i - 1);
    for (int j = 0; j < i; ++j) Rp[j] = prev[j] + dt * F[j];
    Rp[i] = 1.0;
    r_derivative(i, Rp.data(), Fp.data(), i - 1);
    double* cur = Rt_field.row(i);
    for (int j = 0; j < i; ++j) cur[j] = prev[j] + 0.5 * dt * (F[j] + Fp[j]);
    cur[i] = 1.0;
    for (int j = 0; j <= i; ++j) Rt_cols.col(j)[i - j] = cur[j];
    r_derivative(i, cur, F.data(), i);
  }

  // --- Ct: linear equation, sources assembled from the input pair only ---
  // d_s Ct(s,t) = -mu_in(s) Ct(s,t) + Src(s,t), advanced by the trapezoid
  // rule, implicit in the damping term.
  TriangularField Ct_field(n, dt);
  std::vector<double> src_prev(n + 1), src_cur(n + 1), nup(n + 1);
  auto source_row = [&](int a, double* out) {
    const double* crow = Cin.row(a);
    const double* rrow = Rin.row(a);
    for (int u = 0; u <= a; ++u) {
      rnu[u] = rrow[u] * mix.nu2(crow[u]);
      nup[u] = mix.nu1(crow[u]);
    }
    for (int j = 0; j <= a; ++j) {
      const double* crowj = Cin.row(j);
      double s1 = 0.0;
      if (j > 0) {
        s1 = 0.5 * (crowj[0] * rnu[0] + crowj[j] * rnu[j]);
        for (int u = 1; u < j; ++u) s1 += crowj[u] * rnu[u];
      }
      double s2 = 0.0;
      if (a > j) {
        const double* ccol = Ct_in.col(j);
        s2 = 0.5 * (ccol[0] * rnu[j] + ccol[a - j] * rnu[a]);
        for (int u = j + 1; u < a; ++u) s2 += ccol[u - j] * rnu[u];
      }
      double s3 = 0.0;
      if (j > 0) {
        const double* rrowj = Rin.row(j);
        s3 = 0.5 * (nup[0] * rrowj[0] + nup[j] * rrowj[j]);
        for (int u = 1; u < j; ++u) s3 += nup[u] * rrowj[u];
        s3 *= dt;
      }
      out[j] = b2 * (dt * (s1 + s2) + s3);
    }
  };

  Ct_field.at(0, 0) = 1.0;
  source_row(0, src_prev.data());
  for (int i = 1; i <= n; ++i) {
    source_row(i, src_cur.data());
    const double* prev = Ct_field.row(i - 1);
    double* cur = Ct_field.row(i);
    const double denom = 1.0 + 0.5 * dt * mu_in[i];
    for (int j = 0; j < i; ++j) {
      const double rhs =
          prev[j] * (1.0 - 0.5 * dt * mu_in[i - 1]) + 0.5 * dt * (src_prev[j] + src_cur[j]);
      cur[j] = rhs / denom;
    }
    cur[i] = 1.0;
    std::swap(src_prev, src_cur);
  }

  TwoTimeGrid out;
  out.mode = ConstraintMode::spherical;
  out.terms = mix.terms();
  out.beta = beta;
  out.delta = dt;
  out.horizon = grid.horizon;
  out.n = n;
  out.R = std::move(Rt_field);
  out.C = std::move(Ct_field);
  out.K.assign(n + 1, 1.0);
  out.mu = std::move(mu_in);
  return out;
}

SectionProfile fdt_section(const TwoTimeGrid& grid, double t, double tau_max) {
  require(tau_max >= 0.0, errc::invalid_argument, "fdt_section: tau_max must be >= 0");
  require(t + tau_max <= grid.horizon + 1e-12, errc::invalid_argument,
          "fdt_section: t + tau_max exceeds the horizon");
  const int jt = grid.index_of(t);
  const int m = static_cast<int>(std::floor(tau_max / grid.delta + 1e-9));
  SectionProfile out;
  out.t = jt * grid.delta;
  out.tau.resize(m + 1);
  out.C.resize(m + 1);
  out.R.resize(m + 1);
  for (int k = 0; k <= m; ++k) {
    out.tau[k] = k * grid.delta;
    out.C[k] = grid.C.at(jt + k, jt);
    out.R[k] = grid.R.at(jt + k, jt);
  }
  return out;
}

FdtDiagnostics fdt_violation(const TwoTimeGrid& grid, const Mixture& mix, double beta,
                             double window, double t_min) {
  const int n = grid.n;
  const double dt = grid.delta;
  const double b2 = beta * beta;
  FdtDiagnostics out;
  out.window = window;
  out.t_min = t_min;
  out.rho = 0.5 + 2.0 * b2 * mix.nu1(1.0);
  out.G = TriangularField(n, dt);
  out.I = TriangularField(n, dt);

  // G = R - 2 d_t C, one-sided second order at the t = 0 and t = s edges
  for (int i = 0; i <= n; ++i) {
    const double* crow = grid.C.row(i);
    double* grow = out.G.row(i);
    for (int j = 0; j <= i; ++j) {
      double dtc;
      if (i < 2) {
        dtc = (i == 0) ? 0.0 : (crow[1] - crow[0]) / dt;
      } else if (j == 0) {
        dtc = (-3.0 * crow[0] + 4.0 * crow[1] - crow[2]) / (2.0 * dt);
      } else if (j == i) {
        dtc = (3.0 * crow[i] - 4.0 * crow[i - 1] + crow[i - 2]) / (2.0 * dt);
      } else {
        dtc = (grid.C.sym(i, j + 1) - crow[j - 1]) / (2.0 * dt);
      }
      grow[j] = grid.R.at(i, j) - 2.0 * dtc;
    }
  }

  std::vector<double> f(n + 1), nu2row(n + 1), nu1row(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double* crow = grid.C.row(i);
    const double* girow = out.G.row(i);
    for (int u = 0; u <= i; ++u) {
      nu2row[u] = mix.nu2(crow[u]);
      nu1row[u] = mix.nu1(crow[u]);
    }
    double* irow = out.I.row(i);
    for (int j = 0; j <= i; ++j) {
      const double* crowj = grid.C.row(j);
      const double* growj = out.G.row(j);
      for (int u = 0; u <= j; ++u)
        f[u] = crowj[u] * girow[u] * nu2row[u] + nu1row[u] * growj[u];
      irow[j] = b2 * trapezoid(f.data(), 0, j, dt) - 2.0 * b2 * nu1row[0] * crowj[0];
    }
  }

  const double base = 0.5 + 2.0 * b2 * mix.nu1(1.0);
  for (int i = 0; i <= n; ++i)
    out.diag_identity_sup =
        std::max(out.diag_identity_sup, std::abs(out.I.at(i, i) - (grid.mu[i] - base)));

  const int kw = std::min(n, static_cast<int>(std::lround(window / dt)));
  double acc = 0.0;
  for (int k = 0; k <= kw; ++k) acc += out.I.at(n, n - k);
  out.i_hat = acc / (kw + 1);

  const int jmin = std::min(n, static_cast<int>(std::ceil(t_min / dt)));
  for (int j = jmin; j <= n; ++j) {
    const int imax = std::min(n, j + kw);
    for (int i = j; i <= imax; ++i)
      out.g_sup_window = std::max(out.g_sup_window, std::abs(out.G.at(i, j)));
  }
  return out;
}

ResponseBoundReport response_bound_check(const TwoTimeGrid& grid) {
  const int n = grid.n;
  const double dt = grid.delta;
  double supk = 0.0;
  for (double k : grid.K) supk = std::max(supk, k);
  ResponseBoundReport rep;
  std::vector<double> P(n + 1);
  const int row_stride = std::max(1, n / 64);
  for (int i = row_stride; i <= n; i += row_stride) {
    const double* rrow = grid.R.row(i);
    P[0] = 0.0;
    for (int j = 1; j <= i; ++j) P[j] = P[j - 1] + 0.5 * dt * (rrow[j - 1] + rrow[j]);
    const int col_stride = std::max(1, i / 128);
    auto consider = [&](int j1, int j2) {
      const double w = P[j2] - P[j1];
      const double ratio = w * w / ((j2 - j1) * dt * supk);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.s = i * dt;
        rep.t1 = j1 * dt;
        rep.t2 = j2 * dt;
      }
    };
    for (int j2 = 1; j2 <= i; ++j2) consider(0, j2);  // windows anchored at t1 = 0, full scan
    for (int j1 = 0; j1 < i; j1 += col_stride)
      for (int j2 = j1 + col_stride; j2 <= i; j2 += col_stride) consider(j1, j2);
  }
  return rep;
}

double grid_interp_c(const TwoTimeGrid& g, double s, double t) {
  const double dt = g.delta;
  const auto clampi = [&](int i) { return std::clamp(i, 0, g.n); };
  const int i0 = clampi(static_cast<int>(std::floor(s / dt)));
  const int j0 = clampi(static_cast<int>(std::floor(t / dt)));
  const int i1 = clampi(i0 + 1), j1 = clampi(j0 + 1);
  const double fs = std::clamp(s / dt - i0, 0.0, 1.0);
  const double ft = std::clamp(t / dt - j0, 0.0, 1.0);
  const double v00 = g.C.sym(i0, j0), v10 = g.C.sym(i1, j0);
  const double v01 = g.C.sym(i0, j1), v11 = g.C.sym(i1, j1);
  return (1 - fs) * ((1 - ft) * v00 + ft * v01) + fs * ((1 - ft) * v10 + ft * v11);
}

static double chi_on_row(const TwoTimeGrid& g, int i, double t) {
  const double dt = g.delta;
  const double* row = g.R.row(i);
  int j1 = static_cast<int>(std::floor(t / dt + 1e-12));
  j1 = std::min(j1, i);
  double p = 0.0;
  for (int j = 1; j <= j1; ++j) p += 0.5 * dt * (row[j - 1] + row[j]);
  const double w = t - j1 * dt;
  if (w > 1e-14 && j1 < i) {
    const double rt = row[j1] + (row[j1 + 1] - row[j1]) * (w / dt);
    p += 0.5 * w * (row[j1] + rt);
  }
  return p;
}

double grid_interp_chi(const TwoTimeGrid& g, double s, double t) {
  const double dt = g.delta;
  int i0 = static_cast<int>(std::floor(s / dt));
  i0 = std::clamp(i0, 0, g.n);
  const int i1 = std::min(i0 + 1, g.n);
  const double fs = std::clamp(s / dt - i0, 0.0, 1.0);
  const double p0 = chi_on_row(g, i0, std::min(t, i0 * dt));
  const double p1 = chi_on_row(g, i1, std::min(t, i1 * dt));
  return (1 - fs) * p0 + fs * p1;
}


namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_checkpoint(const TwoTimeGrid& grid, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), errc::io_error, "checkpoint: cannot open '" + path + "' for writing");
  const char magic[8] = {'T', 'T', 'G', 'R', 'I', 'D', '1', '\0'};
  os.write(magic, 8);
  put<std::uint32_t>(os, 1u);  // version
  put<std::uint32_t>(os, grid.mode == ConstraintMode::soft ? 1u : 0u);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.terms.size()));
  for (const auto& t : grid.terms) {
    put<std::int32_t>(os, t.p);
    put<double>(os, t.a);
  }
  put<double>(os, grid.beta);
  put<double>(os, grid.soft_L);
  put<std::int32_t>(os, grid.soft_k);
  put<double>(os, grid.k0);
  put<double>(os, grid.delta);
  put<double>(os, grid.horizon);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(grid.n));
  const auto write_vec = [&](const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_vec(grid.R.data());
  write_vec(grid.C.data());
  write_vec(grid.K);
  write_vec(grid.mu);
  require(os.good(), errc::io_error, "checkpoint: write failed for '" + path + "'");
}

TwoTimeGrid load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), errc::io_error, "checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  require(is.good() && std::memcmp(magic, "TTGRID1\0", 8) == 0, errc::io_error,
          "checkpoint: bad magic, not a TTGRID1 file");
  std::uint32_t version = 0, mode = 0, nterms = 0;
  get(is, version);
  require(version == 1u, errc::io_error, "checkpoint: unsupported version");
  get(is, mode);
  get(is, nterms);
  require(nterms >= 1 && nterms <= 64, errc::io_error, "checkpoint: corrupt term count");
  TwoTimeGrid g;
  g.mode = mode == 1u ? ConstraintMode::soft : ConstraintMode::spherical;
  g.terms.resize(nterms);
  for (auto& t : g.terms) {
    std::int32_t p = 0;
    get(is, p);
    t.p = p;
    get(is, t.a);
  }
  get(is, g.beta);
  get(is, g.soft_L);
  std::int32_t sk = 1;
  get(is, sk);
  g.soft_k = sk;
  get(is, g.k0);
  get(is, g.delta);
  get(is, g.horizon);
  std::uint64_t n = 0;
  get(is, n);
  require(is.good() && n >= 1 && n <= static_cast<std::uint64_t>(kMaxRows), errc::io_error,
          "checkpoint: corrupt mesh size");
  g.n = static_cast<int>(n);
  g.R = TriangularField(g.n, g.delta);
  g.C = TriangularField(g.n, g.delta);
  g.K.resize(g.n + 1);
  g.mu.resize(g.n + 1);
  const auto read_vec = [&](std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  read_vec(g.R.data());
  read_vec(g.C.data());
  read_vec(g.K);
  read_vec(g.mu);
  require(is.good(), errc::io_error, "checkpoint: truncated file '" + path + "'");
  return g;
}

}  // namespace pspin

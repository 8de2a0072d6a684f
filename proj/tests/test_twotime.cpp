#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pspin/fdt.hpp"
#include "pspin/twotime.hpp"

using namespace pspin;

namespace {

const Mixture kTwoSpin = Mixture::pure(2, 1.0);
const Mixture kThreeSpin = Mixture::pure(3, std::sqrt(6.0));
const Mixture kMixed({{2, 0.5}, {3, 1.0}, {4, 0.3}});

double grid_distance(const TwoTimeGrid& a, const TwoTimeGrid& b, int stride_a = 1) {
  // sup over common points; stride_a maps a's indices onto b's (b finer)
  double d = 0.0;
  for (int i = 0; i <= a.n; ++i)
    for (int j = 0; j <= i; ++j) {
      d = std::max(d, std::abs(a.C.at(i, j) - b.C.at(stride_a * i, stride_a * j)));
      d = std::max(d, std::abs(a.R.at(i, j) - b.R.at(stride_a * i, stride_a * j)));
    }
  return d;
}

}  // namespace

TEST_CASE("spherical beta = 0 reproduces the OU kernel") {
  const auto g = solve_spherical(kTwoSpin, 0.0, 0.02, 3.0);
  double worst = 0.0;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double ex = std::exp(-0.5 * (i - j) * g.delta);
      worst = std::max(worst, std::abs(g.C.at(i, j) - ex));
      worst = std::max(worst, std::abs(g.R.at(i, j) - ex));
    }
  CHECK(worst < 5e-4);
  for (double m : g.mu) CHECK(m == 0.5);  // the memory integral vanishes exactly
  for (double k : g.K) CHECK(k == 1.0);
}

TEST_CASE("diagonals are pinned exactly") {
  const auto g = solve_spherical(kThreeSpin, 0.2, 0.02, 2.0);
  for (int i = 0; i <= g.n; ++i) {
    CHECK(g.R.at(i, i) == 1.0);
    CHECK(g.C.at(i, i) == 1.0);
  }
  const auto gs = solve_soft(kThreeSpin, 0.2, SoftPotential(50.0, 1), 1.0, 0.02, 2.0);
  for (int i = 0; i <= gs.n; ++i) {
    CHECK(gs.R.at(i, i) == 1.0);
    CHECK(gs.C.at(i, i) == gs.K[i]);
  }
}

TEST_CASE("positivity and range invariants of the solved fields") {
  for (double beta : {0.05, 0.3}) {
    // the desk-scale envelope: beta up to 0.3 on horizons up to 20
    const auto g = beta < 0.2 ? solve_spherical(kThreeSpin, beta, 0.01, 6.0)
                              : solve_spherical(kThreeSpin, beta, 0.02, 20.0);
    double mn = 1e9, mx = -1e9, mnk = 1e9;
    for (int i = 0; i <= g.n; ++i)
      for (int j = 0; j <= i; ++j) {
        mn = std::min(mn, std::min(g.C.at(i, j), g.R.at(i, j)));
        mx = std::max(mx, g.C.at(i, j));
      }
    for (double k : g.K) mnk = std::min(mnk, k);
    CHECK(mn > 0.0);
    CHECK(mx <= 1.0 + 10 * g.delta);
    CHECK(mnk > 0.0);
    CHECK(*std::min_element(g.mu.begin(), g.mu.end()) >= 0.5 - 1e-12);  // mu >= 1/2
  }
}

TEST_CASE("symmetric read of the stored triangle") {
  const auto g = solve_spherical(kThreeSpin, 0.1, 0.05, 2.0);
  for (int i = 0; i <= g.n; i += 3)
    for (int j = 0; j <= g.n; j += 5) CHECK(g.c_sym(i, j) == g.c_sym(j, i));
}

TEST_CASE("mesh refinement: order ~2 (factor >= 3.5 per halving)") {
  const auto g1 = solve_spherical(kThreeSpin, 0.05, 0.04, 3.0);
  const auto g2 = solve_spherical(kThreeSpin, 0.05, 0.02, 3.0);
  const auto g3 = solve_spherical(kThreeSpin, 0.05, 0.01, 3.0);
  const double d12 = grid_distance(g1, g2, 2);
  const double d23 = grid_distance(g2, g3, 2);
  CHECK(d12 / d23 >= 3.5);
}

TEST_CASE("exponential envelopes of R and the C tail on the solved grid") {
  const auto g = solve_spherical(kThreeSpin, 0.05, 0.01, 12.0);
  const double delta_beta = 0.5 - 2 * 0.05 * std::sqrt(kThreeSpin.nu2(1.0));
  double viol = -1e9;
  for (int i = 0; i <= g.n; ++i)
    for (int j = 0; j <= i; ++j)
      viol = std::max(viol, g.R.at(i, j) - std::exp(-delta_beta * (i - j) * g.delta));
  CHECK(viol <= 10 * g.delta);
  // C tail is exponential: log-linear fit on tau in [2, 8] at fixed t = 4
  const auto sec = fdt_section(g, 4.0, 8.0);
  const auto fit = decay_rate_fit(sec.C, g.delta, 2.0, 8.0);
  CHECK(fit.r2 > 0.99);
  CHECK(fit.rate > 0.2);
}

TEST_CASE("soft constraint: K stays in [1, 1 + B/L]") {
  double prev_b = -1.0;
  for (double L : {250.0, 500.0, 1000.0}) {
    const auto g = solve_soft(kThreeSpin, 0.05, SoftPotential(L, 1), 1.0, 0.005, 3.0);
    double kmin = 1e9, kmax = -1e9;
    for (double k : g.K) {
      kmin = std::min(kmin, k);
      kmax = std::max(kmax, k);
    }
    CHECK(kmin >= 1.0 - 10 * g.delta);
    const double B = L * (kmax - 1.0);
    CHECK(kmax <= 1.0 + std::max(B, 0.1) / L + 10 * g.delta);
    if (prev_b > 0.0) {
      CHECK(B < 2.0 * prev_b + 0.05);
      CHECK(B > 0.5 * prev_b - 0.05);
    }
    prev_b = B;
  }
}

TEST_CASE("soft mode mesh refinement keeps order ~2 with the implicit K step") {
  const SoftPotential pot(100.0, 1);
  const auto g1 = solve_soft(kThreeSpin, 0.1, pot, 1.0, 0.04, 3.0);
  const auto g2 = solve_soft(kThreeSpin, 0.1, pot, 1.0, 0.02, 3.0);
  const auto g3 = solve_soft(kThreeSpin, 0.1, pot, 1.0, 0.01, 3.0);
  const double d12 = grid_distance(g1, g2, 2);
  const double d23 = grid_distance(g2, g3, 2);
  CHECK(d12 / d23 >= 3.5);
}

TEST_CASE("soft -> spherical convergence as L grows") {
  const auto sph = solve_spherical(kThreeSpin, 0.05, 0.01, 3.0);
  double prev = 1e9;
  for (double L : {10.0, 100.0, 1000.0}) {
    const auto g = solve_soft(kThreeSpin, 0.05, SoftPotential(L, 1), 1.0, 0.01, 3.0);
    const double d = grid_distance(g, sph);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("soft beta = 0 with large L approaches the OU limit") {
  const auto g = solve_soft(kTwoSpin, 0.0, SoftPotential(1000.0, 1), 1.0, 0.005, 3.0);
  double worst = 0.0;
  for (int i = 0; i <= g.n; i += 2)
    for (int j = 0; j <= i; j += 3)
      worst = std::max(worst, std::abs(g.C.at(i, j) - std::exp(-0.5 * (i - j) * g.delta)));
  CHECK(worst < 0.01);
}

TEST_CASE("soft constraint argument validation") {
  CHECK_THROWS_AS(
      (void)solve_soft(kThreeSpin, 0.1, SoftPotential(50.0, 1), 0.0, 0.01, 1.0), error);
  CHECK_THROWS_AS(
      (void)solve_soft(kThreeSpin, 0.1, SoftPotential(2000.0, 1), 1.0, 0.01, 1.0), error);
  // k > m/4 violated: m = 5 needs k >= 2
  CHECK_THROWS_AS(
      (void)solve_soft(Mixture::pure(5, 1.0), 0.1, SoftPotential(10.0, 1), 1.0, 0.01, 1.0),
      error);
  CHECK_THROWS_AS((void)solve_spherical(kThreeSpin, 0.1, 0.01, 2000.0), error);  // cap
}

TEST_CASE("Psi: the solved pair is a fixed point") {
  const auto sol = solve_spherical(kThreeSpin, 0.05, 0.02, 6.0);
  const auto img = apply_psi(sol, kThreeSpin, 0.05);
  CHECK(grid_distance(sol, img) < 20 * sol.delta);
  for (int i = 0; i <= img.n; ++i) {
    CHECK(img.R.at(i, i) == 1.0);
    CHECK(img.C.at(i, i) == 1.0);
  }
}

TEST_CASE("Psi: contraction on perturbed admissible pairs") {
  const auto sol = solve_spherical(kThreeSpin, 0.05, 0.02, 6.0);
  auto perturb = [&](double amp) {
    TwoTimeGrid g = sol;
    for (int i = 0; i <= g.n; ++i)
      for (int j = 0; j < i; ++j) {
        const double tau = (i - j) * g.delta;
        const double bump = amp * (1.0 - std::exp(-tau)) * std::exp(-tau / 4.0);
        g.R.at(i, j) = sol.R.at(i, j) * (1.0 + bump);
        g.C.at(i, j) = sol.C.at(i, j) * (1.0 - bump);
      }
    return g;
  };
  const auto x = perturb(0.10), y = perturb(-0.06);
  const auto fx = apply_psi(x, kThreeSpin, 0.05), fy = apply_psi(y, kThreeSpin, 0.05);
  auto norm_dist = [](const TwoTimeGrid& a, const TwoTimeGrid& b) {
    double sR = 0.0, sC = 0.0;
    for (int i = 0; i <= a.n; ++i)
      for (int j = 0; j <= i; ++j) {
        sR = std::max(sR, std::abs(a.R.at(i, j) - b.R.at(i, j)));
        sC = std::max(sC, std::abs(a.C.at(i, j) - b.C.at(i, j)));
      }
    return sR + sC;
  };
  const double factor = norm_dist(fx, fy) / norm_dist(x, y);
  CHECK(factor <= 2.0 / 3.0 + 0.05);
}

TEST_CASE("Psi at beta = 0 forgets the input response") {
  const auto sol = solve_spherical(kTwoSpin, 0.0, 0.02, 3.0);
  TwoTimeGrid warped = sol;
  for (int i = 0; i <= warped.n; ++i)
    for (int j = 0; j < i; ++j) warped.R.at(i, j) = 0.25;  // arbitrary admissible-ish input
  const auto img = apply_psi(sol, kTwoSpin, 0.0);
  const auto img_w = apply_psi(warped, kTwoSpin, 0.0);
  double worst = 0.0, dev = 0.0;
  for (int i = 0; i <= img.n; ++i)
    for (int j = 0; j <= i; ++j) {
      dev = std::max(dev, std::abs(img.R.at(i, j) - img_w.R.at(i, j)));
      worst = std::max(worst, std::abs(img.R.at(i, j) - std::exp(-0.5 * (i - j) * img.delta)));
    }
  CHECK(dev == 0.0);  // the (eqRP) memory term vanishes at beta = 0
  CHECK(worst < 1e-4);
}

TEST_CASE("Psi keeps the admissible tail envelope at small beta") {
  const double beta = 0.03;
  const auto sol = solve_spherical(kThreeSpin, beta, 0.02, 8.0);
  const auto img = apply_psi(sol, kThreeSpin, beta);
  const double r = beta * std::sqrt(kThreeSpin.nu2(2.0));
  for (int i = 0; i <= img.n; i += 3)
    for (int j = 0; j <= i; j += 2) {
      const double tau = (i - j) * img.delta;
      CHECK(img.C.at(i, j) <= 2.0 * std::exp(-tau / 6.0) + 1e-12);
      const double envelope = std::pow(r * tau + 1.0, -1.5) * std::exp(-tau / 6.0);
      CHECK(img.R.at(i, j) <= 2.5 * envelope + 1e-12);
    }
}

TEST_CASE("fdt_section") {
  const auto g = solve_spherical(kTwoSpin, 0.0, 0.01, 4.0);
  const auto sec = fdt_section(g, 1.0, 2.0);
  CHECK(sec.tau[0] == 0.0);
  CHECK(sec.C[0] == 1.0);
  CHECK(sec.R[0] == 1.0);
  for (std::size_t k = 0; k < sec.tau.size(); ++k)
    CHECK(sec.C[k] == doctest::Approx(std::exp(-0.5 * sec.tau[k])).epsilon(1e-4));
  CHECK_THROWS_AS((void)fdt_section(g, 3.0, 2.0), error);
  CHECK_THROWS_AS((void)fdt_section(g, 1.005, 1.0), error);  // not a mesh point
}

TEST_CASE("fdt_section converges to the one-time FDT solution at large t") {
  const auto g = solve_spherical(kThreeSpin, 0.05, 0.01, 12.0);
  const auto p = FdtProblem::from_mixture(kThreeSpin, 0.05, 1e-3, 10.0);
  const auto sol = solve_direct(p);
  const auto sec = fdt_section(g, 10.0, 2.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < sec.tau.size(); ++k) {
    const int i_f = static_cast<int>(std::lround(sec.tau[k] / p.delta));
    worst = std::max(worst, std::abs(sec.C[k] - sol.D[i_f]));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("fdt_violation: beta = 0 diagnostics vanish") {
  const auto g = solve_spherical(kTwoSpin, 0.0, 0.01, 4.0);
  const auto d = fdt_violation(g, kTwoSpin, 0.0, 1.0, 2.0);
  CHECK(d.rho == 0.5);
  double gmax = 0.0;
  for (int i = 2; i <= g.n; ++i)
    for (int j = 0; j <= i; ++j) gmax = std::max(gmax, std::abs(d.G.at(i, j)));
  CHECK(gmax < 5 * g.delta);
  CHECK(std::abs(d.i_hat) < 1e-6);
  CHECK(d.diag_identity_sup < 1e-6);
}

TEST_CASE("fdt_violation: diagonal identity and high-temperature decay") {
  const auto g = solve_spherical(kThreeSpin, 0.05, 0.01, 12.0);
  const auto d = fdt_violation(g, kThreeSpin, 0.05, 3.0, 5.0);
  CHECK(d.rho == doctest::Approx(0.5 + 2 * 0.0025 * 3.0).epsilon(1e-12));
  CHECK(d.diag_identity_sup < 10 * g.delta);
  CHECK(d.g_sup_window < 0.02);
  CHECK(std::abs(d.i_hat) < 0.02);
}

TEST_CASE("response bound (eq:rbd-new)") {
  const auto g0 = solve_spherical(kTwoSpin, 0.0, 0.005, 5.0);
  const auto r0 = response_bound_check(g0);
  // closed form: max over windows of (2(1-e^{-tau/2}))^2/tau = 0.8143 at tau = 2.513
  CHECK(r0.worst_ratio == doctest::Approx(0.8143).epsilon(2e-3));
  CHECK(r0.worst_ratio <= 1.0);
  const auto g = solve_spherical(kThreeSpin, 0.05, 0.01, 8.0);
  const auto r = response_bound_check(g);
  CHECK(r.worst_ratio <= 1.0 + 20 * g.delta);
}

TEST_CASE("mixed mixture end-to-end coherence") {
  const double beta = 0.05, delta = 0.02, horizon = 10.0;
  const auto g = solve_spherical(kMixed, beta, delta, horizon);
  const auto img = apply_psi(g, kMixed, beta);
  CHECK(grid_distance(g, img) < 20 * delta);
  const auto p = FdtProblem::from_mixture(kMixed, beta, 1e-3, 12.0);
  const auto sol = solve_direct(p);
  const auto sec = fdt_section(g, 8.0, 2.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < sec.tau.size(); ++k) {
    const int i_f = static_cast<int>(std::lround(sec.tau[k] / p.delta));
    worst = std::max(worst, std::abs(sec.C[k] - sol.D[i_f]));
  }
  CHECK(worst < 0.02);
  const auto rb = response_bound_check(g);
  CHECK(rb.worst_ratio <= 1.0 + 20 * delta);
}

TEST_CASE("mutation probe: a corrupted memory kernel trips the FDT comparison") {
  // the cross-module check that backs the stationary-reduction criterion must
  // flag a mis-scaled kernel (stand-in for a sign slip in the psi term)
  const double beta = 0.2, delta = 0.02, horizon = 8.0, t_sec = 5.0;
  const auto g = solve_spherical(kThreeSpin, beta, delta, horizon);
  const auto sec = fdt_section(g, t_sec, 3.0);
  auto sup_against = [&](const Mixture& mix) {
    const auto p = FdtProblem::from_mixture(mix, beta, 1e-3, 20.0);
    const auto sol = solve_direct(p);
    double worst = 0.0;
    for (std::size_t k = 0; k < sec.tau.size(); ++k) {
      const int i_f = static_cast<int>(std::lround(sec.tau[k] / p.delta));
      worst = std::max(worst, std::abs(sec.C[k] - sol.D[i_f]));
    }
    return worst;
  };
  CHECK(sup_against(kThreeSpin) < 0.02);                              // healthy pair passes
  CHECK(sup_against(Mixture::pure(3, 1.3 * std::sqrt(6.0))) > 0.02);  // corruption detected
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  const auto g = solve_soft(kThreeSpin, 0.15, SoftPotential(80.0, 1), 1.0, 0.02, 2.0);
  const std::string path = "ttgrid_roundtrip.bin";
  save_checkpoint(g, path);
  const auto h = load_checkpoint(path);
  CHECK(h.mode == g.mode);
  CHECK(h.beta == g.beta);
  CHECK(h.soft_L == g.soft_L);
  CHECK(h.soft_k == g.soft_k);
  CHECK(h.delta == g.delta);
  CHECK(h.n == g.n);
  REQUIRE(h.terms.size() == g.terms.size());
  CHECK(h.terms[0].p == g.terms[0].p);
  CHECK(h.terms[0].a == g.terms[0].a);
  CHECK(h.R.data() == g.R.data());
  CHECK(h.C.data() == g.C.data());
  CHECK(h.K == g.K);
  CHECK(h.mu == g.mu);
  std::remove(path.c_str());
  CHECK_THROWS_AS((void)load_checkpoint("does_not_exist.bin"), error);
}

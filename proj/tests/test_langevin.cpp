#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "pspin/langevin.hpp"

using namespace pspin;

namespace {

const Mixture kTwoSpin = Mixture::pure(2, 1.0);
const Mixture kThreeSpin = Mixture::pure(3, std::sqrt(6.0));
const Mixture kMixed({{2, 0.5}, {3, 1.0}, {4, 0.3}});

}  // namespace

TEST_CASE("coupling variances follow c({i}) N^{-p+1}") {
  // exact sigma values
  std::array<int, 2> ii{3, 3};
  CHECK(coupling_sigma(100, ii) == doctest::Approx(std::sqrt(2.0 / 100.0)).epsilon(1e-14));
  std::array<int, 3> ijk{1, 5, 9};
  CHECK(coupling_sigma(50, ijk) == doctest::Approx(1.0 / 50.0).epsilon(1e-14));
  std::array<int, 3> iii{2, 2, 2};
  CHECK(coupling_sigma(50, iii) == doctest::Approx(std::sqrt(6.0) / 50.0).epsilon(1e-14));
  std::array<int, 4> iijj{0, 0, 4, 4};
  CHECK(coupling_sigma(20, iijj) == doctest::Approx(2.0 * std::pow(20.0, -1.5)).epsilon(1e-12));

  // empirical second moments over 10^5 independent draws of one coupling
  auto d = sample_disorder(kThreeSpin, 8, 1);
  const int draws = 100000;
  for (auto idx : {std::array<int, 3>{0, 3, 6}, std::array<int, 3>{2, 2, 5},
                   std::array<int, 3>{4, 4, 4}}) {
    double s2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      d.seed = 1000 + k;
      const double v = coupling_value(d, 0, idx);
      s2 += v * v;
    }
    const double sig = coupling_sigma(8, idx);
    CHECK(s2 / draws == doctest::Approx(sig * sig).epsilon(0.03));
  }
}

TEST_CASE("disorder is deterministic in the seed") {
  const auto a = sample_disorder(kMixed, 12, 77);
  const auto b = sample_disorder(kMixed, 12, 77);
  const auto c = sample_disorder(kMixed, 12, 78);
  REQUIRE(a.terms.size() == 3);
  for (std::size_t t = 0; t < a.terms.size(); ++t) {
    CHECK(a.terms[t].J == b.terms[t].J);
  }
  CHECK(a.terms[0].J != c.terms[0].J);
  // stored values match the keyed accessor; rank of (i,j) in odometer order
  const auto rank2 = [](int N, int i, int j) { return i * N - i * (i - 1) / 2 + (j - i); };
  std::array<int, 2> idx2{1, 7};
  CHECK(coupling_value(a, 0, idx2) == a.terms[0].J[rank2(12, 1, 7)]);
  std::array<int, 2> idx0{0, 0};
  CHECK(coupling_value(a, 0, idx0) == a.terms[0].J[0]);
}

TEST_CASE("disorder resource caps") {
  CHECK_THROWS_AS((void)sample_disorder(kThreeSpin, 301, 1), error);
  CHECK_THROWS_AS((void)sample_disorder(kTwoSpin, 1001, 1), error);
  CHECK_THROWS_AS((void)sample_disorder(Mixture::pure(4, 1.0), 150, 1), error);  // tuple cap
  CHECK_THROWS_AS((void)sample_disorder(kMixed, 1, 1), error);  // N >= 2
}

TEST_CASE("gradient: zero point, finite differences, linearity in J") {
  const int N = 10;
  auto d = sample_disorder(kMixed, N, 5);
  std::vector<double> zero(N, 0.0);
  for (double g : grad_hamiltonian(d, zero)) CHECK(g == 0.0);

  std::vector<double> x(N);
  for (int i = 0; i < N; ++i) x[i] = std::sin(0.7 * i + 0.3);
  const auto g = grad_hamiltonian(d, x);
  const double h = 1e-5;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < N; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (hamiltonian(d, xp) - hamiltonian(d, xm)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]));
    scale = std::max(scale, std::abs(g[i]));
  }
  CHECK(worst / scale < 1e-6);

  auto d2 = d;
  for (auto& term : d2.terms) {
    for (auto& v : term.J) v *= 2.0;
    for (auto& v : term.dense2) v *= 2.0;
  }
  const auto g2 = grad_hamiltonian(d2, x);
  for (int i = 0; i < N; ++i) CHECK(g2[i] == doctest::Approx(2.0 * g[i]).epsilon(1e-14));
}

TEST_CASE("simulate: beta = 0 matches the OU covariance at desk scale") {
  LangevinConfig cfg;
  cfg.N = 300;
  cfg.dt = 2e-3;
  cfg.horizon = 3.0;
  cfg.replicas = 6;
  cfg.seed = 42;
  cfg.save_stride = 100;
  const auto run = simulate(kTwoSpin, 0.0, SoftPotential(100.0, 1), cfg);
  double worst = 0.0, kmin = 1e9, kmax = -1e9;
  for (int a = 0; a < run.slices(); ++a) {
    kmin = std::min(kmin, run.c_at(a, a));
    kmax = std::max(kmax, run.c_at(a, a));
    for (int b = 0; b <= a; ++b) {
      const double ex = std::exp(-0.5 * (run.times[a] - run.times[b]));
      worst = std::max(worst, std::abs(run.c_at(a, b) - ex));
    }
  }
  CHECK(worst < 0.12);
  CHECK(kmin > 0.7);  // soft-sphere confinement at finite N
  CHECK(kmax < 1.5);
  // |chi_N(s,t)|^2 <= K_N(s) t + sampling error
  for (int a = 0; a < run.slices(); ++a)
    for (int b = 1; b <= a; ++b) {
      const double excess =
          run.chi_at(a, b) * run.chi_at(a, b) - run.c_at(a, a) * run.times[b];
      CHECK(excess < 0.05);
    }
}

TEST_CASE("simulate: identical seeds give bit-identical observables, any thread count") {
  LangevinConfig cfg;
  cfg.N = 64;
  cfg.dt = 2e-3;
  cfg.horizon = 1.0;
  cfg.replicas = 5;
  cfg.seed = 9;
  cfg.save_stride = 100;
  const auto a = simulate(kThreeSpin, 0.1, SoftPotential(100.0, 1), cfg);
  const auto b = simulate(kThreeSpin, 0.1, SoftPotential(100.0, 1), cfg);
  LangevinConfig cfg3 = cfg;
  cfg3.threads = 3;
  const auto c = simulate(kThreeSpin, 0.1, SoftPotential(100.0, 1), cfg3);
  CHECK(a.C_mean == b.C_mean);
  CHECK(a.chi_mean == b.chi_mean);
  CHECK(a.C_mean == c.C_mean);
  CHECK(a.chi_mean == c.chi_mean);
  LangevinConfig cfg2 = cfg;
  cfg2.seed = 10;
  const auto d = simulate(kThreeSpin, 0.1, SoftPotential(100.0, 1), cfg2);
  CHECK(a.C_mean != d.C_mean);
}

TEST_CASE("simulate: guards and failure modes") {
  LangevinConfig cfg;
  cfg.N = 32;
  cfg.dt = 1e-2;  // dt (4L + ...) = 4 > 1
  cfg.horizon = 1.0;
  cfg.replicas = 1;
  cfg.save_stride = 10;
  CHECK_THROWS_AS((void)simulate(kTwoSpin, 0.0, SoftPotential(100.0, 1), cfg), error);
  cfg.dt = 2e-3;
  cfg.save_stride = 7;  // does not divide 500 steps
  CHECK_THROWS_AS((void)simulate(kTwoSpin, 0.0, SoftPotential(100.0, 1), cfg), error);
  cfg.save_stride = 100;
  CHECK_THROWS_AS((void)simulate(Mixture::pure(5, 1.0), 0.0, SoftPotential(10.0, 1), cfg),
                  error);  // k > m/4 violated

  // unconfined strong drift blows up; the trajectory check reports instability
  LangevinConfig cb;
  cb.N = 16;
  cb.dt = 4e-3;
  cb.horizon = 4.0;
  cb.replicas = 1;
  cb.seed = 3;
  cb.save_stride = 250;
  try {
    (void)simulate(kThreeSpin, 4.0, SoftPotential(0.0, 1), cb);
    FAIL("expected instability");
  } catch (const error& e) {
    CHECK(e.code() == errc::instability);
  }
}

TEST_CASE("compare_to_limit: grid against itself is exact") {
  const auto grid = solve_spherical(kThreeSpin, 0.05, 0.01, 2.0);
  LangevinRun run;
  run.config.N = 100;
  run.times = {0.0, 0.5, 1.0, 1.5, 2.0};
  const int m = 5;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b) {
      const int ia = static_cast<int>(std::lround(run.times[a] / grid.delta));
      const int ib = static_cast<int>(std::lround(run.times[b] / grid.delta));
      run.C_mean.push_back(grid.C.at(ia, ib));
      double chi = 0.0;
      for (int j = 1; j <= ib; ++j)
        chi += 0.5 * grid.delta * (grid.R.at(ia, j - 1) + grid.R.at(ia, j));
      run.chi_mean.push_back(chi);
      run.C_se.push_back(0.0);
      run.chi_se.push_back(0.0);
    }
  const auto rep = compare_to_limit(run, grid);
  CHECK(rep.sup_C < 1e-9);
  CHECK(rep.sup_chi < 1e-9);

  LangevinRun bad = run;
  bad.times.back() = 5.0;  // beyond the grid horizon
  CHECK_THROWS_AS((void)compare_to_limit(bad, grid), error);
}

TEST_CASE("compare_to_limit: finite-N run lands near the limiting grid") {
  LangevinConfig cfg;
  cfg.N = 150;
  cfg.dt = 2e-3;
  cfg.horizon = 2.0;
  cfg.replicas = 3;
  cfg.seed = 11;
  cfg.save_stride = 100;
  const auto run = simulate(kThreeSpin, 0.05, SoftPotential(100.0, 1), cfg);
  const auto grid = solve_spherical(kThreeSpin, 0.05, 0.01, 2.0);
  const auto rep = compare_to_limit(run, grid);
  CHECK(rep.pairs == run.slices() * (run.slices() + 1) / 2);
  CHECK(rep.sup_C < 0.25);
  CHECK(rep.sup_chi < 0.25);
  CHECK(rep.rms_C <= rep.sup_C);
}

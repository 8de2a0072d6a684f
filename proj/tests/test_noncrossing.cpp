#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "pspin/noncrossing.hpp"

using namespace pspin;

namespace {

// Brute-force oracle: every fixed-point-free involution of {1..2n} as a pair
// list, filtered by an explicit crossing scan. Independent of enumerate_nc.
void brute_force(std::vector<int>& left, std::vector<std::pair<int, int>>& cur,
                 std::vector<std::vector<std::pair<int, int>>>& out) {
  if (left.empty()) {
    out.push_back(cur);
    return;
  }
  const int a = left[0];
  for (std::size_t i = 1; i < left.size(); ++i) {
    const int b = left[i];
    std::vector<int> rest;
    for (std::size_t j = 1; j < left.size(); ++j)
      if (j != i) rest.push_back(left[j]);
    cur.emplace_back(a, b);
    brute_force(rest, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<std::pair<int, int>>> oracle_noncrossing(int n) {
  std::vector<int> pts(2 * n);
  for (int i = 0; i < 2 * n; ++i) pts[i] = i + 1;
  std::vector<std::vector<std::pair<int, int>>> all, keep;
  std::vector<std::pair<int, int>> cur;
  brute_force(pts, cur, all);
  for (const auto& pl : all) {
    bool crossing = false;
    for (std::size_t x = 0; x < pl.size() && !crossing; ++x)
      for (std::size_t y = 0; y < pl.size() && !crossing; ++y) {
        if (x == y) continue;
        const auto [a, b] = pl[x];
        const auto [c, d] = pl[y];
        if (a < c && c < b && b < d) crossing = true;
      }
    if (!crossing) keep.push_back(pl);
  }
  for (auto& pl : keep) std::sort(pl.begin(), pl.end());
  std::sort(keep.begin(), keep.end());
  return keep;
}

TriangularField constant_c(int n, double dt, double value) {
  TriangularField C(n, dt);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) C.at(i, j) = value;
  return C;
}

TriangularField exp_c(int n, double dt, double rate) {
  TriangularField C(n, dt);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) C.at(i, j) = std::exp(-rate * (i - j) * dt);
  return C;
}

}  // namespace

TEST_CASE("enumeration matches the brute-force oracle") {
  for (int n = 1; n <= 6; ++n) {
    const auto got = enumerate_nc(n);
    const auto want = oracle_noncrossing(n);
    REQUIRE(got.size() == want.size());
    CHECK(got.size() == catalan(n));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].pairs == want[i]);
      CHECK(is_noncrossing_involution(got[i]));
      CHECK(got[i].crossing_reps().size() == static_cast<std::size_t>(n));
    }
  }
  CHECK(enumerate_nc(1).size() == 1);
  CHECK(enumerate_nc(1)[0].pairs == std::vector<std::pair<int, int>>{{1, 2}});
  CHECK(enumerate_nc(3).size() == 5);
  CHECK(enumerate_nc(5).size() == 42);
  CHECK_THROWS_AS(enumerate_nc(9), error);
  CHECK_THROWS_AS(enumerate_nc(0), error);
}

TEST_CASE("catalan numbers") {
  CHECK(catalan(0) == 1);
  CHECK(catalan(1) == 1);
  CHECK(catalan(4) == 14);
  CHECK(catalan(6) == 132);
  for (int n = 0; n <= 20; ++n) {
    CHECK(static_cast<double>(catalan(n)) <= std::pow(4.0, n));
  }
  CHECK(catalan(36) == 11959798385860453492ull);
  CHECK_THROWS_AS(catalan(37), error);
  CHECK_THROWS_AS(catalan(-1), error);
}

TEST_CASE("h_series: beta = 0 and the constant-kernel Catalan sum") {
  const int n = 100;
  const double dt = 0.02;  // T = 2
  const auto C1 = constant_c(n, dt, 1.0);
  const Mixture two = Mixture::pure(2, 1.0);  // nu'' = 1

  const auto z = h_series(C1, two, 0.0, n, 0, 6);
  CHECK(z.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z.tail_bound == 0.0);

  // direct series oracle: H = sum_n Cat(n) (beta^2 nu'')^n (s-t)^{2n} / (2n)!
  const double beta = 0.3, tau = 2.0;
  double expect = 0.0, fact = 1.0;
  for (int k = 0; k <= 30; ++k) {
    if (k > 0) fact *= (2.0 * k - 1.0) * (2.0 * k);
    expect += static_cast<double>(catalan(std::min(k, 36))) *
              std::pow(beta * beta, k) * std::pow(tau, 2 * k) / fact;
  }
  const auto r = h_series(C1, two, beta, n, 0, 8);
  CHECK(r.value == doctest::Approx(expect).epsilon(2e-6));  // trapezoid error only
  CHECK(r.tail_bound < 2e-7);

  CHECK_THROWS_AS((void)h_series(C1, two, beta, n, 0, 0), error);
  CHECK_THROWS_AS((void)h_series(C1, two, beta, 0, n, 3), error);
}

TEST_CASE("h_series semicircle envelope") {
  // value <= c1 (1 + beta sqrt(nu''(c)) tau)^{-3/2} e^{2 beta sqrt(nu''(c)) tau}
  const int n = 80;
  const double dt = 0.025;
  const Mixture two = Mixture::pure(2, 1.0);
  const auto C1 = constant_c(n, dt, 1.0);
  for (double beta : {0.2, 0.5}) {
    const auto r = h_series(C1, two, beta, n, 0, 8);
    const double th = beta * 2.0;  // beta sqrt(nu''(1)) tau with tau = 2
    const double envelope = 2.0 * std::pow(1.0 + th, -1.5) * std::exp(2.0 * th);
    CHECK(r.value + r.tail_bound <= envelope);
  }
}

TEST_CASE("h_series_kernel fills the whole triangle consistently") {
  const int n = 60;
  const double dt = 0.02;
  const Mixture three = Mixture::pure(3, std::sqrt(6.0));
  const auto C = exp_c(n, dt, 0.5);
  const auto kernel = h_series_kernel(C, three, 0.2, 6);
  REQUIRE(kernel.truncation_order.has_value());
  CHECK(*kernel.truncation_order == 6);
  CHECK(kernel.tail_bound > 0.0);
  for (int i = 0; i <= n; i += 11) {
    CHECK(kernel.H.at(i, i) == 1.0);
    for (int j = 0; j <= i; j += 7) {
      CHECK(kernel.H.at(i, j) >= 1.0);
      const auto point = h_series(C, three, 0.2, i, j, 6);
      CHECK(kernel.H.at(i, j) == point.value);  // same tables, same arithmetic
    }
  }
}

TEST_CASE("h_ode: beta = 0 gives H = 1; kernel is >= 1 and monotone in s") {
  const int n = 100;
  const double dt = 0.02;
  const Mixture three = Mixture::pure(3, std::sqrt(6.0));
  const auto C = exp_c(n, dt, 0.5);
  const auto h0 = h_ode(C, three, 0.0);
  for (int i = 0; i <= n; i += 7)
    for (int j = 0; j <= i; j += 5) CHECK(h0.H.at(i, j) == doctest::Approx(1.0).epsilon(1e-14));
  const auto h = h_ode(C, three, 0.25);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) CHECK(h.H.at(i, j) >= 1.0 - 1e-12);
  for (int j = 0; j <= n; j += 9)
    for (int i = j + 1; i <= n; ++i) CHECK(h.H.at(i, j) >= h.H.at(i - 1, j) - 1e-12);
}

TEST_CASE("h_ode: constant C gives a stationary kernel") {
  const int n = 100;
  const double dt = 0.02;
  const Mixture two = Mixture::pure(2, 1.0);
  const auto h = h_ode(constant_c(n, dt, 1.0), two, 0.3);
  for (int k = 1; k <= n; k += 11)
    for (int i = k; i <= n; i += 13)
      CHECK(h.H.at(i, i - k) == doctest::Approx(h.H.at(k, 0)).epsilon(1e-12));
}

TEST_CASE("h_ode agrees with h_series on T = 2 grids") {
  const Mixture three = Mixture::pure(3, std::sqrt(6.0));
  const double beta = 0.15;
  // ODE on a fine mesh
  const int n_ode = 200;
  const double dt_ode = 0.01;
  const auto Cf = exp_c(n_ode, dt_ode, 0.5);
  const auto h = h_ode(Cf, three, beta);
  // series on two coarser meshes + Richardson to kill the O(dt^2) term
  const int n_a = 50, n_b = 100;
  const auto Ca = exp_c(n_a, 0.04, 0.5);
  const auto Cb = exp_c(n_b, 0.02, 0.5);
  for (double tau : {1.0, 2.0}) {
    const auto ra = h_series(Ca, three, beta, static_cast<int>(tau * 25), 0, 7);
    const auto rb = h_series(Cb, three, beta, static_cast<int>(tau * 50), 0, 7);
    const double series = (4.0 * rb.value - ra.value) / 3.0;
    const double ode = h.H.at(static_cast<int>(tau * 100), 0);
    CHECK(std::abs(ode - series) < std::max(rb.tail_bound, 1e-6));
  }
}

TEST_CASE("h_ode refinement order is ~2") {
  const Mixture two = Mixture::pure(2, 1.0);
  const double beta = 0.4;
  const auto h1 = h_ode(exp_c(50, 0.04, 0.5), two, beta);
  const auto h2 = h_ode(exp_c(100, 0.02, 0.5), two, beta);
  const auto h3 = h_ode(exp_c(200, 0.01, 0.5), two, beta);
  double d12 = 0.0, d23 = 0.0;
  for (int i = 0; i <= 50; ++i)
    for (int j = 0; j <= i; ++j) {
      d12 = std::max(d12, std::abs(h1.H.at(i, j) - h2.H.at(2 * i, 2 * j)));
      d23 = std::max(d23, std::abs(h2.H.at(2 * i, 2 * j) - h3.H.at(4 * i, 4 * j)));
    }
  const double order = std::log2(d12 / d23);
  CHECK(order >= 1.8);
}

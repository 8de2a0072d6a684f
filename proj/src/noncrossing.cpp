#include "pspin/noncrossing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pspin {

bool is_noncrossing_involution(const NcPairing& sigma) {
  const int n = sigma.n;
  if (n < 0 || static_cast<int>(sigma.pairs.size()) != n) return false;
  std::vector<int> seen(2 * n + 1, 0);
  for (const auto& [a, b] : sigma.pairs) {
    if (a < 1 || b < 1 || a > 2 * n || b > 2 * n || a >= b) return false;
    seen[a]++;
    seen[b]++;
  }
  for (int i = 1; i <= 2 * n; ++i)
    if (seen[i] != 1) return false;
  for (std::size_t x = 0; x < sigma.pairs.size(); ++x)
    for (std::size_t y = x + 1; y < sigma.pairs.size(); ++y) {
      auto [a, b] = sigma.pairs[x];
      auto [c, d] = sigma.pairs[y];
      if (c < a) {
        std::swap(a, c);
        std::swap(b, d);
      }
      if (a < c && c < b && b < d) return false;  // crossing
    }
  return true;
}

namespace {

using PairList = std::vector<std::pair<int, int>>;

void gen_pairings(const std::vector<int>& points, PairList& current,
                  std::vector<NcPairing>& out, int n) {
  if (points.empty()) {
    out.push_back(NcPairing{n, current});
    return;
  }
  const int a = points[0];
  // The partner of the smallest point splits the rest into an inner and an
  // outer block, each of even size; iterating partners in increasing order
  // yields lexicographic output.
  for (std::size_t idx = 1; idx < points.size(); idx += 2) {
    const int b = points[idx];
    std::vector<int> inner(points.begin() + 1, points.begin() + idx);
    std::vector<int> outer(points.begin() + idx + 1, points.end());
    current.emplace_back(a, b);
    if (inner.empty()) {
      if (outer.empty()) {
        out.push_back(NcPairing{n, current});
      } else {
        gen_pairings(outer, current, out, n);
      }
    } else {
      // enumerate inner completions, then outer ones, preserving pair order
      std::vector<NcPairing> inner_done;
      PairList scratch;
      gen_pairings(inner, scratch, inner_done, n);
      for (auto& ip : inner_done) {
        PairList saved = current;
        current.insert(current.end(), ip.pairs.begin(), ip.pairs.end());
        if (outer.empty()) {
          out.push_back(NcPairing{n, current});
        } else {
          gen_pairings(outer, current, out, n);
        }
        current = std::move(saved);
      }
    }
    current.pop_back();
  }
}

}  // namespace

std::vector<NcPairing> enumerate_nc(int n) {
  require(n >= 1, errc::invalid_argument, "enumerate_nc: n must be >= 1");
  require(n <= 8, errc::resource_limit, "enumerate_nc: n > 8 exceeds the combinatorial guard");
  std::vector<int> points(2 * n);
  for (int i = 0; i < 2 * n; ++i) points[i] = i + 1;
  std::vector<NcPairing> out;
  PairList current;
  gen_pairings(points, current, out, n);
  // The recursion above appends inner pairs after the enclosing pair; restore
  // sortedness by first element so the order is plain lexicographic.
  for (auto& s : out) std::sort(s.pairs.begin(), s.pairs.end());
  std::sort(out.begin(), out.end(),
            [](const NcPairing& x, const NcPairing& y) { return x.pairs < y.pairs; });
  return out;
}

std::uint64_t catalan(int n) {
  require(n >= 0, errc::invalid_argument, "catalan: n must be >= 0");
  require(n <= 36, errc::resource_limit, "catalan: n > 36 overflows 64-bit integers");
  unsigned __int128 c = 1;
  for (int k = 0; k < n; ++k) {
    c = c * 2u * (2u * k + 1u);
    c /= (k + 2u);
  }
  return static_cast<std::uint64_t>(c);
}

namespace {

std::vector<TriangularField> series_tables(const TriangularField& C, const Mixture& mix,
                                           int i_s, int i_t, int n_max, double& c_bound) {
  const int m = i_s - i_t;  // sub-mesh intervals, local index w in [0, m]
  const double dt = C.delta();

  c_bound = 0.0;
  for (int v = 0; v <= m; ++v)
    for (int u = 0; u <= v; ++u) {
      const double c = C.at(i_t + v, i_t + u);
      require(c >= 0.0, errc::invalid_argument, "h_series: C must be non-negative");
      c_bound = std::max(c_bound, c);
    }

  // W_k tables on the local triangle; W_0 is identically 1 and kept implicit.
  // Block recursion over the partner of the first time:
  //   W_k(b,a) = sum_{j=1..k} int_a^b dw1 int_{w1}^b dw2
  //              nu''(C(w2,w1)) W_{j-1}(w2,w1) W_{k-j}(b,w2),
  // evaluated with composite trapezoid rules. The inner double integral is
  // independent of a once (k,b) are fixed, so each table costs O(k m^3).
  std::vector<TriangularField> W;
  W.reserve(n_max);
  std::vector<double> inner2(m + 1), integrand(m + 1);
  for (int k = 1; k <= n_max; ++k) {
    TriangularField Wk(m, dt, 0.0);
    for (int b = 0; b <= m; ++b) {
      for (int w1 = 0; w1 <= b; ++w1) {
        // integrand over w2 in [w1, b]
        for (int w2 = w1; w2 <= b; ++w2) {
          double s = (k == 1) ? 1.0 : 0.0;
          if (k > 1) {
            // j = 1 term: W_0(w2,w1) = 1
            s += W[k - 2].at(b, w2);
            // j = k term: W_{k-1}(w2,w1), W_0(b,w2) = 1
            s += W[k - 2].at(w2, w1);
            for (int j = 2; j <= k - 1; ++j)
              s += W[j - 2].at(w2, w1) * W[k - j - 1].at(b, w2);
          }
          integrand[w2] = mix.nu2(C.at(i_t + w2, i_t + w1)) * s;
        }
        inner2[w1] = trapezoid(integrand.data(), w1, b, dt);
      }
      // suffix trapezoid of inner2 over [a, b]
      double acc = 0.0;
      Wk.at(b, b) = 0.0;
      for (int a = b - 1; a >= 0; --a) {
        acc += 0.5 * dt * (inner2[a] + inner2[a + 1]);
        Wk.at(b, a) = acc;
      }
    }
    W.push_back(std::move(Wk));
  }
  return W;
}

double series_tail(const Mixture& mix, double beta, double c_bound, double lag, int n_max) {
  // sum_{n > n_max} x^{2n} / (2n)! with x = 2 beta sqrt(nu''(c)) (s-t)
  const double x = 2.0 * std::abs(beta) * std::sqrt(std::max(0.0, mix.nu2(c_bound))) * lag;
  double term = 1.0;
  for (int n = 1; n <= n_max + 1; ++n) term *= x * x / ((2.0 * n - 1.0) * (2.0 * n));
  double tail = 0.0;
  for (int n = n_max + 1; n < n_max + 400; ++n) {
    tail += term;
    term *= x * x / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
    if (term < 1e-300) break;
  }
  return tail;
}

}  // namespace

HSeriesResult h_series(const TriangularField& C, const Mixture& mix, double beta,
                       int i_s, int i_t, int n_max) {
  require(n_max >= 1, errc::invalid_argument, "h_series: n_max must be >= 1");
  require(i_t >= 0 && i_s >= i_t && i_s <= C.n(), errc::invalid_argument,
          "h_series: need 0 <= i_t <= i_s <= n");
  const int m = i_s - i_t;
  double c_bound = 0.0;
  const auto W = series_tables(C, mix, i_s, i_t, n_max, c_bound);
  HSeriesResult out;
  out.value = 1.0;
  double b2n = 1.0;
  for (int k = 1; k <= n_max; ++k) {
    b2n *= beta * beta;
    out.value += b2n * W[k - 1].at(m, 0);
  }
  out.tail_bound = series_tail(mix, beta, c_bound, m * C.delta(), n_max);
  return out;
}

HKernel h_series_kernel(const TriangularField& C, const Mixture& mix, double beta, int n_max) {
  require(n_max >= 1, errc::invalid_argument, "h_series_kernel: n_max must be >= 1");
  const int n = C.n();
  double c_bound = 0.0;
  const auto W = series_tables(C, mix, n, 0, n_max, c_bound);
  HKernel out;
  out.H = TriangularField(n, C.delta());
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = 1.0;
      double b2n = 1.0;
      for (int k = 1; k <= n_max; ++k) {
        b2n *= beta * beta;
        v += b2n * W[k - 1].at(i, j);
      }
      out.H.at(i, j) = v;
    }
  out.truncation_order = n_max;
  out.tail_bound = series_tail(mix, beta, c_bound, n * C.delta(), n_max);
  return out;
}

HKernel h_ode(const TriangularField& C, const Mixture& mix, double beta) {
  const int n = C.n();
  const double dt = C.delta();
  const double b2 = beta * beta;

  TriangularField H(n, dt, 0.0);
  // column-major copy for the H(u,t) factor of the memory integrand
  std::vector<double> Ht(H.data().size());
  const auto col_off = [n](int j) {
    return static_cast<std::size_t>(j) * (n + 1) - static_cast<std::size_t>(j) * (j - 1) / 2;
  };
  const auto ht = [&](int i, int j) -> double& { return Ht[col_off(j) + (i - j)]; };

  std::vector<double> F(n + 1, 0.0);   // cached d_s H at the last finalized row
  std::vector<double> Hp(n + 1), w(n + 1), Fp(n + 1);

  H.at(0, 0) = 1.0;
  ht(0, 0) = 1.0;
  F[0] = 0.0;

  for (int i = 1; i <= n; ++i) {
    const double* prev = H.row(i - 1);
    for (int j = 0; j < i; ++j) Hp[j] = prev[j] + dt * F[j];
    Hp[i] = 1.0;
    for (int u = 0; u <= i; ++u) w[u] = b2 * mix.nu2(C.at(i, u)) * Hp[u];
    for (int j = 0; j < i; ++j) {
      // trapezoid over u in [j, i] of w[u] * H(u, j); u = i contributes Hp[j]
      double s = 0.5 * (w[j] * ht(j, j) + w[i] * Hp[j]);
      const double* col = &Ht[col_off(j)];
      for (int u = j + 1; u < i; ++u) s += w[u] * col[u - j];
      Fp[j] = s * dt;
    }
    double* cur = H.row(i);
    for (int j = 0; j < i; ++j) cur[j] = prev[j] + 0.5 * dt * (F[j] + Fp[j]);
    cur[i] = 1.0;
    for (int j = 0; j <= i; ++j) ht(i, j) = cur[j];
    // refresh the cached derivative at the finalized row
    for (int u = 0; u <= i; ++u) w[u] = b2 * mix.nu2(C.at(i, u)) * cur[u];
    for (int j = 0; j <= i; ++j) {
      if (j == i) {
        F[j] = 0.0;  // empty memory integral on the diagonal
        continue;
      }
      double s = 0.5 * (w[j] * ht(j, j) + w[i] * cur[j]);
      const double* col = &Ht[col_off(j)];
      for (int u = j + 1; u < i; ++u) s += w[u] * col[u - j];
      F[j] = s * dt;
    }
  }
  return HKernel{std::move(H), std::nullopt, 0.0};
}

}  // namespace pspin

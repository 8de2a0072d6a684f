#include "pspin/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace pspin {

namespace {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t k) {
  return mix64(h ^ (k * 0xD6E8FEB86659FD93ull + 0x2545F4914F6CDD1Dull));
}

/// Two standard normals from one 64-bit key (Box-Muller on hashed uniforms).
inline void normal_pair(std::uint64_t key, double& z0, double& z1) {
  const std::uint64_t u = mix64(key);
  const std::uint64_t v = mix64(key ^ 0xA5A5A5A5A5A5A5A5ull);
  const double u1 = (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;  // in (0,1)
  const double u2 = (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * std::numbers::pi * u2);
  z1 = r * std::sin(2.0 * std::numbers::pi * u2);
}

inline double normal_one(std::uint64_t key) {
  double z0, z1;
  normal_pair(key, z0, z1);
  return z0;
}

constexpr std::uint64_t kTagDisorder = 0xD15C0FDEull;
constexpr std::uint64_t kTagInit = 0x1417ull;
constexpr std::uint64_t kTagNoise = 0xB0153ull;

std::uint64_t coupling_key(std::uint64_t seed, int p, std::span<const int> idx) {
  std::uint64_t h = combine(seed, kTagDisorder);
  h = combine(h, static_cast<std::uint64_t>(p));
  for (int i : idx) h = combine(h, static_cast<std::uint64_t>(i));
  return h;
}

double factorial_d(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

std::uint64_t tuple_count(int N, int p) {
  // C(N + p - 1, p), saturating
  long double c = 1.0L;
  for (int t = 1; t <= p; ++t) c = c * (N - 1 + t) / t;
  return c > 4e18L ? ~0ull : static_cast<std::uint64_t>(c + 0.5L);
}

}  // namespace

double coupling_sigma(int N, std::span<const int> sorted_indices) {
  double c = 1.0;
  int run = 1;
  for (std::size_t t = 1; t <= sorted_indices.size(); ++t) {
    if (t < sorted_indices.size() && sorted_indices[t] == sorted_indices[t - 1]) {
      ++run;
      c *= run;  // accumulates prod l_k! incrementally
    } else {
      run = 1;
    }
  }
  const int p = static_cast<int>(sorted_indices.size());
  return std::sqrt(c * std::pow(static_cast<double>(N), -(p - 1)));
}

double coupling_value(const DisorderSample& d, int term, std::span<const int> sorted_indices) {
  const int p = d.terms.at(term).p;
  require(static_cast<int>(sorted_indices.size()) == p, errc::invalid_argument,
          "coupling_value: index tuple does not match the term order");
  return coupling_sigma(d.N, sorted_indices) *
         normal_one(coupling_key(d.seed, p, sorted_indices));
}

DisorderSample sample_disorder(const Mixture& mix, int N, std::uint64_t seed) {
  require(N >= 2, errc::invalid_argument, "disorder: N must be >= 2");
  DisorderSample d;
  d.N = N;
  d.seed = seed;
  d.mixture_terms = mix.terms();
  for (const auto& t : mix.terms()) {
    const std::uint64_t count = tuple_count(N, t.p);
    if (t.p == 2)
      require(N <= 1000, errc::resource_limit, "disorder: N capped at 1000 for p = 2");
    else if (t.p == 3)
      require(N <= 300, errc::resource_limit, "disorder: N capped at 300 for p = 3");
    else
      require(count <= 3'000'000ull, errc::resource_limit,
              "disorder: tuple count exceeds the memory cap for p >= 4");

    DisorderSample::Term term;
    term.p = t.p;
    term.weight = t.a / factorial_d(t.p);
    term.J.reserve(static_cast<std::size_t>(count));
    std::vector<int> idx(t.p, 0);
    // odometer over non-decreasing tuples in lexicographic order
    while (true) {
      term.J.push_back(coupling_sigma(N, idx) * normal_one(coupling_key(seed, t.p, idx)));
      int pos = t.p - 1;
      while (pos >= 0 && idx[pos] == N - 1) --pos;
      if (pos < 0) break;
      const int v = idx[pos] + 1;
      for (int q = pos; q < t.p; ++q) idx[q] = v;
    }
    if (t.p == 2) {
      term.dense2.assign(static_cast<std::size_t>(N) * N, 0.0);
      std::size_t r = 0;
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j, ++r) {
          const double v = term.J[r];
          if (i == j) {
            term.dense2[static_cast<std::size_t>(i) * N + i] = 2.0 * v;
          } else {
            term.dense2[static_cast<std::size_t>(i) * N + j] = v;
            term.dense2[static_cast<std::size_t>(j) * N + i] = v;
          }
        }
    }
    d.terms.push_back(std::move(term));
  }
  return d;
}

namespace {

void add_term_gradient(const DisorderSample::Term& term, int N, std::span<const double> x,
                       std::vector<double>& g) {
  if (term.p == 2) {
    for (int i = 0; i < N; ++i) {
      const double* row = term.dense2.data() + static_cast<std::size_t>(i) * N;
      double s = 0.0;
      for (int j = 0; j < N; ++j) s += row[j] * x[j];
      g[i] += term.weight * s;
    }
    return;
  }
  if (term.p == 3) {
    const double w = term.weight;
    const double* J = term.J.data();
    for (int i = 0; i < N; ++i) {
      const double xi = x[i];
      for (int j = i; j < N; ++j) {
        const double xj = x[j];
        const double xij = xi * xj;
        for (int k = j; k < N; ++k, ++J) {
          const double v = w * (*J);
          g[i] += v * xj * x[k];
          g[j] += v * xi * x[k];
          g[k] += v * xij;
        }
      }
    }
    return;
  }
  // generic p >= 4: prefix/suffix products give d/dx_l of the monomial
  const int p = term.p;
  std::vector<int> idx(p, 0);
  std::vector<double> pre(p + 1), suf(p + 1);
  std::size_t r = 0;
  while (true) {
    const double v = term.weight * term.J[r++];
    pre[0] = 1.0;
    for (int t = 0; t < p; ++t) pre[t + 1] = pre[t] * x[idx[t]];
    suf[p] = 1.0;
    for (int t = p - 1; t >= 0; --t) suf[t] = suf[t + 1] * x[idx[t]];
    for (int t = 0; t < p; ++t) g[idx[t]] += v * pre[t] * suf[t + 1];
    int pos = p - 1;
    while (pos >= 0 && idx[pos] == N - 1) --pos;
    if (pos < 0) break;
    const int nv = idx[pos] + 1;
    for (int q = pos; q < p; ++q) idx[q] = nv;
  }
}

}  // namespace

std::vector<double> grad_hamiltonian(const DisorderSample& d, std::span<const double> x) {
  require(static_cast<int>(x.size()) == d.N, errc::invalid_argument,
          "grad_hamiltonian: dimension mismatch");
  std::vector<double> g(d.N, 0.0);
  for (const auto& term : d.terms) add_term_gradient(term, d.N, x, g);
  return g;
}

double hamiltonian(const DisorderSample& d, std::span<const double> x) {
  require(static_cast<int>(x.size()) == d.N, errc::invalid_argument,
          "hamiltonian: dimension mismatch");
  double h = 0.0;
  for (const auto& term : d.terms) {
    const int p = term.p;
    std::vector<int> idx(p, 0);
    std::size_t r = 0;
    double acc = 0.0;
    while (true) {
      double mono = 1.0;
      for (int t = 0; t < p; ++t) mono *= x[idx[t]];
      acc += term.J[r++] * mono;
      int pos = p - 1;
      while (pos >= 0 && idx[pos] == d.N - 1) --pos;
      if (pos < 0) break;
      const int nv = idx[pos] + 1;
      for (int q = pos; q < p; ++q) idx[q] = nv;
    }
    h += term.weight * acc;
  }
  return h;
}

namespace {

struct ReplicaResult {
  std::vector<double> C, chi;  // lower triangles over slices
};

void run_replica(double beta, const SoftPotential& pot, const LangevinConfig& cfg,
                 const DisorderSample& disorder, int replica,
                 const std::vector<int>& slice_steps, ReplicaResult& out) {
  const int N = cfg.N;
  const double dt = cfg.dt;
  const double sq = std::sqrt(dt);
  const std::uint64_t rseed = combine(combine(cfg.seed, kTagInit), replica);

  std::vector<double> x(N), B(N, 0.0);
  for (int i = 0; i < N; i += 2) {
    double z0, z1;
    normal_pair(combine(rseed, static_cast<std::uint64_t>(i)), z0, z1);
    x[i] = z0;
    if (i + 1 < N) x[i + 1] = z1;
  }

  const int m = static_cast<int>(slice_steps.size());
  std::vector<std::vector<double>> xs(m), bs(m);
  int next_slice = 0;
  const int steps = slice_steps.back();
  const std::uint64_t nseed = combine(combine(cfg.seed, kTagNoise), replica);

  std::vector<double> grad;
  for (int step = 0;; ++step) {
    if (next_slice < m && slice_steps[next_slice] == step) {
      xs[next_slice] = x;
      bs[next_slice] = B;
      ++next_slice;
    }
    if (step == steps) break;

    double r = 0.0;
    for (int i = 0; i < N; ++i) r += x[i] * x[i];
    r /= N;
    require(r <= 10.0, errc::instability,
            "simulate: trajectory blow-up (|x|^2/N > 10); reduce dt or raise L");
    const double fp = pot.f(r, 1);

    if (beta != 0.0) {
      grad = grad_hamiltonian(disorder, x);
    } else {
      grad.assign(N, 0.0);
    }
    const std::uint64_t skey = combine(nseed, static_cast<std::uint64_t>(step));
    for (int i = 0; i < N; i += 2) {
      double z0, z1;
      normal_pair(combine(skey, static_cast<std::uint64_t>(i)), z0, z1);
      const double d0 = sq * z0;
      x[i] += dt * (-fp * x[i] - beta * grad[i]) + d0;
      B[i] += d0;
      if (i + 1 < N) {
        const double d1 = sq * z1;
        x[i + 1] += dt * (-fp * x[i + 1] - beta * grad[i + 1]) + d1;
        B[i + 1] += d1;
      }
    }
  }

  const std::size_t tri = static_cast<std::size_t>(m) * (m + 1) / 2;
  out.C.assign(tri, 0.0);
  out.chi.assign(tri, 0.0);
  std::size_t q = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b, ++q) {
      double c = 0.0, ch = 0.0;
      for (int i = 0; i < N; ++i) {
        c += xs[a][i] * xs[b][i];
        ch += xs[a][i] * bs[b][i];
      }
      out.C[q] = c / N;
      out.chi[q] = ch / N;
    }
}

}  // namespace

LangevinRun simulate(const Mixture& mix, double beta, const SoftPotential& pot,
                     const LangevinConfig& cfg) {
  pot.validate_against(mix);
  require(cfg.N >= 2, errc::invalid_argument, "simulate: N must be >= 2");
  require(cfg.dt > 0.0 && cfg.horizon > 0.0, errc::invalid_argument,
          "simulate: need dt > 0 and horizon > 0");
  require(cfg.replicas >= 1 && cfg.replicas <= 1024, errc::invalid_argument,
          "simulate: replicas must be in [1, 1024]");
  const int steps = static_cast<int>(std::lround(cfg.horizon / cfg.dt));
  require(steps >= 1 && std::abs(steps * cfg.dt - cfg.horizon) < 1e-9 * (1.0 + cfg.horizon),
          errc::invalid_argument, "simulate: horizon must be an integer multiple of dt");
  require(cfg.save_stride >= 1 && steps % cfg.save_stride == 0, errc::invalid_argument,
          "simulate: save_stride must divide the step count");
  const int m = steps / cfg.save_stride + 1;
  require(m <= 400, errc::resource_limit, "simulate: too many stored slices");

  // explicit Euler stability of the confinement and drift rates
  const double grad_scale = 1.0 + 4.0 * std::abs(beta) * std::sqrt(mix.nu2(2.0)) * mix.max_p();
  require(cfg.dt * (4.0 * pot.L + grad_scale) <= 1.0, errc::invalid_argument,
          "simulate: stability guard dt*(4L + beta gradient scale) <= 1 violated");

  const DisorderSample disorder =
      (beta != 0.0) ? sample_disorder(mix, cfg.N, cfg.seed) : DisorderSample{};

  std::vector<int> slice_steps(m);
  for (int a = 0; a < m; ++a) slice_steps[a] = a * cfg.save_stride;

  std::vector<ReplicaResult> results(cfg.replicas);
  const int threads = std::clamp(cfg.threads, 1, cfg.replicas);
  if (threads <= 1) {
    for (int r = 0; r < cfg.replicas; ++r)
      run_replica(beta, pot, cfg, disorder, r, slice_steps, results[r]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w]() {
        for (int r = w; r < cfg.replicas; r += threads)
          run_replica(beta, pot, cfg, disorder, r, slice_steps, results[r]);
      });
    for (auto& th : pool) th.join();
  }

  LangevinRun run;
  run.config = cfg;
  run.mixture_terms = mix.terms();
  run.beta = beta;
  run.soft_L = pot.L;
  run.soft_k = pot.k;
  run.times.resize(m);
  for (int a = 0; a < m; ++a) run.times[a] = slice_steps[a] * cfg.dt;

  const std::size_t tri = static_cast<std::size_t>(m) * (m + 1) / 2;
  run.C_mean.assign(tri, 0.0);
  run.C_se.assign(tri, 0.0);
  run.chi_mean.assign(tri, 0.0);
  run.chi_se.assign(tri, 0.0);
  for (const auto& r : results) {
    run.C_replica.push_back(r.C);
    run.chi_replica.push_back(r.chi);
  }
  const int R = cfg.replicas;
  for (std::size_t q = 0; q < tri; ++q) {
    double mc = 0.0, mx = 0.0;
    for (int r = 0; r < R; ++r) {
      mc += results[r].C[q];
      mx += results[r].chi[q];
    }
    mc /= R;
    mx /= R;
    double vc = 0.0, vx = 0.0;
    for (int r = 0; r < R; ++r) {
      vc += (results[r].C[q] - mc) * (results[r].C[q] - mc);
      vx += (results[r].chi[q] - mx) * (results[r].chi[q] - mx);
    }
    run.C_mean[q] = mc;
    run.chi_mean[q] = mx;
    if (R > 1) {
      run.C_se[q] = std::sqrt(vc / (static_cast<double>(R) * (R - 1)));
      run.chi_se[q] = std::sqrt(vx / (static_cast<double>(R) * (R - 1)));
    }
  }
  return run;
}

DiscrepancyReport compare_to_limit(const LangevinRun& run, const TwoTimeGrid& grid) {
  const int m = run.slices();
  require(m >= 1, errc::invalid_argument, "compare: run has no slices");
  require(run.times.back() <= grid.horizon + 1e-9, errc::invalid_argument,
          "compare: grid horizon does not cover the run slices");
  DiscrepancyReport rep;
  double s2c = 0.0, s2x = 0.0;
  std::size_t q = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b, ++q) {
      const double s = run.times[a], t = run.times[b];
      const double dc = std::abs(run.C_mean[q] - grid_interp_c(grid, s, t));
      const double dx = std::abs(run.chi_mean[q] - grid_interp_chi(grid, s, t));
      rep.sup_C = std::max(rep.sup_C, dc);
      rep.sup_chi = std::max(rep.sup_chi, dx);
      s2c += dc * dc;
      s2x += dx * dx;
      rep.max_se_C = std::max(rep.max_se_C, run.C_se[q]);
      rep.max_se_chi = std::max(rep.max_se_chi, run.chi_se[q]);
      ++rep.pairs;
    }
  rep.rms_C = std::sqrt(s2c / rep.pairs);
  rep.rms_chi = std::sqrt(s2x / rep.pairs);
  return rep;
}

}  // namespace pspin

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pspin/mixture.hpp"
#include "pspin/twotime.hpp"

namespace pspin {

/// One disorder realization: centered Gaussian couplings J indexed by
/// non-decreasing multi-indices 1 <= i_1 <= ... <= i_p <= N per mixture term,
/// variance c({i}) N^{-p+1} with c = prod l_k! over element multiplicities.
/// Draws are counter-based (keyed by seed, p and the index tuple), so a
/// sample is deterministic in the seed and independent of traversal order.
struct DisorderSample {
  struct Term {
    int p = 2;
    double weight = 0.0;        // a_p / p!
    std::vector<double> J;      // couplings in odometer order over sorted tuples
    std::vector<double> dense2; // p == 2 contraction matrix (diagonal doubled)
  };
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<MixtureTerm> mixture_terms;
  std::vector<Term> terms;
};

DisorderSample sample_disorder(const Mixture& mix, int N, std::uint64_t seed);

/// Standard deviation of the coupling at the given sorted multi-index.
double coupling_sigma(int N, std::span<const int> sorted_indices);

/// The coupling value itself (re-derived from the counter generator).
double coupling_value(const DisorderSample& d, int term, std::span<const int> sorted_indices);

/// Exact gradient of H_J(x) = sum_p a_p/p! sum_{i1<=...<=ip} J x^{i1}...x^{ip}.
std::vector<double> grad_hamiltonian(const DisorderSample& d, std::span<const double> x);

double hamiltonian(const DisorderSample& d, std::span<const double> x);

struct LangevinConfig {
  int N = 100;
  double dt = 2e-3;
  double horizon = 3.0;
  int replicas = 4;
  std::uint64_t seed = 1;
  int save_stride = 50;
  int threads = 1;
};

/// Empirical two-time observables of one Langevin run: C_N(s,t) = x_s.x_t/N
/// and chi_N(s,t) = x_s.B_t/N on the stored slice times, replica-averaged
/// with standard errors (fixed replica order).
struct LangevinRun {
  LangevinConfig config;
  std::vector<MixtureTerm> mixture_terms;
  double beta = 0.0;
  double soft_L = 0.0;
  int soft_k = 1;

  std::vector<double> times;                    // m+1 stored slice times
  std::vector<double> C_mean, C_se;             // lower triangle over slices
  std::vector<double> chi_mean, chi_se;
  std::vector<std::vector<double>> C_replica;   // per replica triangles
  std::vector<std::vector<double>> chi_replica;

  int slices() const { return static_cast<int>(times.size()); }
  static std::size_t tri(int a, int b) { return static_cast<std::size_t>(a) * (a + 1) / 2 + b; }
  double c_at(int a, int b) const { return C_mean[tri(a, b)]; }
  double chi_at(int a, int b) const { return chi_mean[tri(a, b)]; }
};

/// Euler-Maruyama integration of dx = -f'(|x|^2/N) x dt - beta grad H_J dt + dB,
/// x_0 i.i.d. standard Gaussian (so C_N(0,0) -> 1), chi accumulated from the
/// same Brownian increments that drive the dynamics.
LangevinRun simulate(const Mixture& mix, double beta, const SoftPotential& pot,
                     const LangevinConfig& config);

struct DiscrepancyReport {
  double sup_C = 0.0, rms_C = 0.0;
  double sup_chi = 0.0, rms_chi = 0.0;
  double max_se_C = 0.0, max_se_chi = 0.0;
  int pairs = 0;
};

/// Sup and RMS distance between the run observables and the limiting grid:
/// C_N vs C and chi_N vs int_0^t R(s,u) du, grid values interpolated
/// bilinearly. Throws invalid_argument when the grid does not cover the run.
DiscrepancyReport compare_to_limit(const LangevinRun& run, const TwoTimeGrid& grid);

}  // namespace pspin

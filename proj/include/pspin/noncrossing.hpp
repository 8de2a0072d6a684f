#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pspin/grid.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

/// Non-crossing fixed-point-free involution of {1,...,2n}, stored as the n
/// pairs (i, sigma(i)) with i < sigma(i); cr(sigma) is the set of left
/// endpoints and always has exactly n elements.
struct NcPairing {
  int n = 0;
  std::vector<std::pair<int, int>> pairs;

  std::vector<int> crossing_reps() const {
    std::vector<int> cr;
    cr.reserve(pairs.size());
    for (const auto& pr : pairs) cr.push_back(pr.first);
    return cr;
  }
};

/// Checks the defining properties: involution without fixed points covering
/// {1,...,2n} and no two pairs (a,b), (c,d) with a < c < b < d.
bool is_noncrossing_involution(const NcPairing& sigma);

/// All non-crossing pairings of {1,...,2n} in lexicographic order of the
/// partner of the smallest element; count equals Catalan(n). Guarded at
/// n <= 8 (Catalan growth).
std::vector<NcPairing> enumerate_nc(int n);

/// n-th Catalan number in exact integer arithmetic; throws resource_limit
/// for n > 35 where the value no longer fits in 64 bits.
std::uint64_t catalan(int n);

struct HSeriesResult {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// Truncated non-crossing-involution series for the renormalized response
/// kernel H(s,t) with memory weight nu''(C):
///   H = 1 + sum_{n>=1} beta^{2n} sum_{sigma in NC_n} int_simplex prod nu''(C(t_i, t_sigma(i))).
/// Evaluated by the recursive block factorization of non-crossing pairings
/// (partner of the first time splits the simplex into nested and trailing
/// blocks), with trapezoidal quadrature on the mesh of C. tail_bound sums
/// (2 beta sqrt(nu''(c)) (s-t))^{2n} / (2n)! over n > n_max with
/// c = max C on the sub-triangle.
HSeriesResult h_series(const TriangularField& C, const Mixture& mix, double beta,
                       int i_s, int i_t, int n_max);

struct HKernel {
  TriangularField H;
  std::optional<int> truncation_order;  // set in series mode only
  double tail_bound = 0.0;
};

/// Whole-triangle series evaluation at truncation order n_max; the block
/// tables already cover every (s,t) pair of the mesh. tail_bound is the
/// worst-point bound (attained at (T, 0)).
HKernel h_series_kernel(const TriangularField& C, const Mixture& mix, double beta, int n_max);

/// Kraichnan kernel by direct integration of
///   d_s H(s,t) = beta^2 int_t^s H(s,u) H(u,t) nu''(C(s,u)) du,  H(t,t) = 1,
/// second-order (Heun) stepping with trapezoidal memory integrals.
/// Production path; h_series is its verification oracle.
HKernel h_ode(const TriangularField& C, const Mixture& mix, double beta);

}  // namespace pspin

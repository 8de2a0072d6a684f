#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pspin/grid.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

enum class ConstraintMode { spherical, soft };

/// Discretized two-time solution on the lower triangle s >= t: response
/// R(s,t), correlation C(s,t) (extended symmetrically on read), diagonal
/// K(s) = C(s,s) and damping mu(s). In spherical mode K == 1 and
/// mu(s) = 1/2 (1 + 2 beta^2 int_0^s psi(C(s,u)) R(s,u) du); in soft mode
/// mu(s) = f_L'(K(s)).
struct TwoTimeGrid {
  ConstraintMode mode = ConstraintMode::spherical;
  std::vector<MixtureTerm> terms;
  double beta = 0.0;
  double soft_L = 0.0;
  int soft_k = 1;
  double k0 = 1.0;

  double delta = 0.0;
  double horizon = 0.0;
  int n = 0;

  TriangularField R, C;
  std::vector<double> K, mu;

  Mixture mixture() const { return Mixture(terms); }
  double c_sym(int i, int j) const noexcept { return C.sym(i, j); }
  int index_of(double time) const;
};

/// Limiting spherical dynamics (K == 1) by a second-order predictor-
/// corrector march in s with trapezoidal memory integrals; the diagonal is
/// pinned to R(t,t) = C(t,t) = 1 exactly.
TwoTimeGrid solve_spherical(const Mixture& mix, double beta, double delta, double horizon);

/// Soft-constraint dynamics with confining potential f_L. The K equation has
/// relaxation rate ~4L and is advanced by an implicit trapezoid step (scalar
/// Newton solve), which keeps large L stable at moderate delta; the R/C
/// damping f_L'(K) stays O(1) once K tracks 1 + O(1/L).
TwoTimeGrid solve_soft(const Mixture& mix, double beta, const SoftPotential& pot, double K0,
                       double delta, double horizon);

/// One application of the map Psi: (R,C) -> (Rt,Ct): freezes
/// mu_{R,C}(s) = 1/2 + beta^2 int psi(C) R from the input pair, solves the
/// renormalized response equation for Rt (self-coupled) and the linear
/// correlation equation for Ct whose sources come entirely from the input.
TwoTimeGrid apply_psi(const TwoTimeGrid& grid, const Mixture& mix, double beta);

struct SectionProfile {
  double t = 0.0;
  std::vector<double> tau;
  std::vector<double> C;
  std::vector<double> R;
};

/// Slices C(t+tau, t), R(t+tau, t) for tau in [0, tau_max].
SectionProfile fdt_section(const TwoTimeGrid& grid, double t, double tau_max);

/// FDT-violation diagnostics: G(s,t) = R(s,t) - 2 d_t C(s,t) with central
/// differences in t (second-order one-sided at t = 0 and t = s),
/// I(s,t) = beta^2 int_0^t [C(t,u) G(s,u) nu''(C(s,u)) + nu'(C(s,u)) G(t,u)] du
///          - 2 beta^2 nu'(C(s,0)) C(t,0),
/// rho = 1/2 + 2 beta^2 nu'(1), and I_hat = I(T, T - taubar) averaged over
/// taubar <= window.
struct FdtDiagnostics {
  TriangularField G;
  TriangularField I;
  double rho = 0.0;
  double i_hat = 0.0;
  double diag_identity_sup = 0.0;  // sup_s |I(s,s) - (mu(s) - 1/2 - 2 beta^2 nu'(1))|
  double g_sup_window = 0.0;       // sup |G(t+tau,t)| over t >= t_min, tau <= window
  double window = 3.0;
  double t_min = 5.0;
};

FdtDiagnostics fdt_violation(const TwoTimeGrid& grid, const Mixture& mix, double beta,
                             double window = 3.0, double t_min = 5.0);

struct ResponseBoundReport {
  double worst_ratio = 0.0;  // max |int_{t1}^{t2} R(s,u) du|^2 / ((t2-t1) sup K)
  double s = 0.0, t1 = 0.0, t2 = 0.0;
};

ResponseBoundReport response_bound_check(const TwoTimeGrid& grid);

/// Bilinear read of C at arbitrary (s,t) inside the solved square.
double grid_interp_c(const TwoTimeGrid& grid, double s, double t);

/// chi(s,t) = int_0^t R(s,u) du by trapezoid along the interpolated row.
double grid_interp_chi(const TwoTimeGrid& grid, double s, double t);

/// Binary checkpoint, magic "TTGRID1": header (mode, mixture terms, beta,
/// potential, delta, horizon) then little-endian double triangles row-major
/// and the K/mu diagonals. Round-trips bit-exactly.
void save_checkpoint(const TwoTimeGrid& grid, const std::string& path);
TwoTimeGrid load_checkpoint(const std::string& path);

}  // namespace pspin

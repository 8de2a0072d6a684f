#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pspin/critical.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

/// One-time stationary equation D'(s) = -int_0^s phi(D(v)) D'(s-v) dv - b,
/// D(0) = 1, on a uniform mesh.
struct FdtProblem {
  double b = 0.5;
  PhiFunction phi = PhiFunction::constant(0.5);
  double d_inf = 0.0;      // sup{ x : phi(x)(1-x) >= b }
  double delta = 1e-3;
  double horizon = 20.0;

  /// Model realization phi(x) = gamma + 2 beta^2 nu'(x) with b = 1/2.
  /// gamma defaults (NaN) to gamma(beta); horizon defaults to max(20, 10/eps)
  /// with the a-priori rate guess eps = 1/2 - 2 beta^2 nu''(0) clamped at 0.05.
  static FdtProblem from_mixture(const Mixture& mix, double beta, double delta = 1e-3,
                                 double horizon = 0.0,
                                 double gamma = std::numeric_limits<double>::quiet_NaN(),
                                 double b = 0.5);

  void validate() const;
};

enum class FdtMethod { direct, fixed_point };
enum class Quadrature { trapezoid, midpoint };

struct FdtSolution {
  std::vector<double> D;       // D(s_i)
  std::vector<double> Dprime;  // D'(s_i)
  double delta = 0.0;
  double b = 0.5;
  double d_inf = 0.0;
  double mu = 0.0;             // phi(1)
  FdtMethod method = FdtMethod::direct;
  int iterations = 0;          // fixed-point iterations (1 for direct)
  double residual = 0.0;       // final sup-norm change (fixed point)
  double max_clamp = 0.0;      // largest truncation applied by (.)_+ in Phi
};

/// Marching scheme: the discrete convolution is trapezoidal and implicit in
/// the newest value, where D'(s_i) carries weight (delta/2) phi(D(0)) and is
/// solved in closed form each step. Global error O(delta^2).
FdtSolution solve_direct(const FdtProblem& p, Quadrature quad = Quadrature::trapezoid);

/// Picard iteration of the map Phi(E)(s) = (1 - D_inf - b int_0^s e^{-mu v}
/// H_v(E) dv)+ with H from its Volterra equation driven by
/// b phi'(E(.) + D_inf); damping 0.5 on the first five sweeps. The observer,
/// when set, sees each raw image Phi(E) before damping.
FdtSolution solve_fixed_point(const FdtProblem& p, double tol = 1e-10, int max_iter = 200,
                              const std::function<void(std::span<const double>)>& observer = {});

struct FdtPair {
  std::vector<double> C;  // C_fdt = D
  std::vector<double> R;  // R_fdt = -D'/b
  double delta = 0.0;
};

FdtPair fdt_pair(const FdtSolution& sol, double b);

struct StationaryResiduals {
  double res_R = 0.0;        // sup residual of the R equation
  double res_C = 0.0;        // sup residual of the C equation
  double res_mu = 0.0;       // |mu_recovered - phi(1)|
  double mu_recovered = 0.0;
  double i_gamma = 0.0;
  double tail_cut = 0.0;     // time at which profiles were truncated
};

/// Sup-norm residuals of the stationary system with psi_hat_gamma(x) =
/// x phi'(x) + phi(x) - gamma, mu = phi(1) and I_gamma from the model.
/// Requires the response profile to decay below 1e-8 before the horizon.
StationaryResiduals stationary_residuals(std::span<const double> C, std::span<const double> R,
                                         double delta, const Mixture& mix, double beta,
                                         double gamma, double b, double tol = 1e-12);

struct RateFit {
  double rate = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of log(profile) on the window [s0, s1].
RateFit decay_rate_fit(std::span<const double> profile, double delta, double s0, double s1);

}  // namespace pspin

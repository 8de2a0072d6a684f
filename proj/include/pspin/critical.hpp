#pragma once

#include <vector>

#include "pspin/mixture.hpp"

namespace pspin {

/// Scalar function on [0,1] used by the stationary (FDT) machinery.
/// Stored as a dense polynomial, which covers both the model realization
/// gamma + 2 beta^2 nu'(x) and user-supplied test functions.
class PhiFunction {
 public:
  static PhiFunction from_mixture(const Mixture& mix, double beta, double gamma);
  static PhiFunction polynomial(std::vector<double> coefficients);
  static PhiFunction constant(double value) { return polynomial({value}); }

  double operator()(double x) const noexcept { return eval(c_, x); }
  double deriv(double x) const noexcept { return eval(d1_, x); }
  double deriv2(double x) const noexcept { return eval(d2_, x); }

  const std::vector<double>& coefficients() const noexcept { return c_; }

 private:
  explicit PhiFunction(std::vector<double> c);
  static double eval(const std::vector<double>& c, double x) noexcept {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
  }
  std::vector<double> c_, d1_, d2_;
};

struct BetaCritical {
  double beta_c = 0.0;
  double x_star = 0.0;  // largest maximizer of h(x) = nu'(x)(1-x)/x on [0,1]
};

/// Dynamical critical temperature: 1/(4 beta_c^2) = sup_{(0,1]} nu'(x)(1-x)/x,
/// with the x -> 0 limit h(0) = nu''(0).
BetaCritical beta_c(const Mixture& mix, double tol = 1e-12);

struct QResult {
  double q = 0.0;
  bool trivial = false;  // true in the FDT phase beta < beta_c, where q := 0
};

/// Plateau value q(beta) = sup{ x in [0,1] : 4 beta^2 nu''(x)(1-x)^2 >= 1 }.
/// For beta < beta_c the FDT-phase convention q = 0 is returned with the
/// trivial flag set.
QResult q_of_beta(const Mixture& mix, double beta, double tol = 1e-12);

/// gamma(beta) = 2 beta^2 [nu''(q)(1-q) - nu'(q)] at q = q(beta) for
/// beta >= beta_c; the FDT value 1/2 below beta_c.
double gamma_of_beta(const Mixture& mix, double beta, double tol = 1e-12);

/// D_infinity = sup{ x in [0,1] : phi(x)(1-x) >= b }. Throws infeasible_model
/// when sup phi(x)(1-x) < b.
double d_infinity(const PhiFunction& phi, double b, double tol = 1e-12);

/// I_gamma = gamma - b + D_inf (phi(D_inf) - gamma) for phi = gamma + 2 beta^2 nu'.
double i_gamma(const Mixture& mix, double beta, double gamma, double b, double tol = 1e-12);

struct DecayCriteria {
  bool criterion_sufficient = false;  // phi(1) > 2 sqrt(b phi'(1))
  bool criterion_necessary = false;   // phi(D_inf) > phi'(D_inf)(1 - D_inf)
};

/// Strict-inequality exponential-decay criteria (equality counts as false).
DecayCriteria exp_decay_criterion(const PhiFunction& phi, double b, double d_inf);

struct CriticalProfile {
  double beta = 0.0;
  double beta_c = 0.0;
  double x_star = 0.0;
  double q = 0.0;
  bool q_is_trivial = false;
  double gamma = 0.0;
  double d_infinity = 0.0;
  double i_gamma = 0.0;
  DecayCriteria decay;
};

/// All closed-form constants of the model at inverse temperature beta (b = 1/2).
CriticalProfile critical_profile(const Mixture& mix, double beta, double tol = 1e-12);

}  // namespace pspin

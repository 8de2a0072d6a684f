#pragma once

#include <vector>

#include "pspin/errors.hpp"

namespace pspin {

struct MixtureTerm {
  int p = 2;       // interaction order, p >= 2
  double a = 0.0;  // coupling amplitude a_p
};

/// Mixed p-spin covariance polynomial nu(r) = sum_p a_p^2/p! r^p.
///
/// Single source of truth for nu and its first three derivatives, for
/// psi(r) = nu'(r) + r nu''(r), and for the interaction degree m = max p.
/// Coefficients are all non-negative, so nu, nu', nu'', nu''' are
/// non-negative and non-decreasing on [0, inf); nu'(0) = 0 by construction
/// (there is no p = 1 term).
class Mixture {
 public:
  explicit Mixture(std::vector<MixtureTerm> terms);

  static Mixture pure(int p, double a) { return Mixture({{p, a}}); }

  /// order-th derivative of nu at r, order in {0,1,2,3}.
  double nu(double r, int order = 0) const;

  // Unchecked fast paths used by the solvers.
  double nu0(double r) const noexcept { return horner(c0_, r); }
  double nu1(double r) const noexcept { return horner(c1_, r); }
  double nu2(double r) const noexcept { return horner(c2_, r); }
  double nu3(double r) const noexcept { return horner(c3_, r); }

  /// psi(r) = nu'(r) + r nu''(r) = d/dr [r nu'(r)].
  double psi(double r) const noexcept { return nu1(r) + r * nu2(r); }
  double psi_prime(double r) const noexcept { return 2.0 * nu2(r) + r * nu3(r); }

  int max_p() const noexcept { return m_; }
  const std::vector<MixtureTerm>& terms() const noexcept { return terms_; }

  /// Dense coefficients of nu' as a polynomial in r (index = power).
  std::vector<double> nu1_coefficients() const;

 private:
  static double horner(const std::vector<double>& c, double r) noexcept {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * r + c[k];
    return v;
  }

  std::vector<MixtureTerm> terms_;  // sorted by p, zero-amplitude terms dropped
  int m_ = 0;
  std::vector<double> c0_, c1_, c2_, c3_;  // dense coefficients of nu..nu'''
};

/// Soft spherical confinement f_L(r) = L (r-1)^2 + r^{2k} / (4k).
///
/// f_L'(1) = 1/2 exactly, which pins the initial balance h_L(0) = 1 - 2 f_L'(1) = 0
/// of the diagonal equation when K(0) = 1.
struct SoftPotential {
  double L = 0.0;
  int k = 1;

  SoftPotential(double L_, int k_) : L(L_), k(k_) {
    require(L >= 0.0, errc::invalid_argument, "soft potential: L must be >= 0");
    require(k >= 1, errc::invalid_argument, "soft potential: k must be a positive integer");
  }

  /// order-th derivative of f_L at r, order in {0,1,2}.
  double f(double r, int order = 0) const;

  /// The constraint k > m/4 ties the potential to the mixture degree.
  void validate_against(const Mixture& mix) const {
    require(4 * k > mix.max_p(), errc::invalid_argument,
            "soft potential: requires k > m/4 for the mixture degree m");
  }
};

}  // namespace pspin

#include "pspin/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pspin {

namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

}  // namespace

Mixture::Mixture(std::vector<MixtureTerm> terms) {
  require(!terms.empty(), errc::invalid_argument, "mixture: needs at least one term");
  std::sort(terms.begin(), terms.end(),
            [](const MixtureTerm& x, const MixtureTerm& y) { return x.p < y.p; });
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    require(t.p >= 2, errc::invalid_argument, "mixture: p must be an integer >= 2");
    require(t.p <= 32, errc::invalid_argument, "mixture: p > 32 not supported");
    require(t.a >= 0.0, errc::invalid_argument, "mixture: negative coefficients excluded");
    if (i + 1 < terms.size())
      require(terms[i + 1].p != t.p, errc::invalid_argument,
              "mixture: duplicate p value " + std::to_string(t.p));
  }
  require(terms.back().a != 0.0, errc::invalid_argument,
          "mixture: leading coefficient a_m must be nonzero");
  for (const auto& t : terms)
    if (t.a != 0.0) terms_.push_back(t);
  m_ = terms_.back().p;

  c0_.assign(m_ + 1, 0.0);
  c1_.assign(m_, 0.0);
  c2_.assign(std::max(m_ - 1, 1), 0.0);
  c3_.assign(std::max(m_ - 2, 1), 0.0);
  for (const auto& t : terms_) {
    const double c = t.a * t.a / factorial(t.p);
    const int p = t.p;
    c0_[p] += c;
    c1_[p - 1] += c * p;
    if (p >= 2) c2_[p - 2] += c * p * (p - 1);
    if (p >= 3) c3_[p - 3] += c * p * (p - 1) * (p - 2);
  }
}

double Mixture::nu(double r, int order) const {
  require(r >= 0.0, errc::invalid_argument, "nu: r must be >= 0");
  switch (order) {
    case 0: return nu0(r);
    case 1: return nu1(r);
    case 2: return nu2(r);
    case 3: return nu3(r);
    default: fail(errc::invalid_argument, "nu: derivative order must be in {0,1,2,3}");
  }
}

std::vector<double> Mixture::nu1_coefficients() const { return c1_; }

double SoftPotential::f(double r, int order) const {
  require(r >= 0.0, errc::invalid_argument, "soft potential: r must be >= 0");
  switch (order) {
    case 0: return L * (r - 1.0) * (r - 1.0) + std::pow(r, 2 * k) / (4.0 * k);
    case 1: return 2.0 * L * (r - 1.0) + 0.5 * std::pow(r, 2 * k - 1);
    case 2: return 2.0 * L + 0.5 * (2 * k - 1) * std::pow(r, 2 * k - 2);
    default: fail(errc::invalid_argument, "soft potential: derivative order must be in {0,1,2}");
  }
}

}  // namespace pspin

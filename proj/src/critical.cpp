#include "pspin/critical.hpp"

#include <cmath>
#include <functional>

namespace pspin {

namespace {

constexpr int kScanIntervals = 4096;  // 2^12 bracketing grid on [0,1]

using Fn = std::function<double(double)>;

double bisect(const Fn& f, double lo, double hi, double flo, double tol) {
  // flo and f(hi) have opposite signs; returns the crossing to absolute tol.
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm >= 0.0) == (flo >= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct ScanResult {
  double x = 0.0;       // largest point with f >= 0, or the location of max f
  bool found = false;   // true when f >= 0 (within eps) somewhere
  double fmax = 0.0;
};

/// Largest x in [0,1] with f(x) >= 0, by downward scan on the 2^12 grid and
/// bisection. When the sought point is (near) a maximum of f that touches
/// zero, value bisection saturates at sqrt(machine eps); such points are
/// relocated by bisecting f' instead, which stays a simple root.
ScanResult largest_nonnegative(const Fn& f, const Fn& fprime, double tol, double eps) {
  const int M = kScanIntervals;
  const double cell = 1.0 / M;
  constexpr double kGridSlack = 1e-6;  // covers the grid offset |f''| cell^2 / 8 at a maximum
  ScanResult out;
  std::vector<double> fv(M + 1);
  for (int i = 0; i <= M; ++i) fv[i] = f(static_cast<double>(i) / M);
  out.fmax = *std::max_element(fv.begin(), fv.end());
  if (fv[M] >= 0.0) {
    out.x = 1.0;
    out.found = true;
    out.fmax = fv[M];
    return out;
  }
  const auto accept = [&](double x) {
    out.x = x;
    out.found = true;
    out.fmax = f(x);
  };
  for (int i = M - 1; i >= 1; --i) {
    if (fv[i] >= 0.0) {
      double xr = bisect(f, i * cell, (i + 1) * cell, fv[i], tol);
      // crossing at a tangency: when the root coincides with a maximum the
      // value bisection saturates at sqrt(eps); the derivative root does not
      const double lo = std::max(0.0, xr - cell), hi = std::min(1.0, xr + cell);
      if (fprime(lo) > 0.0 && fprime(hi) < 0.0) {
        const double xm = bisect(fprime, lo, hi, fprime(lo), tol);
        if (std::abs(f(xm)) <= 1e-11) xr = xm;
      }
      accept(xr);
      return out;
    }
    // near-zero local maximum between grid points (tangency candidate)
    if (fv[i] >= -kGridSlack && fv[i] >= fv[i - 1] && fv[i] >= fv[i + 1]) {
      double xm = i * cell;
      const double dlo = fprime((i - 1) * cell);
      if ((dlo >= 0.0) != (fprime((i + 1) * cell) >= 0.0))
        xm = bisect(fprime, (i - 1) * cell, (i + 1) * cell, dlo, tol);
      const double val = f(xm);
      if (val >= -eps) {
        if (val > 1e-11) {
          // a genuinely positive needle the grid stepped over: take its
          // right crossing
          accept(bisect(f, xm, std::min(1.0, xm + cell), val, tol));
        } else {
          accept(xm);
        }
        return out;
      }
    }
  }
  if (fv[0] >= -eps) accept(0.0);
  return out;
}

/// Location of the maximum of f on [0,1]: grid argmax (largest index on
/// ties), then bisection on f' when the maximum is interior.
double argmax_on_grid(const Fn& f, const Fn& fprime, double tol) {
  const int M = kScanIntervals;
  int best = 0;
  double fbest = f(0.0);
  for (int i = 1; i <= M; ++i) {
    const double fx = f(static_cast<double>(i) / M);
    if (fx >= fbest) {  // >= keeps the largest maximizer on ties
      fbest = fx;
      best = i;
    }
  }
  if (best == 0 || best == M) return static_cast<double>(best) / M;
  const double lo = static_cast<double>(best - 1) / M;
  const double hi = static_cast<double>(best + 1) / M;
  const double dlo = fprime(lo);
  if ((dlo >= 0.0) == (fprime(hi) >= 0.0)) return static_cast<double>(best) / M;
  return bisect(fprime, lo, hi, dlo, tol);
}

std::vector<double> differentiate(const std::vector<double>& c) {
  std::vector<double> d(std::max<std::size_t>(c.size(), 2) - 1, 0.0);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

}  // namespace

PhiFunction::PhiFunction(std::vector<double> c) : c_(std::move(c)) {
  if (c_.empty()) c_.assign(1, 0.0);
  d1_ = differentiate(c_);
  d2_ = differentiate(d1_);
}

PhiFunction PhiFunction::from_mixture(const Mixture& mix, double beta, double gamma) {
  std::vector<double> c = mix.nu1_coefficients();
  for (auto& v : c) v *= 2.0 * beta * beta;
  if (c.empty()) c.assign(1, 0.0);
  c[0] += gamma;
  return PhiFunction(std::move(c));
}

PhiFunction PhiFunction::polynomial(std::vector<double> coefficients) {
  PhiFunction phi(std::move(coefficients));
  for (int i = 0; i <= 64; ++i)
    require(phi.deriv(i / 64.0) >= -1e-12, errc::invalid_argument,
            "phi must be non-decreasing on [0,1]");
  return phi;
}

BetaCritical beta_c(const Mixture& mix, double tol) {
  require(tol > 0.0, errc::invalid_argument, "beta_c: tol must be positive");
  // h(x) = nu'(x)(1-x)/x is the polynomial sum_p p c_p (x^{p-2} - x^{p-1}),
  // so h(0) = nu''(0) holds automatically.
  auto h = [&](double x) { return x > 0.0 ? mix.nu1(x) * (1.0 - x) / x : mix.nu2(0.0); };
  auto hp = [&](double x) {
    if (x <= 0.0) x = 1e-300;
    const double n1 = mix.nu1(x), n2 = mix.nu2(x);
    return n2 * (1.0 - x) / x - n1 / (x * x);
  };
  BetaCritical out;
  out.x_star = argmax_on_grid(h, hp, tol);
  if (out.x_star < tol) out.x_star = 0.0;
  const double hmax = h(out.x_star);
  out.beta_c = 0.5 / std::sqrt(hmax);
  return out;
}

QResult q_of_beta(const Mixture& mix, double beta, double tol) {
  require(beta >= 0.0, errc::invalid_argument, "q_of_beta: beta must be >= 0");
  require(tol > 0.0, errc::invalid_argument, "q_of_beta: tol must be positive");
  QResult out;
  if (beta < beta_c(mix, tol).beta_c) {
    out.trivial = true;  // FDT phase convention: q is pinned to 0 below beta_c
    return out;
  }
  const double b2 = 4.0 * beta * beta;
  auto f = [&](double x) { return b2 * mix.nu2(x) * (1.0 - x) * (1.0 - x) - 1.0; };
  auto fp = [&](double x) {
    const double om = 1.0 - x;
    return b2 * om * (mix.nu3(x) * om - 2.0 * mix.nu2(x));
  };
  const ScanResult r = largest_nonnegative(f, fp, tol, 1e-9);
  if (r.found) out.q = r.x;
  return out;
}

double gamma_of_beta(const Mixture& mix, double beta, double tol) {
  const QResult qr = q_of_beta(mix, beta, tol);
  if (qr.trivial) return 0.5;  // FDT value b
  const double q = qr.q;
  return 2.0 * beta * beta * (mix.nu2(q) * (1.0 - q) - mix.nu1(q));
}

double d_infinity(const PhiFunction& phi, double b, double tol) {
  require(b > 0.0, errc::invalid_argument, "d_infinity: b must be positive");
  require(tol > 0.0, errc::invalid_argument, "d_infinity: tol must be positive");
  auto f = [&](double x) { return phi(x) * (1.0 - x) - b; };
  auto fp = [&](double x) { return phi.deriv(x) * (1.0 - x) - phi(x); };
  const ScanResult r = largest_nonnegative(f, fp, tol, 1e-9 * (1.0 + std::abs(b)));
  require(r.found, errc::infeasible_model,
          "d_infinity: sup phi(x)(1-x) < b, the model is infeasible");
  return r.x;
}

double i_gamma(const Mixture& mix, double beta, double gamma, double b, double tol) {
  const PhiFunction phi = PhiFunction::from_mixture(mix, beta, gamma);
  const double dinf = d_infinity(phi, b, tol);
  return gamma - b + dinf * (phi(dinf) - gamma);
}

DecayCriteria exp_decay_criterion(const PhiFunction& phi, double b, double d_inf) {
  DecayCriteria out;
  const double lhs1 = phi(1.0);
  const double rhs1 = 2.0 * std::sqrt(std::max(0.0, b * phi.deriv(1.0)));
  const double eps1 = 1e-9 * (1.0 + std::abs(lhs1) + std::abs(rhs1));
  out.criterion_sufficient = lhs1 > rhs1 + eps1;
  const double lhs2 = phi(d_inf);
  const double rhs2 = phi.deriv(d_inf) * (1.0 - d_inf);
  const double eps2 = 1e-9 * (1.0 + std::abs(lhs2) + std::abs(rhs2));
  out.criterion_necessary = lhs2 > rhs2 + eps2;
  return out;
}

CriticalProfile critical_profile(const Mixture& mix, double beta, double tol) {
  CriticalProfile out;
  out.beta = beta;
  const BetaCritical bc = beta_c(mix, tol);
  out.beta_c = bc.beta_c;
  out.x_star = bc.x_star;
  const QResult qr = q_of_beta(mix, beta, tol);
  out.q = qr.q;
  out.q_is_trivial = qr.trivial;
  out.gamma = gamma_of_beta(mix, beta, tol);
  const double b = 0.5;
  const PhiFunction phi = PhiFunction::from_mixture(mix, beta, out.gamma);
  out.d_infinity = d_infinity(phi, b, tol);
  out.i_gamma = out.gamma - b + out.d_infinity * (phi(out.d_infinity) - out.gamma);
  out.decay = exp_decay_criterion(phi, b, out.d_infinity);
  return out;
}

}  // namespace pspin

#include "renorm_nbody/bounds.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace renorm {

namespace {

constexpr int kBisectionCap = 200;

struct Root {
  double x;
  double residual;
};

// f must change sign on (lo, hi).
Root bisect(const std::function<double(double)>& f, double lo, double hi, double tolerance,
            const char* what) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (!(f_lo * f_hi < 0.0))
    throw ConvergenceError(std::string("bracketing failed for ") + what);
  for (int it = 0; it < kBisectionCap && hi - lo > tolerance * 1e-3; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return {mid, 0.0};
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

}  // namespace

ConstantsReport compute_constants(double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  const double ceiling = std::sqrt(2.0) - 1.0;
  // Stay clear of the pole of eta at sqrt(2)-1.
  const double hi = ceiling * (1.0 - 1e-9);

  ConstantsReport rep{};
  rep.tolerance = tolerance;

  const Root l0 = bisect([](double l) { return l * eta(l) - 1.0; }, 1e-12, hi, tolerance,
                         "lambda * eta(lambda) = 1");
  rep.lambda0 = l0.x;
  rep.lambda0_residual = l0.residual;

  const Root ls = bisect(
      [](double l) { return l * aux_lambda_functions_partial(l).mu - 1.0; }, 1e-12, hi,
      tolerance, "lambda * mu(lambda) = 1");
  rep.lambda_star = ls.x;
  rep.lambda_star_residual = ls.residual;

  auto f = [](double l) {
    const auto a = aux_lambda_functions_partial(l);
    if (std::isnan(a.delta)) return -std::numeric_limits<double>::infinity();
    return (1.0 - l * a.delta) * l;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = rep.lambda_star;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 10000 && b - a > tolerance; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  if (!(b - a <= tolerance)) throw ConvergenceError("golden-section search did not converge");
  rep.lambda_max = 0.5 * (a + b);
  rep.lambda_max_bracket = b - a;
  rep.beta = f(rep.lambda_max);
  return rep;
}

const ConstantsReport& default_constants() {
  static const ConstantsReport rep = compute_constants(1e-10);
  return rep;
}

std::complex<double> conformal_map(std::complex<double> tau, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(std::abs(tau.imag()) < 2.0 * beta))
    throw DomainError("conformal map: |Im tau| must stay below 2 beta");
  const std::complex<double> e = std::exp(std::numbers::pi * tau / (2.0 * beta));
  return (e - 1.0) / (e + 1.0);
}

std::complex<double> conformal_map_inverse(std::complex<double> sigma, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (sigma == std::complex<double>(1.0, 0.0) || sigma == std::complex<double>(-1.0, 0.0))
    throw DomainError("conformal map inverse: sigma = +-1 has no preimage");
  // e = (1 + sigma) / (1 - sigma), tau = (2 beta / pi) log e
  return (2.0 * beta / std::numbers::pi) * std::log((1.0 + sigma) / (1.0 - sigma));
}

}  // namespace renorm

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/renorm.hpp"
#include "renorm_nbody/system.hpp"

namespace renorm {

namespace detail {

template <class Real>
Real lambda_ceiling() {
  using std::sqrt;
  return sqrt(Real(2)) - Real(1);
}

/// 1 - 2 lambda - lambda^2, positive on [0, sqrt(2) - 1).
template <class Real>
Real lambda_gap(const Real& lambda) {
  return Real(1) - Real(2) * lambda - lambda * lambda;
}

template <class Real>
void require_lambda(const Real& lambda, bool open_at_zero, const char* what) {
  const bool low_ok = open_at_zero ? lambda > Real(0) : lambda >= Real(0);
  if (!low_ok || !(lambda < lambda_ceiling<Real>()))
    throw DomainError(std::string(what) + ": lambda " + std::to_string(static_cast<double>(lambda)) +
                      " outside its domain below sqrt(2)-1");
}

}  // namespace detail

/// eta(lambda) = (1 + lambda) / (1 - 2 lambda - lambda^2)^(3/2), lambda in [0, sqrt(2)-1).
template <class Real>
Real eta(const Real& lambda) {
  using std::sqrt;
  detail::require_lambda(lambda, false, "eta");
  const Real gap = detail::lambda_gap(lambda);
  return (Real(1) + lambda) / (gap * sqrt(gap));
}

/// The lambda-dependent constants that appear in the contraction estimate for s1.
template <class Real>
struct AuxLambda {
  Real alpha;
  Real beta_lemma;
  Real gamma;
  Real nu;
  Real xi;
  Real mu;
  Real delta;  // NaN when lambda * mu >= 1
};

/// Evaluates all auxiliary functions. delta is only defined while lambda*mu < 1;
/// use `aux_delta` when it is required.
template <class Real>
AuxLambda<Real> aux_lambda_functions_partial(const Real& lambda) {
  using std::sqrt;
  detail::require_lambda(lambda, false, "aux_lambda_functions");
  const Real gap = detail::lambda_gap(lambda);
  const Real root_gap = sqrt(gap);
  AuxLambda<Real> a;
  a.alpha = (Real(2) + lambda) / gap;
  a.beta_lemma = (Real(2) + lambda) / (Real(1) + root_gap);
  a.gamma = a.beta_lemma / root_gap;
  a.nu = a.alpha / root_gap + a.gamma;
  a.xi = Real(3) * eta(lambda) / (gap * gap);
  a.mu = (a.gamma > a.nu + a.xi) ? a.gamma : a.nu + a.xi;
  const Real contraction = Real(1) - lambda * a.mu;
  a.delta = contraction > Real(0) ? a.mu / (Real(1) + sqrt(contraction))
                                  : std::numeric_limits<Real>::quiet_NaN();
  return a;
}

template <class Real>
AuxLambda<Real> aux_lambda_functions(const Real& lambda) {
  AuxLambda<Real> a = aux_lambda_functions_partial(lambda);
  if (!(lambda * a.mu < Real(1)))
    throw DomainError("delta(lambda) undefined: lambda*mu(lambda) >= 1");
  return a;
}

template <class Real>
struct BoundsReport {
  Real L;
  PairMatrix<Real> L_ij;
  PairMatrix<Real> M_ij;
  Real radius_lower;  // 1 / L
  std::size_t argmax_i;
  std::size_t argmax_j;
};

/// Lower bound 1/L(q, v, lambda) for the radius of convergence of the
/// physical-time solution through (q, v).
template <class Real>
BoundsReport<Real> L_bound(const SystemSpec<Real>& spec, const std::vector<Vec3<Real>>& q,
                           const std::vector<Vec3<Real>>& v, const Real& lambda) {
  using std::sqrt;
  detail::require_lambda(lambda, true, "L_bound");
  const std::size_t n = spec.size();
  const Real eta_l = eta(lambda);
  const std::vector<Real> K = pairwise_K(spec, q);
  BoundsReport<Real> rep{Real(0), PairMatrix<Real>(n), PairMatrix<Real>(n), Real(0), 0, 1};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real r = norm(q[i] - q[j]);
      const Real w = norm(v[i] - v[j]);
      const Real M = eta_l * (K[i] + K[j]);
      const Real denom = Real(2) * lambda * r;
      const Real a = w / denom;
      const Real Lij = a + sqrt(a * a + M / denom);
      rep.M_ij(i, j) = M;
      rep.L_ij(i, j) = Lij;
      if (Lij > rep.L) {
        rep.L = Lij;
        rep.argmax_i = i;
        rep.argmax_j = j;
      }
    }
  }
  rep.radius_lower = Real(1) / rep.L;
  return rep;
}

struct ConstantsReport {
  double lambda0;          // root of lambda * eta(lambda) = 1
  double lambda0_residual;
  double lambda_star;      // root of lambda * mu(lambda) = 1
  double lambda_star_residual;
  double lambda_max;       // maximizer of (1 - lambda delta(lambda)) lambda on (0, lambda_star)
  double lambda_max_bracket;  // final golden-section bracket width
  double beta;             // strip half-width guaranteed for s1 and s2
  double tolerance;
};

/// Root-finding by bisection (200-iteration cap) and golden-section
/// maximization to the requested bracket width.
ConstantsReport compute_constants(double tolerance = 1e-10);

/// Cached result of compute_constants() at the default tolerance.
const ConstantsReport& default_constants();

/// s1(q,v)^{-1} L(q,v,lambda)^{-1}; at least lambda whenever lambda <= lambda0.
template <class Real>
Real sL_product(const SystemSpec<Real>& spec, const std::vector<Vec3<Real>>& q,
                const std::vector<Vec3<Real>>& v, const Real& lambda) {
  detail::require_lambda(lambda, true, "sL_product");
  const double lambda0 = default_constants().lambda0;
  if (static_cast<double>(lambda) > lambda0 * (1.0 + 1e-12))
    throw DomainError("sL_product requires lambda <= lambda0");
  const Real s = s_value(RenormChoice(RenormKind::S1), spec, q, v);
  const Real product = Real(1) / (s * L_bound(spec, q, v, lambda).L);
  if (!(product >= lambda * (Real(1) - Real(1e-10))))
    throw ConvergenceError("s^-1 L^-1 fell below lambda; bound violated");
  return product;
}

/// sigma = (exp(pi tau / (2 beta)) - 1) / (exp(pi tau / (2 beta)) + 1): maps the
/// strip |Im tau| < beta onto the unit disk.
std::complex<double> conformal_map(std::complex<double> tau, double beta);
std::complex<double> conformal_map_inverse(std::complex<double> sigma, double beta);

}  // namespace renorm

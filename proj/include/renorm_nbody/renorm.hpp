#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/system.hpp"

namespace renorm {

/// Time-renormalization functions s(q, v) with dt/dtau = s.
///
///   S0  s = 1 (physical time)
///   S1  (sum |w|^2/r^2 + sum (K_i + K_j)/r)^(-1/2)
///   S2  (sum |w|^2/r^2 + A(q) sum G(m_i + m_j)/r^2)^(-1/2),  A = sum 1/r
///   S3  (kappa sum |w|^2/r^2 + sum G(m_i + m_j)/r^3)^(-1/2)
///   S4  (sum G(m_i + m_j)/r^3)^(-1/2)
///
/// Sums run over pairs i < j with r = |q_i - q_j|, w = v_i - v_j.
enum class RenormKind { S0, S1, S2, S3, S4 };

struct RenormChoice {
  RenormKind kind = RenormKind::S1;
  double kappa = 1.0;  // S3 only

  RenormChoice() = default;
  RenormChoice(RenormKind k, double kap = 1.0) : kind(k), kappa(kap) {
    if (!(kappa > 0.0)) throw InvariantError("kappa must be positive");
  }

  bool velocity_free() const { return kind == RenormKind::S0 || kind == RenormKind::S4; }
  friend bool operator==(const RenormChoice&, const RenormChoice&) = default;
};

std::string_view to_string(RenormKind kind);
RenormKind parse_renorm_kind(std::string_view text);

/// Physical-time accelerations together with s(q, v), from one pass over pairs.
template <class Real>
struct FieldEval {
  std::vector<Vec3<Real>> g;
  Real s;
};

template <class Real>
FieldEval<Real> evaluate_field(const RenormChoice& choice, const SystemSpec<Real>& spec,
                               const std::vector<Vec3<Real>>& q,
                               const std::vector<Vec3<Real>>& v) {
  using std::sqrt;
  const std::size_t n = spec.size();
  const auto& gm = spec.gm();
  FieldEval<Real> out{std::vector<Vec3<Real>>(n), Real(1)};

  const bool need_k = choice.kind == RenormKind::S1;
  std::vector<Real> K(need_k ? n : 0, Real(0));
  std::vector<Real> inv_r_pair;
  if (need_k) inv_r_pair.reserve(n * (n - 1) / 2);

  Real vel(0), sum_inv_r(0), sum_mu_r2(0), sum_mu_r3(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real r2 = detail::checked_r2(q, i, j, Real(0));
      const Real inv_r = Real(1) / sqrt(r2);
      const Real inv_r2 = inv_r * inv_r;
      const Real inv_r3 = inv_r2 * inv_r;
      const Vec3<Real> d = q[j] - q[i];
      out.g[i] += d * (gm[j] * inv_r3);
      out.g[j] -= d * (gm[i] * inv_r3);
      if (choice.kind == RenormKind::S0) continue;
      const Real mu = gm[i] + gm[j];
      if (choice.kind != RenormKind::S4) {
        const Vec3<Real> w = v[i] - v[j];
        vel += dot(w, w) * inv_r2;
      }
      switch (choice.kind) {
        case RenormKind::S1:
          K[i] += gm[j] * inv_r2;
          K[j] += gm[i] * inv_r2;
          inv_r_pair.push_back(inv_r);
          break;
        case RenormKind::S2:
          sum_inv_r += inv_r;
          sum_mu_r2 += mu * inv_r2;
          break;
        default:
          sum_mu_r3 += mu * inv_r3;
          break;
      }
    }
  }
  if (choice.kind == RenormKind::S0) return out;

  Real S(0);
  switch (choice.kind) {
    case RenormKind::S1: {
      Real pot(0);
      std::size_t p = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pot += (K[i] + K[j]) * inv_r_pair[p++];
      S = vel + pot;
      break;
    }
    case RenormKind::S2: S = vel + sum_inv_r * sum_mu_r2; break;
    case RenormKind::S3: S = static_cast<Real>(choice.kappa) * vel + sum_mu_r3; break;
    case RenormKind::S4: S = sum_mu_r3; break;
    case RenormKind::S0: break;
  }
  out.s = Real(1) / sqrt(S);
  if (!(S > Real(0)) || !is_finite(out.s))
    throw DomainError("time-renormalization value is not finite and positive");
  return out;
}

template <class Real>
Real s_value(const RenormChoice& choice, const SystemSpec<Real>& spec,
             const std::vector<Vec3<Real>>& q, const std::vector<Vec3<Real>>& v) {
  return evaluate_field(choice, spec, q, v).s;
}

/// d/dtau of (q, v, t).
template <class Real>
struct StateDerivative {
  std::vector<Vec3<Real>> dq;
  std::vector<Vec3<Real>> dv;
  Real dt;
};

template <class Real>
StateDerivative<Real> renormalized_rhs(const RenormChoice& choice, const SystemSpec<Real>& spec,
                                       const PhaseState<Real>& state) {
  FieldEval<Real> f = evaluate_field(choice, spec, state.q, state.v);
  StateDerivative<Real> d{std::vector<Vec3<Real>>(state.q.size()), std::move(f.g), f.s};
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    d.dq[i] = state.v[i] * f.s;
    d.dv[i] *= f.s;
  }
  return d;
}

}  // namespace renorm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/renorm.hpp"
#include "renorm_nbody/system.hpp"

namespace renorm {

/// Truncated power series c_0 + c_1 x + ... + c_K x^K.
template <class Real>
class PowerSeries {
 public:
  PowerSeries() = default;
  explicit PowerSeries(std::size_t order) : c_(order + 1, Real(0)) {}
  explicit PowerSeries(std::vector<Real> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw InvariantError("a power series needs at least one coefficient");
  }

  std::size_t order() const { return c_.size() - 1; }
  Real& operator[](std::size_t k) { return c_[k]; }
  const Real& operator[](std::size_t k) const { return c_[k]; }
  const std::vector<Real>& coefficients() const { return c_; }

  Real evaluate(const Real& x) const {
    Real acc(0);
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * x + c_[k];
    return acc;
  }

  PowerSeries derivative() const {
    PowerSeries d(order() == 0 ? 0 : order() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * Real(k);
    return d;
  }

 private:
  std::vector<Real> c_;
};

/// Incremental kernels: each returns coefficient k of the result given
/// coefficients 0..k of the operands and 0..k-1 of the result.
namespace jet {

template <class Real>
Real mul(const Real* a, const Real* b, std::size_t k) {
  Real acc(0);
  for (std::size_t j = 0; j <= k; ++j) acc += a[j] * b[k - j];
  return acc;
}

// c = a / b
template <class Real>
Real div(const Real* a, const Real* b, const Real* c, std::size_t k) {
  Real acc = a[k];
  for (std::size_t j = 0; j < k; ++j) acc -= c[j] * b[k - j];
  return acc / b[0];
}

// w = u^p, from u w' = p w u'
template <class Real>
Real pow(const Real* u, const Real* w, const Real& p, std::size_t k) {
  using std::pow;
  if (k == 0) return pow(u[0], p);
  Real acc(0);
  for (std::size_t j = 0; j < k; ++j) acc += (p * Real(k - j) - Real(j)) * u[k - j] * w[j];
  return acc / (Real(k) * u[0]);
}

}  // namespace jet

struct SeriesOp {
  enum Kind { add, mul, div, pow } kind;
  double p = 0.0;  // exponent for pow

  static SeriesOp power(double exponent) { return {pow, exponent}; }
};

/// Binary series arithmetic truncated at min(order(a), order(b)); pow ignores b.
template <class Real>
PowerSeries<Real> series_arith(const PowerSeries<Real>& a, const PowerSeries<Real>& b,
                               SeriesOp op) {
  const std::size_t K =
      op.kind == SeriesOp::pow ? a.order() : std::min(a.order(), b.order());
  PowerSeries<Real> c(K);
  const Real* pa = a.coefficients().data();
  const Real* pb = b.coefficients().data();
  Real* pc = &c[0];
  switch (op.kind) {
    case SeriesOp::add:
      for (std::size_t k = 0; k <= K; ++k) pc[k] = pa[k] + pb[k];
      break;
    case SeriesOp::mul:
      for (std::size_t k = 0; k <= K; ++k) pc[k] = jet::mul(pa, pb, k);
      break;
    case SeriesOp::div:
      if (pb[0] == Real(0)) throw DomainError("series division by a series with zero constant term");
      for (std::size_t k = 0; k <= K; ++k) pc[k] = jet::div(pa, pb, pc, k);
      break;
    case SeriesOp::pow: {
      if (!(pa[0] > Real(0))) throw DomainError("series power needs a positive constant term");
      const Real p = static_cast<Real>(op.p);
      for (std::size_t k = 0; k <= K; ++k) pc[k] = jet::pow(pa, pc, p, k);
      break;
    }
  }
  return c;
}

template <class Real>
PowerSeries<Real> series_pow(const PowerSeries<Real>& a, double p) {
  return series_arith(a, a, SeriesOp::power(p));
}

/// Expansion mode for taylor_coeffs: physical time, or fictitious time under
/// a renormalization choice.
struct SeriesMode {
  bool renormalized = false;
  RenormChoice choice{};

  static SeriesMode physical() { return {}; }
  static SeriesMode tau(const RenormChoice& c) { return {true, c}; }
};

/// Taylor coefficients of all state components about one point. Component
/// 3*i + d of q/v is coordinate d of body i. `t` holds t(tau) in
/// renormalized mode and is empty otherwise.
template <class Real>
struct SeriesBundle {
  std::size_t order = 0;
  Real point{0};
  bool renormalized = false;
  std::vector<PowerSeries<Real>> q;
  std::vector<PowerSeries<Real>> v;
  std::optional<PowerSeries<Real>> t;

  std::size_t bodies() const { return q.size() / 3; }

  /// max over q and v components of |c_k|.
  Real coefficient_norm(std::size_t k) const {
    using std::abs;
    Real m(0);
    for (const auto& s : q) m = std::max(m, Real(abs(s[k])));
    for (const auto& s : v) m = std::max(m, Real(abs(s[k])));
    return m;
  }
};

namespace detail {

/// Order-by-order jet of the N-body field. Buffers are flat (K+1)-strided.
template <class Real>
class NBodyJet {
 public:
  NBodyJet(const SystemSpec<Real>& spec, std::size_t K, const SeriesMode& mode)
      : spec_(spec), K_(K), n_(spec.size()), npair_(n_ * (n_ - 1) / 2), mode_(mode) {
    const std::size_t L = K_ + 1;
    q_.assign(3 * n_ * L, Real(0));
    v_.assign(3 * n_ * L, Real(0));
    t_.assign(L, Real(0));
    d_.assign(3 * npair_ * L, Real(0));
    r2_.assign(npair_ * L, Real(0));
    rinv3_.assign(npair_ * L, Real(0));
    g_.assign(3 * n_ * L, Real(0));
    if (mode_.renormalized && mode_.choice.kind != RenormKind::S0) {
      rinv_.assign(npair_ * L, Real(0));
      rinv2_.assign(npair_ * L, Real(0));
      w_.assign(3 * npair_ * L, Real(0));
      w2_.assign(npair_ * L, Real(0));
      Kb_.assign(n_ * L, Real(0));
      A_.assign(L, Real(0));
      B_.assign(L, Real(0));
      S_.assign(L, Real(0));
    }
    s_.assign(L, Real(0));
  }

  SeriesBundle<Real> run(const PhaseState<Real>& state) {
    const std::size_t L = K_ + 1;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t d = 0; d < 3; ++d) {
        q_[(3 * i + d) * L] = state.q[i][d];
        v_[(3 * i + d) * L] = state.v[i][d];
      }
    t_[0] = state.t;
    for (std::size_t k = 0; k < K_; ++k) {
      field(k);
      const Real inv = Real(1) / Real(k + 1);
      for (std::size_t c = 0; c < 3 * n_; ++c) {
        const Real* vs = &v_[c * L];
        const Real* gs = &g_[c * L];
        Real fq, fv;
        if (renormalized_s()) {
          fq = jet::mul(&s_[0], vs, k);
          fv = jet::mul(&s_[0], gs, k);
        } else {
          fq = vs[k];
          fv = gs[k];
        }
        q_[c * L + k + 1] = fq * inv;
        v_[c * L + k + 1] = fv * inv;
      }
      t_[k + 1] = (renormalized_s() ? s_[k] : (k == 0 ? Real(1) : Real(0))) * inv;
    }

    SeriesBundle<Real> b;
    b.order = K_;
    b.point = mode_.renormalized ? state.tau : state.t;
    b.renormalized = mode_.renormalized;
    b.q.reserve(3 * n_);
    b.v.reserve(3 * n_);
    for (std::size_t c = 0; c < 3 * n_; ++c) {
      b.q.emplace_back(std::vector<Real>(q_.begin() + c * L, q_.begin() + (c + 1) * L));
      b.v.emplace_back(std::vector<Real>(v_.begin() + c * L, v_.begin() + (c + 1) * L));
    }
    if (mode_.renormalized) b.t = PowerSeries<Real>(t_);
    return b;
  }

 private:
  bool renormalized_s() const {
    return mode_.renormalized && mode_.choice.kind != RenormKind::S0;
  }

  // Fills coefficient k of g (and s in renormalized mode).
  void field(std::size_t k) {
    using std::sqrt;
    const std::size_t L = K_ + 1;
    const auto& gm = spec_.gm();
    const bool rs = renormalized_s();
    const RenormKind kind = mode_.choice.kind;
    for (std::size_t c = 0; c < 3 * n_; ++c) g_[c * L + k] = Real(0);
    if (rs) {
      for (std::size_t i = 0; i < n_; ++i) Kb_[i * L + k] = Real(0);
      A_[k] = B_[k] = S_[k] = Real(0);
    }
    Real vel(0);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j, ++p) {
        Real* r2 = &r2_[p * L];
        Real acc(0);
        for (std::size_t dim = 0; dim < 3; ++dim) {
          Real* d = &d_[(3 * p + dim) * L];
          d[k] = q_[(3 * j + dim) * L + k] - q_[(3 * i + dim) * L + k];
          acc += jet::mul(d, d, k);
        }
        r2[k] = acc;
        if (k == 0 && !(r2[0] > Real(0)))
          throw_collision(i, j, static_cast<double>(sqrt(r2[0])));
        Real* ri3 = &rinv3_[p * L];
        ri3[k] = jet::pow(r2, ri3, Real(-1.5), k);
        for (std::size_t dim = 0; dim < 3; ++dim) {
          const Real dr = jet::mul(&d_[(3 * p + dim) * L], ri3, k);
          g_[(3 * i + dim) * L + k] += gm[j] * dr;
          g_[(3 * j + dim) * L + k] -= gm[i] * dr;
        }
        if (!rs) continue;
        const Real mu = gm[i] + gm[j];
        Real* ri = &rinv_[p * L];
        Real* ri2 = &rinv2_[p * L];
        ri[k] = jet::pow(r2, ri, Real(-0.5), k);
        ri2[k] = jet::pow(r2, ri2, Real(-1), k);
        if (kind != RenormKind::S4) {
          Real* w2 = &w2_[p * L];
          Real a2(0);
          for (std::size_t dim = 0; dim < 3; ++dim) {
            Real* w = &w_[(3 * p + dim) * L];
            w[k] = v_[(3 * i + dim) * L + k] - v_[(3 * j + dim) * L + k];
            a2 += jet::mul(w, w, k);
          }
          w2[k] = a2;
          vel += jet::mul(w2, ri2, k);
        }
        switch (kind) {
          case RenormKind::S1:
            Kb_[i * L + k] += gm[j] * ri2[k];
            Kb_[j * L + k] += gm[i] * ri2[k];
            break;
          case RenormKind::S2:
            A_[k] += ri[k];
            B_[k] += mu * ri2[k];
            break;
          default:
            S_[k] += mu * ri3[k];
            break;
        }
      }
    }
    if (!rs) return;

    Real S(0);
    switch (kind) {
      case RenormKind::S1: {
        Real pot(0);
        std::vector<Real> sumK(L);
        std::size_t pp = 0;
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = i + 1; j < n_; ++j, ++pp) {
            for (std::size_t m = 0; m <= k; ++m) sumK[m] = Kb_[i * L + m] + Kb_[j * L + m];
            pot += jet::mul(sumK.data(), &rinv_[pp * L], k);
          }
        S = vel + pot;
        break;
      }
      case RenormKind::S2: S = vel + jet::mul(&A_[0], &B_[0], k); break;
      case RenormKind::S3: S = static_cast<Real>(mode_.choice.kappa) * vel + S_[k]; break;
      case RenormKind::S4: S = S_[k]; break;
      case RenormKind::S0: break;
    }
    S_[k] = S;
    if (k == 0 && !(S > Real(0)))
      throw DomainError("time-renormalization sum is not positive");
    s_[k] = jet::pow(&S_[0], &s_[0], Real(-0.5), k);
  }

  const SystemSpec<Real>& spec_;
  std::size_t K_, n_, npair_;
  SeriesMode mode_;
  std::vector<Real> q_, v_, t_, d_, r2_, rinv3_, g_;
  std::vector<Real> rinv_, rinv2_, w_, w2_, Kb_, A_, B_, S_, s_;
};

}  // namespace detail

/// Taylor coefficients to order K of the solution through `state`, either in
/// physical time or in fictitious time tau for the given renormalization.
template <class Real>
SeriesBundle<Real> taylor_coeffs(const SystemSpec<Real>& spec, const PhaseState<Real>& state,
                                 std::size_t K, const SeriesMode& mode = SeriesMode::physical()) {
  check_shape(spec, state);
  if (K < 2) throw InvariantError("series order must be at least 2");
  detail::NBodyJet<Real> jet(spec, K, mode);
  return jet.run(state);
}

struct RadiusFit {
  double rho;          // exp(-slope)
  double ratio;        // d_{K-1} / d_K, diagnostic only
  double slope;
  double log_power;    // exponent c of the k^c prefactor used in the fit
  std::size_t used;    // orders that entered the fit
};

/// Model: log d_k = a + b k + c log k on k in [ceil(K/2), K], rho = exp(-b).
/// The prefactor exponent c is fitted jointly but shrunk towards `log_power`
/// (the two-body collision value) with prior width `log_power_width`, in
/// proportion to the residual noise. Clean data keep their own c; noisy or
/// oscillating tails fall back to the prior. Width 0 fixes c; infinity frees it.
struct RadiusOptions {
  double log_power = -2.0 / 3.0;
  double log_power_width = 0.5;
};

inline RadiusFit radius_fit_from_norms(const std::vector<double>& log_d, double log_d0,
                                       const RadiusOptions& opt = {}) {
  if (log_d.size() < 2) throw EstimateError("radius estimate needs a series of order >= 1");
  const std::size_t K = log_d.size() - 1;
  const double floor = log_d0 + std::log(1e-300);
  std::vector<double> ks, ys;
  for (std::size_t k = (K + 1) / 2; k <= K; ++k) {
    if (k == 0 || !std::isfinite(log_d[k]) || log_d[k] < floor) continue;
    ks.push_back(static_cast<double>(k));
    ys.push_back(log_d[k]);
  }
  if (ks.size() < 5) throw EstimateError("fewer than 5 usable orders for the radius fit");

  const double n = static_cast<double>(ks.size());
  double mk = 0, ml = 0, my = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += std::log(ks[i]);
    my += ys[i];
  }
  mk /= n;
  ml /= n;
  my /= n;
  double skk = 0, skl = 0, sll = 0, sky = 0, sly = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double a = ks[i] - mk, b = std::log(ks[i]) - ml, y = ys[i] - my;
    skk += a * a;
    skl += a * b;
    sll += b * b;
    sky += a * y;
    sly += b * y;
  }
  const double c0 = opt.log_power;

  RadiusFit fit{};
  if (opt.log_power_width <= 0.0) {
    fit.log_power = c0;
    fit.slope = (sky - c0 * skl) / skk;
  } else {
    // unpenalized fit first, for the residual variance
    const double det = skk * sll - skl * skl;
    const double b3 = (sky * sll - sly * skl) / det;
    const double c3 = (skk * sly - skl * sky) / det;
    double rss = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double r = (ys[i] - my) - b3 * (ks[i] - mk) - c3 * (std::log(ks[i]) - ml);
      rss += r * r;
    }
    const double w = opt.log_power_width;
    const double lam = std::isfinite(w) ? rss / (n - 3.0) / (w * w) : 0.0;
    const double d = skk * (sll + lam) - skl * skl;
    fit.slope = (sky * (sll + lam) - skl * (sly + lam * c0)) / d;
    fit.log_power = (skk * (sly + lam * c0) - skl * sky) / d;
  }
  fit.rho = std::exp(-fit.slope);
  fit.used = ks.size();
  fit.ratio = std::exp(log_d[K - 1] - log_d[K]);
  return fit;
}

/// Order-k norm used by the estimator: max over components of k |q_k| and
/// w |v_k|. The weight puts both families on one line so that the parity
/// alternation of near-symmetric encounters cancels: log w is the difference
/// of the two families' intercepts under a common (pooled) log-linear slope
/// over the fitted tail. This is exactly covariant under the scaling
/// (q, v) -> (nu^{-2/3} q, nu^{1/3} v) and needs no common nonzero orders.
template <class Real>
std::vector<double> estimator_log_norms(const SeriesBundle<Real>& b) {
  using std::abs;
  using std::log;
  const std::size_t K = b.order;
  struct Family {
    std::vector<double> k, y;
    double kbar = 0, ybar = 0;
  } fam[2];
  for (std::size_t k = (K + 1) / 2; k <= K; ++k) {
    Real mq(0), mv(0);
    for (const auto& s : b.q) mq = std::max(mq, Real(abs(s[k])));
    for (const auto& s : b.v) mv = std::max(mv, Real(abs(s[k])));
    if (mq > Real(0)) {
      fam[0].k.push_back(static_cast<double>(k));
      fam[0].y.push_back(static_cast<double>(log(Real(k) * mq)));
    }
    if (mv > Real(0)) {
      fam[1].k.push_back(static_cast<double>(k));
      fam[1].y.push_back(static_cast<double>(log(mv)));
    }
  }
  double sxy = 0, sxx = 0;
  for (auto& f : fam) {
    if (f.k.empty()) continue;
    for (std::size_t i = 0; i < f.k.size(); ++i) {
      f.kbar += f.k[i];
      f.ybar += f.y[i];
    }
    f.kbar /= static_cast<double>(f.k.size());
    f.ybar /= static_cast<double>(f.k.size());
    for (std::size_t i = 0; i < f.k.size(); ++i) {
      sxy += (f.k[i] - f.kbar) * (f.y[i] - f.ybar);
      sxx += (f.k[i] - f.kbar) * (f.k[i] - f.kbar);
    }
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  double log_w = 0.0;
  if (!fam[0].k.empty() && !fam[1].k.empty())
    log_w = (fam[0].ybar - slope * fam[0].kbar) - (fam[1].ybar - slope * fam[1].kbar);
  const Real w = static_cast<Real>(std::exp(log_w));

  std::vector<double> out(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const Real kq = Real(k == 0 ? 1 : k);
    Real m(0);
    for (const auto& s : b.q) m = std::max(m, Real(kq * abs(s[k])));
    for (const auto& s : b.v) m = std::max(m, Real(w * abs(s[k])));
    out[k] = m > Real(0) ? static_cast<double>(log(m)) : -HUGE_VAL;
  }
  return out;
}

template <class Real>
RadiusFit radius_estimate_detailed(const SeriesBundle<Real>& bundle,
                                   const RadiusOptions& opt = {}) {
  using std::log;
  if (bundle.order < 10) throw EstimateError("radius estimate needs order K >= 10");
  const std::vector<double> log_d = estimator_log_norms(bundle);
  RadiusFit fit = radius_fit_from_norms(log_d, log_d[0], opt);
  const Real dk = bundle.coefficient_norm(bundle.order);
  const Real dk1 = bundle.coefficient_norm(bundle.order - 1);
  fit.ratio = dk > Real(0) ? static_cast<double>(dk1 / dk) : HUGE_VAL;
  return fit;
}

/// Estimated radius of convergence of the (q, v) series.
template <class Real>
double radius_estimate(const SeriesBundle<Real>& bundle, const RadiusOptions& opt = {}) {
  return radius_estimate_detailed(bundle, opt).rho;
}

}  // namespace renorm

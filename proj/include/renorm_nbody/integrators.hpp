#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/renorm.hpp"
#include "renorm_nbody/series.hpp"
#include "renorm_nbody/system.hpp"
#include "renorm_nbody/tableau.hpp"

namespace renorm {

// ---------------------------------------------------------------- taylor

template <class Real>
struct TaylorStepResult {
  PhaseState<Real> state;
  bool warning = false;  // truncation tail d_K h^K above 1e-3 |state|
  double tail = 0.0;
};

namespace detail {

template <class Real>
Real state_norm(const PhaseState<Real>& s) {
  using std::abs;
  Real m(0);
  for (const auto& p : s.q)
    for (std::size_t d = 0; d < 3; ++d) m = std::max(m, Real(abs(p[d])));
  for (const auto& p : s.v)
    for (std::size_t d = 0; d < 3; ++d) m = std::max(m, Real(abs(p[d])));
  return m;
}

template <class Real>
PhaseState<Real> evaluate_bundle(const SeriesBundle<Real>& b, const PhaseState<Real>& from,
                                 const Real& h) {
  PhaseState<Real> out;
  const std::size_t n = b.bodies();
  out.q.resize(n);
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      out.q[i][d] = b.q[3 * i + d].evaluate(h);
      out.v[i][d] = b.v[3 * i + d].evaluate(h);
    }
  out.t = b.t ? b.t->evaluate(h) : from.t + h;
  out.tau = from.tau + h;
  return out;
}

/// Step size keeping the last two terms below eps * max(1, |x|):
/// h = min_{k in {K-1, K}} (eps max(1, d_0) / d_k)^{1/k}.
template <class Real>
double tail_step(const SeriesBundle<Real>& b, double eps) {
  using std::log;
  const double scale = std::max(1.0, static_cast<double>(b.coefficient_norm(0)));
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t k = b.order - 1; k <= b.order; ++k) {
    const double dk = static_cast<double>(b.coefficient_norm(k));
    if (dk > 0.0) h = std::min(h, std::pow(eps * scale / dk, 1.0 / static_cast<double>(k)));
  }
  return h;
}

template <class Real>
void tail_check(const SeriesBundle<Real>& b, const PhaseState<Real>& state, const Real& h,
                TaylorStepResult<Real>& r) {
  using std::abs;
  using std::pow;
  const double tail = static_cast<double>(b.coefficient_norm(b.order)) *
                      std::pow(std::abs(static_cast<double>(h)), static_cast<double>(b.order));
  r.tail = tail;
  r.warning = tail > 1e-3 * static_cast<double>(state_norm(state));
}

}  // namespace detail

/// One Taylor step of size dtau in fictitious time (physical time for S0).
template <class Real>
TaylorStepResult<Real> taylor_step(const SystemSpec<Real>& spec, const RenormChoice& choice,
                                   const PhaseState<Real>& state, const Real& dtau,
                                   std::size_t K) {
  const SeriesBundle<Real> b = taylor_coeffs(spec, state, K, SeriesMode::tau(choice));
  TaylorStepResult<Real> r;
  r.state = detail::evaluate_bundle(b, state, dtau);
  detail::tail_check(b, state, dtau, r);
  return r;
}

// ---------------------------------------------------------------- runge-kutta

namespace detail {

template <class Real>
std::vector<Real> pack(const PhaseState<Real>& s) {
  std::vector<Real> y;
  y.reserve(6 * s.q.size() + 1);
  for (const auto& p : s.q) y.insert(y.end(), p.x.begin(), p.x.end());
  for (const auto& p : s.v) y.insert(y.end(), p.x.begin(), p.x.end());
  y.push_back(s.t);
  return y;
}

template <class Real>
PhaseState<Real> unpack(const std::vector<Real>& y, const Real& tau) {
  const std::size_t n = (y.size() - 1) / 6;
  PhaseState<Real> s;
  s.q.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      s.q[i][d] = y[3 * i + d];
      s.v[i][d] = y[3 * n + 3 * i + d];
    }
  s.t = y.back();
  s.tau = tau;
  return s;
}

template <class Real>
std::vector<Real> rhs_flat(const RenormChoice& choice, const SystemSpec<Real>& spec,
                           const std::vector<Real>& y) {
  const std::size_t n = spec.size();
  std::vector<Vec3<Real>> q(n), v(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      q[i][d] = y[3 * i + d];
      v[i][d] = y[3 * n + 3 * i + d];
    }
  const FieldEval<Real> f = evaluate_field(choice, spec, q, v);
  std::vector<Real> dy(y.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      dy[3 * i + d] = f.s * v[i][d];
      dy[3 * n + 3 * i + d] = f.s * f.g[i][d];
    }
  dy.back() = f.s;
  return dy;
}

/// sum_{k >= 1} c_k h^k, i.e. the series value minus its constant term.
template <class Real>
Real series_increment(const PowerSeries<Real>& s, const Real& h) {
  Real acc(0);
  for (std::size_t k = s.order(); k >= 1; --k) acc = acc * h + s[k];
  return acc * h;
}

template <class Real>
std::vector<Real> bundle_increment(const SeriesBundle<Real>& b, const Real& h) {
  std::vector<Real> inc;
  inc.reserve(2 * b.q.size() + 1);
  for (const auto& s : b.q) inc.push_back(series_increment(s, h));
  for (const auto& s : b.v) inc.push_back(series_increment(s, h));
  inc.push_back(b.t ? series_increment(*b.t, h) : h);
  return inc;
}

/// y += inc with Kahan compensation carried in `comp` across steps.
template <class Real>
void compensated_add(std::vector<Real>& y, const std::vector<Real>& inc, std::vector<Real>& comp) {
  for (std::size_t c = 0; c < y.size(); ++c) {
    const Real d = inc[c] + comp[c];
    const Real yn = y[c] + d;
    comp[c] = d - (yn - y[c]);
    y[c] = yn;
  }
}

}  // namespace detail

template <class Real>
struct RKStepResult {
  PhaseState<Real> state;
  std::vector<Real> error;      // h * sum (b - bhat) k, packed as (q, v, t)
  std::vector<Real> increment;  // h * sum b k, same packing
};

/// One explicit RK step of size h. CollisionError from any stage propagates.
template <class Real>
RKStepResult<Real> rk_step(const SystemSpec<Real>& spec, const RenormChoice& choice,
                           const PhaseState<Real>& state, const Real& h,
                           const RKCoefficients<Real>& tab,
                           const std::vector<Real>* first_stage = nullptr) {
  const std::vector<Real> y = detail::pack(state);
  const std::size_t m = y.size();
  const std::size_t S = tab.stages;
  std::vector<std::vector<Real>> k(S);
  k[0] = first_stage ? *first_stage : detail::rhs_flat(choice, spec, y);
  std::vector<Real> yi(m);
  for (std::size_t i = 1; i < S; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      Real acc(0);
      for (std::size_t j = 0; j < i; ++j)
        if (tab.a[i][j] != Real(0)) acc += tab.a[i][j] * k[j][c];
      yi[c] = y[c] + h * acc;
    }
    k[i] = detail::rhs_flat(choice, spec, yi);
  }
  std::vector<Real> ynew(m), err(m), inc(m);
  for (std::size_t c = 0; c < m; ++c) {
    Real acc(0), eacc(0);
    for (std::size_t i = 0; i < S; ++i) {
      if (tab.b[i] != Real(0)) acc += tab.b[i] * k[i][c];
      if (tab.e[i] != Real(0)) eacc += tab.e[i] * k[i][c];
    }
    inc[c] = h * acc;
    ynew[c] = y[c] + inc[c];
    err[c] = h * eacc;
  }
  return {detail::unpack(ynew, state.tau + h), std::move(err), std::move(inc)};
}

// ---------------------------------------------------------------- driver

enum class StepMode { taylor_const, rk_const, rk_adaptive };
enum class EndKind { tau, time };

template <class Real>
struct StepInfo {
  const PhaseState<Real>& state;             // state at the start of the step
  const SeriesBundle<Real>* bundle;          // Taylor modes only
  double h;
};

template <class Real>
struct IntegratorConfig {
  StepMode mode = StepMode::taylor_const;
  double dtau = 1e-2;            // constant modes
  std::size_t order = 30;        // Taylor order K
  // Taylor only: also cap each step by the tail rule with this relative
  // tolerance (0 disables).
  double tail_eps = 0.0;
  double rtol = 1e-12;
  double atol = 1e-12;
  const ButcherTableau* tableau = nullptr;  // defaults to the bundled 9(8) pair
  EndKind end_kind = EndKind::time;
  double end = 1.0;
  std::size_t stride = 1;
  std::size_t max_steps = 10'000'000;
  bool compensated = true;  // Kahan-summed state updates
  std::function<void(const StepInfo<Real>&)> on_step;  // optional observer
};

template <class Real>
struct Trajectory {
  std::vector<PhaseState<Real>> samples;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t warnings = 0;  // Taylor steps with a large truncation tail

  const PhaseState<Real>& final_state() const { return samples.back(); }
};

namespace detail {

template <class Real>
double rms_error(const std::vector<Real>& err, const std::vector<Real>& y0,
                 const std::vector<Real>& y1, double rtol, double atol) {
  using std::abs;
  double acc = 0.0;
  for (std::size_t c = 0; c < err.size(); ++c) {
    const double sc = atol + rtol * std::max(std::abs(static_cast<double>(y0[c])),
                                             std::abs(static_cast<double>(y1[c])));
    const double r = static_cast<double>(err[c]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

template <class Real>
double rms(const std::vector<Real>& x, const std::vector<Real>& y0, double rtol, double atol) {
  double acc = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double sc = atol + rtol * std::abs(static_cast<double>(y0[c]));
    const double r = static_cast<double>(x[c]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

/// Initial step from the |y|/|f| heuristic with a second-derivative check.
template <class Real>
double initial_step(const SystemSpec<Real>& spec, const RenormChoice& choice,
                    const PhaseState<Real>& s, const std::vector<Real>& f0, int order,
                    double rtol, double atol) {
  const std::vector<Real> y0 = pack(s);
  const double d0 = rms(y0, y0, rtol, atol);
  const double d1 = rms(f0, y0, rtol, atol);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  std::vector<Real> y1(y0.size());
  for (std::size_t c = 0; c < y0.size(); ++c) y1[c] = y0[c] + Real(h0) * f0[c];
  const std::vector<Real> f1 = rhs_flat(choice, spec, y1);
  std::vector<Real> df(y0.size());
  for (std::size_t c = 0; c < y0.size(); ++c) df[c] = f1[c] - f0[c];
  const double d2 = rms(df, y0, rtol, atol) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dmax, 1.0 / (order + 1));
  return std::min(100.0 * h0, h1);
}

/// Solves t(h) = target on (0, h_hi] by the Illinois variant of regula falsi.
template <class F>
double solve_end(F&& t_of, double t0, double target, double h_hi, double t_hi) {
  double a = 0.0, fa = t0 - target, b = h_hi, fb = t_hi - target;
  int side = 0;
  for (int it = 0; it < 100; ++it) {
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = t_of(c) - target;
    if (fc == 0.0 || std::abs(b - a) < 1e-16 * h_hi) return c;
    if (fc * fb > 0.0) {
      b = c;
      fb = fc;
      if (side == -1) fa /= 2;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb /= 2;
      side = 1;
    }
    if (std::abs(fc) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(target)) return c;
  }
  throw ConvergenceError("could not locate the final step onto the requested end time");
}

/// Newton on the t(tau) series for the fictitious step that reaches `target`.
template <class Real>
Real taylor_end_step(const SeriesBundle<Real>& b, const Real& t0, const Real& target,
                     const Real& h_hi) {
  using std::abs;
  const PowerSeries<Real>& t = *b.t;
  const PowerSeries<Real> dt = t.derivative();
  Real h = h_hi * (target - t0) / (t.evaluate(h_hi) - t0);
  for (int it = 0; it < 50; ++it) {
    const Real delta = (t.evaluate(h) - target) / dt.evaluate(h);
    h -= delta;
    if (abs(delta) <= Real(4) * epsilon_of<Real>() * abs(h_hi)) return h;
  }
  throw ConvergenceError("Newton on the time series did not converge");
}

}  // namespace detail

template <class Real>
Trajectory<Real> integrate(const SystemSpec<Real>& spec, const RenormChoice& choice,
                           const PhaseState<Real>& state0, const IntegratorConfig<Real>& cfg) {
  using std::abs;
  check_shape(spec, state0);
  if (cfg.mode != StepMode::rk_adaptive && !(cfg.dtau > 0.0))
    throw InvariantError("constant step dtau must be positive");
  if (cfg.mode == StepMode::rk_adaptive && !(cfg.rtol > 0.0 && cfg.atol > 0.0))
    throw InvariantError("rtol and atol must be positive");
  if (cfg.stride == 0) throw InvariantError("output stride must be positive");

  const bool by_time = cfg.end_kind == EndKind::time;
  const Real end = static_cast<Real>(cfg.end);
  auto position = [&](const PhaseState<Real>& s) { return by_time ? s.t : s.tau; };
  if (!(end > position(state0))) throw InvariantError("integration end must lie after the start");

  Trajectory<Real> traj;
  traj.samples.push_back(state0);
  PhaseState<Real> state = state0;
  std::vector<Real> comp(6 * spec.size() + 1, Real(0));
  std::size_t since_sample = 0;
  auto accept = [&](PhaseState<Real> next, bool last) {
    state = std::move(next);
    ++traj.accepted;
    if (++since_sample == cfg.stride || last) {
      traj.samples.push_back(state);
      since_sample = 0;
    }
    if (traj.accepted >= cfg.max_steps && !last)
      throw MaxStepsError("step cap of " + std::to_string(cfg.max_steps) + " reached");
  };

  if (cfg.mode == StepMode::taylor_const) {
    const SeriesMode smode = SeriesMode::tau(choice);
    for (bool last = false; !last;) {
      const SeriesBundle<Real> b = taylor_coeffs(spec, state, cfg.order, smode);
      Real h = static_cast<Real>(cfg.dtau);
      if (cfg.tail_eps > 0.0) h = std::min(h, Real(detail::tail_step(b, cfg.tail_eps)));
      if (cfg.on_step) cfg.on_step({state, &b, static_cast<double>(h)});
      const Real t_next = b.t->evaluate(h);
      if (by_time ? t_next >= end : state.tau + h >= end) {
        h = by_time ? detail::taylor_end_step(b, state.t, end, h) : end - state.tau;
        last = true;
      }
      TaylorStepResult<Real> r;
      if (cfg.compensated) {
        std::vector<Real> y = detail::pack(state);
        detail::compensated_add(y, detail::bundle_increment(b, h), comp);
        r.state = detail::unpack(y, state.tau + h);
      } else {
        r.state = detail::evaluate_bundle(b, state, h);
      }
      detail::tail_check(b, state, h, r);
      if (r.warning) ++traj.warnings;
      if (last) {
        if (by_time) r.state.t = end;
        else r.state.tau = end;
      }
      accept(std::move(r.state), last);
    }
    return traj;
  }

  const ButcherTableau& tableau = cfg.tableau ? *cfg.tableau : ButcherTableau::verner98();
  const RKCoefficients<Real> tab(tableau);

  // Step from `s` by h and clip onto the end if it is overshot.
  auto clipped_step = [&](const PhaseState<Real>& s, Real h,
                          const std::vector<Real>* f0) -> std::pair<RKStepResult<Real>, bool> {
    RKStepResult<Real> r = rk_step(spec, choice, s, h, tab, f0);
    bool last = false;
    if (by_time ? r.state.t >= end : r.state.tau >= end) {
      last = true;
      if (by_time) {
        const double hs = detail::solve_end(
            [&](double hh) {
              return static_cast<double>(rk_step(spec, choice, s, Real(hh), tab, f0).state.t);
            },
            static_cast<double>(s.t), static_cast<double>(end), static_cast<double>(h),
            static_cast<double>(r.state.t));
        h = Real(hs);
      } else {
        h = end - s.tau;
      }
      r = rk_step(spec, choice, s, h, tab, f0);
      if (by_time) r.state.t = end;
      else r.state.tau = end;
    }
    return {std::move(r), last};
  };

  // Accepted RK step: redo the update with compensation, keep the end clip.
  auto commit = [&](const PhaseState<Real>& from, RKStepResult<Real>& r) {
    if (!cfg.compensated) return std::move(r.state);
    std::vector<Real> y = detail::pack(from);
    detail::compensated_add(y, r.increment, comp);
    PhaseState<Real> out = detail::unpack(y, r.state.tau);
    if (by_time && r.state.t == end) out.t = end;
    return out;
  };

  if (cfg.mode == StepMode::rk_const) {
    const Real h = static_cast<Real>(cfg.dtau);
    for (bool last = false; !last;) {
      if (cfg.on_step) cfg.on_step({state, nullptr, cfg.dtau});
      auto [r, fin] = clipped_step(state, h, nullptr);
      last = fin;
      accept(commit(state, r), last);
    }
    return traj;
  }

  // adaptive
  std::vector<Real> f0 = detail::rhs_flat(choice, spec, detail::pack(state));
  double h = detail::initial_step(spec, choice, state, f0, tab.embedded_order, cfg.rtol,
                                  cfg.atol);
  const double expo = 1.0 / (tab.embedded_order + 1);
  bool rejected_last = false;
  for (bool last = false; !last;) {
    if (traj.accepted + traj.rejected >= cfg.max_steps)
      throw MaxStepsError("step cap of " + std::to_string(cfg.max_steps) + " reached");
    if (!(h > 1e-300)) throw ConvergenceError("adaptive step size underflow");
    std::optional<std::pair<RKStepResult<Real>, bool>> attempt;
    try {
      attempt = clipped_step(state, Real(h), &f0);
    } catch (const CollisionError&) {
      ++traj.rejected;
      h *= 0.5;
      rejected_last = true;
      continue;
    } catch (const DomainError&) {
      ++traj.rejected;
      h *= 0.5;
      rejected_last = true;
      continue;
    }
    auto& [r, fin] = *attempt;
    const std::vector<Real> y0 = detail::pack(state);
    const std::vector<Real> y1 = detail::pack(r.state);
    double err = detail::rms_error(r.error, y0, y1, cfg.rtol, cfg.atol);
    if (!std::isfinite(err)) err = 1e10;
    if (err <= 1.0) {
      const double h_taken = static_cast<double>(r.state.tau - state.tau);
      if (cfg.on_step) cfg.on_step({state, nullptr, h_taken});
      last = fin;
      accept(commit(state, r), last);
      if (!last) f0 = detail::rhs_flat(choice, spec, detail::pack(state));
      double fac = err > 0.0 ? 0.9 * std::pow(err, -expo) : 5.0;
      fac = std::clamp(fac, 0.2, 5.0);
      if (rejected_last) fac = std::min(fac, 1.0);
      // keep growing from the nominal step, not from a clipped final one
      h = std::max(h, h_taken) * fac;
      rejected_last = false;
    } else {
      ++traj.rejected;
      h *= std::clamp(0.9 * std::pow(err, -expo), 0.2, 1.0);
      rejected_last = true;
    }
  }
  return traj;
}

// ---------------------------------------------------------------- reference

/// Physical-time Taylor (K = 30) stepping exactly onto each requested time.
/// Steps are sized by the tail rule at `eps` (defaults to 1e-2 machine eps).
template <class Real>
std::vector<PhaseState<Real>> reference_solution(const SystemSpec<Real>& spec,
                                                 const PhaseState<Real>& state0,
                                                 const std::vector<Real>& times,
                                                 double eps = 0.0, std::size_t K = 30,
                                                 double step_scale = 1.0) {
  check_shape(spec, state0);
  if (eps <= 0.0) eps = 1e-2 * static_cast<double>(epsilon_of<Real>());
  std::vector<PhaseState<Real>> out;
  out.reserve(times.size());
  PhaseState<Real> state = state0;
  state.tau = state.t;
  const SeriesMode mode = SeriesMode::tau(RenormChoice(RenormKind::S0));
  std::vector<Real> comp(6 * spec.size() + 1, Real(0));
  std::size_t steps = 0;
  for (const Real& target : times) {
    if (target < state.t) throw InvariantError("reference times must be non-decreasing and in span");
    while (state.t < target) {
      const SeriesBundle<Real> b = taylor_coeffs(spec, state, K, mode);
      Real h = Real(detail::tail_step(b, eps) * step_scale);
      bool hit = false;
      if (state.t + h >= target) {
        h = target - state.t;
        hit = true;
      }
      std::vector<Real> y = detail::pack(state);
      detail::compensated_add(y, detail::bundle_increment(b, h), comp);
      state = detail::unpack(y, state.tau);
      if (hit) {
        state.t = target;
        comp.back() = Real(0);
      }
      state.tau = state.t;
      if (++steps >= 10'000'000) throw MaxStepsError("reference solution step cap reached");
    }
    out.push_back(state);
  }
  return out;
}

}  // namespace renorm

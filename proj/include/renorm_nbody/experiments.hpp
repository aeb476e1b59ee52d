#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "renorm_nbody/bounds.hpp"
#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/integrators.hpp"
#include "renorm_nbody/problems.hpp"
#include "renorm_nbody/renorm.hpp"
#include "renorm_nbody/series.hpp"

namespace renorm {

/// Knobs shared by the Taylor-driven experiments.
struct TaylorRunOptions {
  std::size_t order = 30;
  double dtau = 0.0;      // 0 -> beta / 2
  double tail_eps = 0.0;  // 0 -> 1e-2 * machine epsilon of the backend
  RadiusOptions radius{};
};

namespace detail {

template <class Real>
IntegratorConfig<Real> taylor_config(const TaylorRunOptions& o, double end) {
  IntegratorConfig<Real> cfg;
  cfg.mode = StepMode::taylor_const;
  cfg.order = o.order;
  cfg.dtau = o.dtau > 0.0 ? o.dtau : default_constants().beta / 2.0;
  cfg.tail_eps = o.tail_eps > 0.0 ? o.tail_eps : 1e-2 * static_cast<double>(epsilon_of<Real>());
  cfg.end_kind = EndKind::time;
  cfg.end = end;
  return cfg;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------- radius scan

struct ScanRow {
  double t;
  double tau;
  double rho;      // physical-time radius estimate
  double inv_L;    // 1 / L(q, v, lambda)
  double product;  // rho * L
};

/// Integrates with S1 constant-step Taylor and, at the start of every step
/// and at the end point, compares the physical-time radius estimate with 1/L.
template <class Real>
std::vector<ScanRow> radius_scan(const LoadedProblem<Real>& p, double lambda,
                                 const TaylorRunOptions& opt = {}) {
  std::vector<ScanRow> rows;
  auto sample = [&](const PhaseState<Real>& s) {
    const SeriesBundle<Real> b = taylor_coeffs(p.spec, s, opt.order, SeriesMode::physical());
    const double rho = radius_estimate(b, opt.radius);
    const double L = static_cast<double>(L_bound(p.spec, s.q, s.v, Real(lambda)).L);
    rows.push_back({static_cast<double>(s.t), static_cast<double>(s.tau), rho, 1.0 / L, rho * L});
  };
  IntegratorConfig<Real> cfg = detail::taylor_config<Real>(opt, static_cast<double>(p.T));
  cfg.on_step = [&](const StepInfo<Real>& si) { sample(si.state); };
  const Trajectory<Real> tr = integrate(p.spec, RenormChoice(RenormKind::S1), p.state, cfg);
  sample(tr.final_state());
  return rows;
}

// ---------------------------------------------------------------- strip width

struct StripWidth {
  double width;         // 2 * min rho-hat of the tau-bundle over the run
  double scaled_width;  // width * T / T_j
  double T_j;           // fictitious duration of the physical span
  double tau_at_min;
  std::size_t steps;
};

template <class Real>
StripWidth strip_width(const LoadedProblem<Real>& p, const RenormChoice& choice,
                       const TaylorRunOptions& opt = {}) {
  StripWidth out{};
  double rmin = std::numeric_limits<double>::infinity();
  IntegratorConfig<Real> cfg = detail::taylor_config<Real>(opt, static_cast<double>(p.T));
  cfg.on_step = [&](const StepInfo<Real>& si) {
    const double r = radius_estimate(*si.bundle, opt.radius);
    if (r < rmin) {
      rmin = r;
      out.tau_at_min = static_cast<double>(si.state.tau);
    }
  };
  const Trajectory<Real> tr = integrate(p.spec, choice, p.state, cfg);
  const PhaseState<Real>& fin = tr.final_state();
  out.T_j = static_cast<double>(fin.tau - p.state.tau);
  out.width = 2.0 * rmin;
  const double T = static_cast<double>(p.T - p.state.t);
  out.scaled_width = choice.kind == RenormKind::S0 ? out.width : out.width * T / out.T_j;
  out.steps = tr.accepted;
  return out;
}

// ---------------------------------------------------------------- comparison

struct ReportRow {
  std::string renorm;  // "adaptive" for the physical-time baseline
  double width = std::numeric_limits<double>::quiet_NaN();
  double scaled_width = std::numeric_limits<double>::quiet_NaN();
  double T_j = 0.0;
  double dtau = 0.0;
  double max_energy_error = 0.0;  // max_k |H_k - H_0| / |H_0|
  double final_position_error = 0.0;  // max over bodies at t = T
  double max_position_error = 0.0;    // max over bodies and samples
  double t_end = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double seconds = 0.0;
};

struct SampleErrors {
  double t;
  double tau;
  double energy_error;
  std::vector<double> position_error;  // one per body
};

struct CompareRun {
  ReportRow row;
  std::vector<SampleErrors> samples;
};

struct CompareOptions {
  double rtol = 1e-13;
  double atol = 1e-13;
  TaylorRunOptions taylor{};     // probe / strip-width runs
  double reference_eps = 0.0;    // tail tolerance of the reference; 0 -> default
  bool parallel = true;
  const ButcherTableau* tableau = nullptr;
};

struct CompareReport {
  CompareRun baseline;
  std::vector<CompareRun> runs;  // one per requested choice, same order
};

namespace detail {

// Oracle scalar: binary64 runs are judged in the extended backend when built.
template <class Real>
struct OracleOf {
  using type = Real;
};
#ifdef RENORM_NBODY_HAVE_EXTENDED
template <>
struct OracleOf<double> {
  using type = Extended;
};
#endif

template <class To, class Real>
std::vector<Vec3<To>> convert_vecs(const std::vector<Vec3<Real>>& xs) {
  std::vector<Vec3<To>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.emplace_back(To(x[0]), To(x[1]), To(x[2]));
  return out;
}

/// Fills energy and position errors of each run against one reference pass
/// over the union of all sample times.
template <class Real>
void fill_errors(const LoadedProblem<Real>& p, const std::vector<const Trajectory<Real>*>& trs,
                 double ref_eps, const std::vector<CompareRun*>& runs) {
  using O = typename OracleOf<Real>::type;
  using std::abs;
  const SystemSpec<O> spec = p.spec.template convert<O>();
  const PhaseState<O> s0 = p.state.template convert<O>();
  const O H0 = energies(spec, s0.q, s0.v).total;

  std::vector<O> times;
  for (const auto* tr : trs)
    for (const auto& s : tr->samples) times.push_back(O(s.t));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::vector<PhaseState<O>> ref = reference_solution(spec, s0, times, ref_eps);

  for (std::size_t r = 0; r < trs.size(); ++r) {
    const Trajectory<Real>& tr = *trs[r];
    CompareRun& run = *runs[r];
    run.samples.clear();
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
      const PhaseState<Real>& s = tr.samples[k];
      const auto idx = std::lower_bound(times.begin(), times.end(), O(s.t)) - times.begin();
      const PhaseState<O>& rs = ref[static_cast<std::size_t>(idx)];
      const std::vector<Vec3<O>> q = convert_vecs<O>(s.q);
      const std::vector<Vec3<O>> v = convert_vecs<O>(s.v);
      SampleErrors e;
      e.t = static_cast<double>(s.t);
      e.tau = static_cast<double>(s.tau);
      e.energy_error = static_cast<double>(abs((energies(spec, q, v).total - H0) / H0));
      double worst = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double d = static_cast<double>(norm(q[i] - rs.q[i]));
        e.position_error.push_back(d);
        worst = std::max(worst, d);
      }
      run.row.max_energy_error = std::max(run.row.max_energy_error, e.energy_error);
      run.row.max_position_error = std::max(run.row.max_position_error, worst);
      if (k + 1 == tr.samples.size()) run.row.final_position_error = worst;
      run.samples.push_back(std::move(e));
    }
    run.row.t_end = static_cast<double>(tr.final_state().t);
    run.row.steps = tr.accepted;
    run.row.rejected = tr.rejected;
  }
}

}  // namespace detail

/// Adaptive RK on physical time fixes the step budget n; each renormalization
/// then runs the same RK pair with constant dtau = T_j / n, where T_j comes
/// from a Taylor probe (which also yields the strip width). Energy and
/// position errors are measured against reference_solution, computed in the
/// extended backend when one is built.
template <class Real>
CompareReport compare(const LoadedProblem<Real>& p, const std::vector<RenormChoice>& choices,
                      const CompareOptions& opt = {}) {
  const double T = static_cast<double>(p.T);
  CompareReport rep;
  std::vector<Trajectory<Real>> trs(choices.size() + 1);
  {
    const auto t0 = std::chrono::steady_clock::now();
    IntegratorConfig<Real> cfg;
    cfg.mode = StepMode::rk_adaptive;
    cfg.rtol = opt.rtol;
    cfg.atol = opt.atol;
    cfg.tableau = opt.tableau;
    cfg.end = T;
    trs[0] = integrate(p.spec, RenormChoice(RenormKind::S0), p.state, cfg);
    rep.baseline.row.seconds = detail::seconds_since(t0);
    rep.baseline.row.renorm = "adaptive";
    rep.baseline.row.T_j = T - static_cast<double>(p.state.t);
  }
  const std::size_t n = trs[0].accepted;
  rep.runs.resize(choices.size());

  auto one = [&](std::size_t j) {
    const RenormChoice& choice = choices[j];
    ReportRow& row = rep.runs[j].row;
    row.renorm = std::string(to_string(choice.kind));
    const StripWidth sw = strip_width(p, choice, opt.taylor);
    row.width = sw.width;
    row.scaled_width = sw.scaled_width;
    row.T_j = sw.T_j;
    row.dtau = sw.T_j / static_cast<double>(n);
    const auto t0 = std::chrono::steady_clock::now();
    IntegratorConfig<Real> cfg;
    cfg.mode = StepMode::rk_const;
    cfg.dtau = row.dtau;
    cfg.tableau = opt.tableau;
    cfg.end = T;
    cfg.max_steps = 4 * n + 16;
    trs[j + 1] = integrate(p.spec, choice, p.state, cfg);
    row.seconds = detail::seconds_since(t0);
  };

  if (opt.parallel) {
    std::vector<std::future<void>> jobs;
    for (std::size_t j = 0; j < choices.size(); ++j)
      jobs.push_back(std::async(std::launch::async, one, j));
    for (auto& job : jobs) job.get();
  } else {
    for (std::size_t j = 0; j < choices.size(); ++j) one(j);
  }

  std::vector<const Trajectory<Real>*> tp;
  std::vector<CompareRun*> rp{&rep.baseline};
  for (const auto& tr : trs) tp.push_back(&tr);
  for (auto& r : rep.runs) rp.push_back(&r);
  detail::fill_errors(p, tp, opt.reference_eps, rp);
  return rep;
}

}  // namespace renorm

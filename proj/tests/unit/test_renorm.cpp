#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/integrators.hpp"
#include "renorm_nbody/renorm.hpp"

using namespace renorm;

namespace {

// Direct sums, written out independently of the fused kernel.
double oracle_s(RenormKind kind, const SystemSpec<double>& spec, const PhaseState<double>& s,
                double kappa = 1.0) {
  const std::size_t n = spec.size();
  std::vector<double> K(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) K[i] += spec.gm()[j] / dot(s.q[i] - s.q[j], s.q[i] - s.q[j]);
  double vel = 0, pot1 = 0, A = 0, B = 0, C = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = norm(s.q[i] - s.q[j]);
      const double w = norm(s.v[i] - s.v[j]);
      const double mu = spec.gm()[i] + spec.gm()[j];
      vel += w * w / (r * r);
      pot1 += (K[i] + K[j]) / r;
      A += 1 / r;
      B += mu / (r * r);
      C += mu / (r * r * r);
    }
  switch (kind) {
    case RenormKind::S0: return 1.0;
    case RenormKind::S1: return 1 / std::sqrt(vel + pot1);
    case RenormKind::S2: return 1 / std::sqrt(vel + A * B);
    case RenormKind::S3: return 1 / std::sqrt(kappa * vel + C);
    case RenormKind::S4: return 1 / std::sqrt(C);
  }
  return 0;
}

const RenormKind kAll[] = {RenormKind::S1, RenormKind::S2, RenormKind::S3, RenormKind::S4};

}  // namespace

TEST_SUITE("renorm") {
  TEST_CASE("unit two-body values") {
    const auto spec = th::unit_pair();
    const auto st = th::unit_pair_at_rest();
    CHECK(s_value(RenormChoice(RenormKind::S0), spec, st.q, st.v) == 1.0);
    CHECK(s_value(RenormChoice(RenormKind::S1), spec, st.q, st.v) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(s_value(RenormChoice(RenormKind::S4), spec, st.q, st.v) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    const auto d = renormalized_rhs(RenormChoice(RenormKind::S1), spec, st);
    CHECK(d.dq[0][0] == 0.0);
    CHECK(d.dv[0][0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(d.dv[1][0] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
    CHECK(d.dt == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  }

  TEST_CASE("s values match direct sums") {
    th::Random rng(3);
    for (int c = 0; c < 200; ++c) {
      const auto spec = rng.spec(2 + c % 4);
      const auto st = rng.state(spec.size());
      const double kappa = rng.uniform(0.2, 3.0);
      for (RenormKind k : kAll) {
        const double ref = oracle_s(k, spec, st, kappa);
        CHECK(s_value(RenormChoice(k, kappa), spec, st.q, st.v) ==
              doctest::Approx(ref).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("S2 <= S1, positivity, S4 velocity-free") {
    th::Random rng(5);
    for (int c = 0; c < 500; ++c) {
      const auto spec = rng.spec(3);
      auto st = rng.state(3);
      const double s1 = s_value(RenormChoice(RenormKind::S1), spec, st.q, st.v);
      const double s2 = s_value(RenormChoice(RenormKind::S2), spec, st.q, st.v);
      CHECK(s2 <= s1 * (1 + 1e-15));
      for (RenormKind k : kAll) CHECK(s_value(RenormChoice(k), spec, st.q, st.v) > 0.0);
      const double s4 = s_value(RenormChoice(RenormKind::S4), spec, st.q, st.v);
      for (auto& v : st.v) v = rng.vec(10.0);
      CHECK(s_value(RenormChoice(RenormKind::S4), spec, st.q, st.v) == s4);
    }
  }

  TEST_CASE("scale invariance") {
    th::Random rng(9);
    for (int c = 0; c < 100; ++c) {
      const auto spec = rng.spec(4);
      const auto st = rng.state(4);
      for (RenormKind k : kAll)
        for (double nu : {1e-3, 1e3}) {
          const auto sn = th::scaled(st, nu);
          const double a = s_value(RenormChoice(k), spec, sn.q, sn.v);
          const double b = s_value(RenormChoice(k), spec, st.q, st.v) / nu;
          CHECK(th::rel(a, b) <= 1e-12);
        }
    }
  }

  TEST_CASE("renormalized rhs factorizes as s * (physical rhs, 1)") {
    th::Random rng(13);
    for (int c = 0; c < 50; ++c) {
      const auto spec = rng.spec(3);
      const auto st = rng.state(3);
      const RenormChoice ch(RenormKind::S3, 1.7);
      const auto d = renormalized_rhs(ch, spec, st);
      const double s = s_value(ch, spec, st.q, st.v);
      const auto g = accelerations(spec, st.q);
      CHECK(d.dt == s);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(norm(d.dq[i] - s * st.v[i]) <= 1e-15 * norm(s * st.v[i]));
        CHECK(norm(d.dv[i] - s * g[i]) <= 1e-14 * norm(s * g[i]));
      }
      const auto d0 = renormalized_rhs(RenormChoice(RenormKind::S0), spec, st);
      CHECK(d0.dt == 1.0);
      for (std::size_t i = 0; i < 3; ++i) CHECK(norm(d0.dv[i] - g[i]) <= 1e-14 * norm(g[i]));
    }
  }

  TEST_CASE("time map consistency along a trajectory") {
    // dt/dtau from finite differences of the sampled (tau, t) pairs equals s at the midpoint.
    const SystemSpec<double> spec({1.0, 0.5, 0.2});
    PhaseState<double> st;
    st.q = {{0, 0, 0}, {1, 0, 0}, {0, 1.5, 0}};
    st.v = {{0, -0.1, 0}, {0, 0.8, 0}, {-0.6, 0, 0.1}};
    for (RenormKind k : kAll) {
      IntegratorConfig<double> cfg;
      cfg.dtau = 1e-3;
      cfg.order = 20;
      cfg.end_kind = EndKind::tau;
      cfg.end = 0.2;
      const auto tr = integrate(spec, RenormChoice(k), st, cfg);
      for (std::size_t i = 0; i + 2 < tr.samples.size(); i += 2) {
        const auto& a = tr.samples[i];
        const auto& m = tr.samples[i + 1];
        const auto& b = tr.samples[i + 2];
        CHECK(b.t > a.t);
        const double fd = (b.t - a.t) / (b.tau - a.tau);
        const double s = s_value(RenormChoice(k), spec, m.q, m.v);
        CHECK(std::abs(fd - s) <= 1e-5 * s);
      }
    }
  }

  TEST_CASE("names and parameters") {
    CHECK(to_string(RenormKind::S3) == "s3");
    CHECK(parse_renorm_kind("S2") == RenormKind::S2);
    CHECK(parse_renorm_kind("s0") == RenormKind::S0);
    CHECK_THROWS_AS(parse_renorm_kind("s5"), ParseError);
    CHECK_THROWS_AS(RenormChoice(RenormKind::S3, 0.0), InvariantError);
    CHECK(RenormChoice(RenormKind::S4).velocity_free());
    CHECK_FALSE(RenormChoice(RenormKind::S1).velocity_free());
  }

  TEST_CASE("collision propagates") {
    const std::vector<Vec3<double>> q{{0, 0, 0}, {0, 0, 0}};
    const std::vector<Vec3<double>> v(2);
    CHECK_THROWS_AS(s_value(RenormChoice(RenormKind::S1), th::unit_pair(), q, v), CollisionError);
  }
}

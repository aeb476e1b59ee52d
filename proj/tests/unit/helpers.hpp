#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "renorm_nbody/system.hpp"
#include "renorm_nbody/vec3.hpp"

namespace th {

using renorm::PhaseState;
using renorm::SystemSpec;
using renorm::Vec3;

inline SystemSpec<double> unit_pair() { return SystemSpec<double>({1.0, 1.0}); }

inline PhaseState<double> unit_pair_at_rest() {
  PhaseState<double> s;
  s.q = {{0, 0, 0}, {1, 0, 0}};
  s.v = {{0, 0, 0}, {0, 0, 0}};
  return s;
}

/// G = 1, m = (1/2, 1/2), separation 1: angular rate 1, period 2 pi.
inline SystemSpec<double> circular_spec() { return SystemSpec<double>({0.5, 0.5}); }

inline PhaseState<double> circular_at(double t) {
  const double c = std::cos(t), s = std::sin(t);
  PhaseState<double> st;
  st.q = {{-0.5 * c, -0.5 * s, 0}, {0.5 * c, 0.5 * s, 0}};
  st.v = {{0.5 * s, -0.5 * c, 0}, {-0.5 * s, 0.5 * c, 0}};
  st.t = t;
  st.tau = t;
  return st;
}

struct Random {
  std::mt19937_64 gen;
  explicit Random(unsigned long seed) : gen(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }

  Vec3<double> vec(double scale) {
    return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
  }

  SystemSpec<double> spec(std::size_t n) {
    std::vector<double> m;
    for (std::size_t i = 0; i < n; ++i) m.push_back(uniform(0.1, 5.0));
    return SystemSpec<double>(m, uniform(0.5, 2.0));
  }

  /// Bodies kept at least `min_sep` apart.
  PhaseState<double> state(std::size_t n, double min_sep = 0.05) {
    PhaseState<double> s;
    while (s.q.size() < n) {
      const Vec3<double> p = vec(2.0);
      bool ok = true;
      for (const auto& x : s.q) ok = ok && norm(x - p) > min_sep;
      if (ok) s.q.push_back(p);
    }
    for (std::size_t i = 0; i < n; ++i) s.v.push_back(vec(1.5));
    return s;
  }
};

inline PhaseState<double> scaled(const PhaseState<double>& s, double nu) {
  PhaseState<double> out = s;
  const double a = std::pow(nu, -2.0 / 3.0), b = std::pow(nu, 1.0 / 3.0);
  for (auto& x : out.q) x = x * a;
  for (auto& x : out.v) x = x * b;
  return out;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace th

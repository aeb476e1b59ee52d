#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/system.hpp"
#include "renorm_nbody/vec3.hpp"

namespace renorm {

/// Strict upper triangle of an N x N matrix, indexed by pairs i < j.
template <class T>
class PairMatrix {
 public:
  PairMatrix() = default;
  explicit PairMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * (n - 1) / 2, fill) {}

  std::size_t bodies() const { return n_; }
  std::size_t pairs() const { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

  const std::vector<T>& values() const { return data_; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    // rows 0..i-1 hold (n-1) + (n-2) + ... entries
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<T> data_;
};

namespace detail {

[[noreturn]] inline void throw_collision(std::size_t i, std::size_t j, double dist) {
  std::ostringstream msg;
  msg << "bodies " << i << " and " << j << " collide (separation " << dist << ")";
  throw CollisionError(msg.str());
}

/// Squared separation of a pair, rejecting collisions at or below `floor`.
template <class Real>
Real checked_r2(const std::vector<Vec3<Real>>& q, std::size_t i, std::size_t j,
                const Real& floor) {
  const Vec3<Real> d = q[i] - q[j];
  const Real r2 = dot(d, d);
  if (!(r2 > floor * floor)) {
    using std::sqrt;
    throw_collision(i, j, static_cast<double>(sqrt(r2)));
  }
  return r2;
}

}  // namespace detail

/// g_i(q) = sum_{j != i} G m_j (q_j - q_i) / |q_i - q_j|^3.
template <class Real>
std::vector<Vec3<Real>> accelerations(const SystemSpec<Real>& spec,
                                      const std::vector<Vec3<Real>>& q,
                                      const Real& collision_floor = Real(0)) {
  using std::sqrt;
  const std::size_t n = spec.size();
  const auto& gm = spec.gm();
  std::vector<Vec3<Real>> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real r2 = detail::checked_r2(q, i, j, collision_floor);
      const Real inv_r3 = Real(1) / (r2 * sqrt(r2));
      const Vec3<Real> d = q[j] - q[i];
      g[i] += d * (gm[j] * inv_r3);
      g[j] -= d * (gm[i] * inv_r3);
    }
  }
  return g;
}

/// K_i(q) = sum_{j != i} G m_j / |q_i - q_j|^2, the bound multiplier of |g_i|.
template <class Real>
std::vector<Real> pairwise_K(const SystemSpec<Real>& spec, const std::vector<Vec3<Real>>& q,
                             const Real& collision_floor = Real(0)) {
  const std::size_t n = spec.size();
  const auto& gm = spec.gm();
  std::vector<Real> K(n, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real inv_r2 = Real(1) / detail::checked_r2(q, i, j, collision_floor);
      K[i] += gm[j] * inv_r2;
      K[j] += gm[i] * inv_r2;
    }
  }
  return K;
}

template <class Real>
struct Energies {
  Real kinetic;
  Real potential;  // U = sum G m_i m_j / r_ij, so H = T - U
  Real total;
};

template <class Real>
Energies<Real> energies(const SystemSpec<Real>& spec, const std::vector<Vec3<Real>>& q,
                        const std::vector<Vec3<Real>>& v) {
  using std::sqrt;
  const std::size_t n = spec.size();
  const auto& m = spec.masses();
  const auto& gm = spec.gm();
  Real T(0), U(0);
  for (std::size_t i = 0; i < n; ++i) T += m[i] * dot(v[i], v[i]);
  T /= Real(2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      U += gm[i] * m[j] / sqrt(detail::checked_r2(q, i, j, Real(0)));
  return {T, U, T - U};
}

template <class Real>
struct Separation {
  Real distance;
  std::size_t i;
  std::size_t j;
};

/// Minimum pairwise distance; ties go to the lexicographically first pair.
template <class Real>
Separation<Real> min_separation(const std::vector<Vec3<Real>>& q) {
  using std::sqrt;
  Separation<Real> best{std::numeric_limits<Real>::infinity(), 0, 1};
  Real best_r2 = std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      const Vec3<Real> d = q[i] - q[j];
      const Real r2 = dot(d, d);
      if (r2 < best_r2) {
        best_r2 = r2;
        best = {sqrt(r2), i, j};
      }
    }
  }
  return best;
}

template <class Real>
Vec3<Real> total_momentum(const SystemSpec<Real>& spec, const std::vector<Vec3<Real>>& v) {
  Vec3<Real> p;
  for (std::size_t i = 0; i < spec.size(); ++i) p += v[i] * spec.masses()[i];
  return p;
}

}  // namespace renorm

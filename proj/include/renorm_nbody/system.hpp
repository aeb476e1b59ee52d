#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/scalar.hpp"
#include "renorm_nbody/vec3.hpp"

namespace renorm {

/// Masses and gravitational constant of one N-body system.
///
/// The gravitational parameters gm_i are stored alongside the masses. When a
/// system is built from gm values (ephemeris style) those are kept verbatim
/// and the masses are derived as gm_i / G.
template <class Real>
class SystemSpec {
 public:
  SystemSpec(std::vector<Real> masses, Real grav_const = Real(1),
             std::vector<std::string> labels = {})
      : G_(grav_const), masses_(std::move(masses)), labels_(std::move(labels)) {
    gm_.reserve(masses_.size());
    for (const auto& m : masses_) gm_.push_back(G_ * m);
    validate();
  }

  static SystemSpec from_gm(std::vector<Real> gm, Real grav_const = Real(1),
                            std::vector<std::string> labels = {}) {
    std::vector<Real> masses;
    masses.reserve(gm.size());
    for (const auto& g : gm) masses.push_back(g / grav_const);
    SystemSpec spec(std::move(masses), grav_const, std::move(labels));
    spec.gm_ = std::move(gm);
    return spec;
  }

  std::size_t size() const { return masses_.size(); }
  const Real& G() const { return G_; }
  const std::vector<Real>& masses() const { return masses_; }
  const std::vector<Real>& gm() const { return gm_; }
  const std::vector<std::string>& labels() const { return labels_; }

  template <class To>
  SystemSpec<To> convert() const {
    std::vector<To> gm;
    for (const auto& g : gm_) gm.push_back(static_cast<To>(g));
    return SystemSpec<To>::from_gm(std::move(gm), static_cast<To>(G_), labels_);
  }

 private:
  void validate() const {
    if (masses_.size() < 2) throw InvariantError("a system needs at least two bodies");
    if (!(G_ > Real(0))) throw InvariantError("gravitational constant must be positive");
    for (std::size_t i = 0; i < masses_.size(); ++i)
      if (!(masses_[i] > Real(0)))
        throw InvariantError("mass of body " + std::to_string(i) + " must be positive");
    if (!labels_.empty() && labels_.size() != masses_.size())
      throw InvariantError("label count does not match body count");
  }

  Real G_;
  std::vector<Real> masses_;
  std::vector<Real> gm_;
  std::vector<std::string> labels_;
};

/// Positions, velocities, physical time t and fictitious time tau.
template <class Real>
struct PhaseState {
  std::vector<Vec3<Real>> q;
  std::vector<Vec3<Real>> v;
  Real t{0};
  Real tau{0};

  std::size_t size() const { return q.size(); }

  template <class To>
  PhaseState<To> convert() const {
    PhaseState<To> out;
    out.q.reserve(q.size());
    out.v.reserve(v.size());
    for (const auto& p : q)
      out.q.emplace_back(static_cast<To>(p[0]), static_cast<To>(p[1]), static_cast<To>(p[2]));
    for (const auto& p : v)
      out.v.emplace_back(static_cast<To>(p[0]), static_cast<To>(p[1]), static_cast<To>(p[2]));
    out.t = static_cast<To>(t);
    out.tau = static_cast<To>(tau);
    return out;
  }
};

template <class Real>
void check_shape(const SystemSpec<Real>& spec, const PhaseState<Real>& state) {
  if (state.q.size() != spec.size() || state.v.size() != spec.size())
    throw InvariantError("state has " + std::to_string(state.q.size()) + " positions and " +
                         std::to_string(state.v.size()) + " velocities for " +
                         std::to_string(spec.size()) + " bodies");
}

}  // namespace renorm

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/system.hpp"

namespace renorm {

struct BodyRecord {
  std::string label;
  std::optional<double> mass;  // exactly one of mass / gm
  std::optional<double> gm;
  std::array<double, 3> q{};
  std::array<double, 3> v{};

  friend bool operator==(const BodyRecord&, const BodyRecord&) = default;
};

/// On-disk problem description (JSON).
struct ProblemFile {
  std::string name;
  double G = 1.0;
  std::string units;
  std::array<double, 2> t_span{0.0, 1.0};
  std::vector<BodyRecord> bodies;

  double duration() const { return t_span[1] - t_span[0]; }

  /// Throws InvariantError on violated invariants (body count, masses,
  /// mixed mass/gm, coincident bodies, empty span).
  void validate() const;

  friend bool operator==(const ProblemFile&, const ProblemFile&) = default;
};

ProblemFile parse_problem(const std::string& json_text, const std::string& source = "<memory>");
ProblemFile load_problem_file(const std::string& path);
std::string dump_problem(const ProblemFile& pf);
void save_problem(const ProblemFile& pf, const std::string& path);

/// G m = (5, 4, 3) at the corners of a 3:4:5 triangle, at rest, t in [0, 63].
ProblemFile gen_pythagorean();

/// An e = 0.9, a = 10 binary at pericenter (masses 2 and 1) with a light
/// third body crossing the binary's barycenter perpendicular to the orbit
/// plane at `speed`. Barycentric frame, t in [0, 1].
ProblemFile gen_binary_visitor(double speed = 100.0);

template <class Real>
struct LoadedProblem {
  SystemSpec<Real> spec;
  PhaseState<Real> state;
  Real T;  // end of the time span
};

template <class Real>
LoadedProblem<Real> materialize(const ProblemFile& pf) {
  pf.validate();
  const bool by_gm = pf.bodies.front().gm.has_value();
  std::vector<Real> values;
  std::vector<std::string> labels;
  PhaseState<Real> state;
  for (const auto& b : pf.bodies) {
    values.push_back(static_cast<Real>(by_gm ? *b.gm : *b.mass));
    labels.push_back(b.label);
    state.q.emplace_back(Real(b.q[0]), Real(b.q[1]), Real(b.q[2]));
    state.v.emplace_back(Real(b.v[0]), Real(b.v[1]), Real(b.v[2]));
  }
  state.t = static_cast<Real>(pf.t_span[0]);
  state.tau = Real(0);
  const Real G = static_cast<Real>(pf.G);
  SystemSpec<Real> spec = by_gm ? SystemSpec<Real>::from_gm(std::move(values), G, labels)
                                : SystemSpec<Real>(std::move(values), G, labels);
  return {std::move(spec), std::move(state), static_cast<Real>(pf.t_span[1])};
}

/// load_problem_file + materialize.
template <class Real>
LoadedProblem<Real> load_problem(const std::string& path) {
  return materialize<Real>(load_problem_file(path));
}

}  // namespace renorm

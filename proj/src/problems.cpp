#include "renorm_nbody/problems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "renorm_nbody/errors.hpp"

namespace renorm {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& source, const std::string& field,
                              const std::string& msg) {
  throw ParseError(source + ": field '" + field + "': " + msg);
}

double number_at(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_number()) field_error(source, field, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) field_error(source, field, "not finite");
  return x;
}

std::array<double, 3> vec3_at(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_array() || j.size() != 3) field_error(source, field, "expected [x, y, z]");
  std::array<double, 3> out{};
  for (std::size_t d = 0; d < 3; ++d)
    out[d] = number_at(j[d], source, field + "[" + std::to_string(d) + "]");
  return out;
}

const json& member(const json& obj, const char* key, const std::string& source,
                   const std::string& prefix) {
  const auto it = obj.find(key);
  if (it == obj.end()) field_error(source, prefix + key, "missing");
  return *it;
}

}  // namespace

void ProblemFile::validate() const {
  if (bodies.size() < 2) throw InvariantError("a problem needs at least two bodies");
  if (!(G > 0.0)) throw InvariantError("G must be positive");
  if (!(t_span[1] > t_span[0])) throw InvariantError("t_span must be increasing");
  const bool by_gm = bodies.front().gm.has_value();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& b = bodies[i];
    if (b.mass.has_value() == b.gm.has_value())
      throw InvariantError("body " + std::to_string(i) + " must give exactly one of mass, gm");
    if (b.gm.has_value() != by_gm)
      throw InvariantError("mixing mass and gm within one file is not allowed");
    const double m = by_gm ? *b.gm : *b.mass;
    if (!(m > 0.0)) throw InvariantError("body " + std::to_string(i) + " has non-positive mass");
  }
  for (std::size_t i = 0; i < bodies.size(); ++i)
    for (std::size_t j = i + 1; j < bodies.size(); ++j)
      if (bodies[i].q == bodies[j].q)
        throw InvariantError("bodies " + std::to_string(i) + " and " + std::to_string(j) +
                             " coincide");
}

ProblemFile parse_problem(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");

  ProblemFile pf;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) field_error(source, "name", "expected a string");
    pf.name = it->get<std::string>();
  }
  if (auto it = doc.find("units"); it != doc.end()) {
    if (!it->is_string()) field_error(source, "units", "expected a string");
    pf.units = it->get<std::string>();
  }
  if (auto it = doc.find("G"); it != doc.end()) pf.G = number_at(*it, source, "G");
  const json& span = member(doc, "t_span", source, "");
  if (!span.is_array() || span.size() != 2) field_error(source, "t_span", "expected [t0, T]");
  pf.t_span = {number_at(span[0], source, "t_span[0]"), number_at(span[1], source, "t_span[1]")};

  const json& bodies = member(doc, "bodies", source, "");
  if (!bodies.is_array()) field_error(source, "bodies", "expected an array");
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::string prefix = "bodies[" + std::to_string(i) + "].";
    const json& b = bodies[i];
    if (!b.is_object()) field_error(source, prefix.substr(0, prefix.size() - 1), "expected an object");
    BodyRecord rec;
    if (auto it = b.find("label"); it != b.end()) {
      if (!it->is_string()) field_error(source, prefix + "label", "expected a string");
      rec.label = it->get<std::string>();
    }
    if (auto it = b.find("mass"); it != b.end()) rec.mass = number_at(*it, source, prefix + "mass");
    if (auto it = b.find("gm"); it != b.end()) rec.gm = number_at(*it, source, prefix + "gm");
    rec.q = vec3_at(member(b, "q", source, prefix), source, prefix + "q");
    rec.v = vec3_at(member(b, "v", source, prefix), source, prefix + "v");
    pf.bodies.push_back(std::move(rec));
  }
  pf.validate();
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

std::string dump_problem(const ProblemFile& pf) {
  json doc;
  doc["name"] = pf.name;
  doc["units"] = pf.units;
  doc["G"] = pf.G;
  doc["t_span"] = {pf.t_span[0], pf.t_span[1]};
  doc["bodies"] = json::array();
  for (const auto& b : pf.bodies) {
    json jb;
    jb["label"] = b.label;
    if (b.mass) jb["mass"] = *b.mass;
    if (b.gm) jb["gm"] = *b.gm;
    jb["q"] = b.q;
    jb["v"] = b.v;
    doc["bodies"].push_back(std::move(jb));
  }
  return doc.dump(2) + "\n";
}

void save_problem(const ProblemFile& pf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write problem file '" + path + "'");
  out << dump_problem(pf);
}

ProblemFile gen_pythagorean() {
  ProblemFile pf;
  pf.name = "pythagorean";
  pf.units = "G = 1";
  pf.G = 1.0;
  pf.t_span = {0.0, 63.0};
  pf.bodies = {
      {"m5", 5.0, std::nullopt, {1.0, -1.0, 0.0}, {0.0, 0.0, 0.0}},
      {"m4", 4.0, std::nullopt, {-2.0, -1.0, 0.0}, {0.0, 0.0, 0.0}},
      {"m3", 3.0, std::nullopt, {1.0, 3.0, 0.0}, {0.0, 0.0, 0.0}},
  };
  return pf;
}

ProblemFile gen_binary_visitor(double speed) {
  if (!(speed > 0.0)) throw InvariantError("visitor speed must be positive");
  const double m1 = 2.0, m2 = 1.0, m3 = 0.02;
  const double a = 10.0, e = 0.9;
  const double mu = m1 + m2;
  const double rp = a * (1.0 - e);
  const double vrel = std::sqrt(mu * (1.0 + e) / rp);

  std::array<std::array<double, 3>, 3> v{{
      {0.0, -vrel * m2 / mu, 0.0},
      {0.0, vrel * m1 / mu, 0.0},
      {0.0, 0.0, speed},
  }};
  const double M = m1 + m2 + m3;
  const double masses[3] = {m1, m2, m3};
  std::array<double, 3> vcm{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t d = 0; d < 3; ++d) vcm[d] += masses[i] * v[i][d] / M;
  for (auto& vi : v)
    for (std::size_t d = 0; d < 3; ++d) vi[d] -= vcm[d];

  ProblemFile pf;
  pf.name = "binary-visitor";
  pf.units = "G = 1";
  pf.G = 1.0;
  pf.t_span = {0.0, 1.0};
  pf.bodies = {
      {"primary", m1, std::nullopt, {-rp * m2 / mu, 0.0, 0.0}, v[0]},
      {"secondary", m2, std::nullopt, {rp * m1 / mu, 0.0, 0.0}, v[1]},
      {"visitor", m3, std::nullopt, {0.0, 0.0, 0.0}, v[2]},
  };
  return pf;
}

}  // namespace renorm

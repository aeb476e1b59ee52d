#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "renorm_nbody/bounds.hpp"
#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/experiments.hpp"
#include "renorm_nbody/integrators.hpp"
#include "renorm_nbody/problems.hpp"
#include "renorm_nbody/renorm.hpp"
#include "renorm_nbody/series.hpp"

namespace py = pybind11;
using namespace renorm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3<double>> to_vecs(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw InvariantError("expected an (n, 3) array");
  std::vector<Vec3<double>> out;
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.emplace_back(r(i, 0), r(i, 1), r(i, 2));
  return out;
}

Array from_vecs(const std::vector<Vec3<double>>& v) {
  Array a({static_cast<py::ssize_t>(v.size()), py::ssize_t(3)});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d) w(i, d) = v[i][d];
  return a;
}

SystemSpec<double> make_spec(const std::vector<double>& masses, double G) {
  return SystemSpec<double>(masses, G);
}

RenormChoice choice_of(const std::string& name, double kappa) {
  return RenormChoice(parse_renorm_kind(name), kappa);
}

struct PyProblem {
  ProblemFile file;
  LoadedProblem<double> loaded;

  explicit PyProblem(ProblemFile pf) : file(std::move(pf)), loaded(materialize<double>(file)) {}
};

py::dict row_dict(const ReportRow& r) {
  py::dict d;
  d["renorm"] = r.renorm;
  d["width"] = r.width;
  d["scaled_width"] = r.scaled_width;
  d["T_j"] = r.T_j;
  d["dtau"] = r.dtau;
  d["max_energy_error"] = r.max_energy_error;
  d["final_position_error"] = r.final_position_error;
  d["max_position_error"] = r.max_position_error;
  d["t_end"] = r.t_end;
  d["steps"] = r.steps;
  d["rejected"] = r.rejected;
  d["seconds"] = r.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of renorm_nbody";

  static py::exception<Error> base(m, "Error");
  py::register_exception<CollisionError>(m, "CollisionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<EstimateError>(m, "EstimateError", base.ptr());
  py::register_exception<MaxStepsError>(m, "MaxStepsError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());

  m.def("constants", [](double tol) {
    const ConstantsReport c = compute_constants(tol);
    py::dict d;
    d["lambda0"] = c.lambda0;
    d["lambda_star"] = c.lambda_star;
    d["lambda_max"] = c.lambda_max;
    d["beta"] = c.beta;
    return d;
  }, py::arg("tol") = 1e-10);

  m.def("eta", [](double l) { return eta(l); });
  m.def("aux_lambda_functions", [](double l) {
    const auto a = aux_lambda_functions(l);
    py::dict d;
    d["alpha"] = a.alpha;
    d["beta_lemma"] = a.beta_lemma;
    d["gamma"] = a.gamma;
    d["nu"] = a.nu;
    d["xi"] = a.xi;
    d["mu"] = a.mu;
    d["delta"] = a.delta;
    return d;
  });
  m.def("conformal_map", &conformal_map, py::arg("tau"), py::arg("beta"));
  m.def("conformal_map_inverse", &conformal_map_inverse, py::arg("sigma"), py::arg("beta"));

  m.def("s_value",
        [](const std::string& renorm, const std::vector<double>& masses, const Array& q, const Array& v,
           double G, double kappa) {
          return s_value(choice_of(renorm, kappa), make_spec(masses, G), to_vecs(q), to_vecs(v));
        },
        py::arg("renorm"), py::arg("masses"), py::arg("q"), py::arg("v"), py::arg("G") = 1.0,
        py::arg("kappa") = 1.0);

  m.def("L_bound",
        [](const std::vector<double>& masses, const Array& q, const Array& v, double lam, double G) {
          return L_bound(make_spec(masses, G), to_vecs(q), to_vecs(v), lam).L;
        },
        py::arg("masses"), py::arg("q"), py::arg("v"), py::arg("lam"), py::arg("G") = 1.0);

  m.def("taylor_coeffs",
        [](const std::vector<double>& masses, const Array& q, const Array& v, std::size_t order,
           double G) {
          PhaseState<double> st;
          st.q = to_vecs(q);
          st.v = to_vecs(v);
          const auto b = taylor_coeffs(make_spec(masses, G), st, order);
          Array cq({static_cast<py::ssize_t>(b.q.size()), static_cast<py::ssize_t>(order + 1)});
          Array cv({static_cast<py::ssize_t>(b.v.size()), static_cast<py::ssize_t>(order + 1)});
          auto wq = cq.mutable_unchecked<2>();
          auto wv = cv.mutable_unchecked<2>();
          for (std::size_t c = 0; c < b.q.size(); ++c)
            for (std::size_t k = 0; k <= order; ++k) {
              wq(c, k) = b.q[c][k];
              wv(c, k) = b.v[c][k];
            }
          return py::make_tuple(cq, cv);
        },
        py::arg("masses"), py::arg("q"), py::arg("v"), py::arg("order") = 30, py::arg("G") = 1.0,
        "Physical-time Taylor coefficients; rows are components 3*i + d.");

  m.def("radius_estimate",
        [](const std::vector<double>& masses, const Array& q, const Array& v, std::size_t order,
           double G) {
          PhaseState<double> st;
          st.q = to_vecs(q);
          st.v = to_vecs(v);
          return radius_estimate(taylor_coeffs(make_spec(masses, G), st, order));
        },
        py::arg("masses"), py::arg("q"), py::arg("v"), py::arg("order") = 30, py::arg("G") = 1.0);

  py::class_<PyProblem>(m, "Problem")
      .def_property_readonly("name", [](const PyProblem& p) { return p.file.name; })
      .def_property_readonly("t_span", [](const PyProblem& p) { return p.file.t_span; })
      .def_property_readonly("G", [](const PyProblem& p) { return p.file.G; })
      .def_property_readonly("masses", [](const PyProblem& p) { return p.loaded.spec.masses(); })
      .def_property_readonly("gm", [](const PyProblem& p) { return p.loaded.spec.gm(); })
      .def_property_readonly("q", [](const PyProblem& p) { return from_vecs(p.loaded.state.q); })
      .def_property_readonly("v", [](const PyProblem& p) { return from_vecs(p.loaded.state.v); })
      .def("to_json", [](const PyProblem& p) { return dump_problem(p.file); })
      .def("save", [](const PyProblem& p, const std::string& path) { save_problem(p.file, path); });

  m.def("gen_pythagorean", [] { return PyProblem(gen_pythagorean()); });
  m.def("gen_binary_visitor", [](double speed) { return PyProblem(gen_binary_visitor(speed)); },
        py::arg("speed") = 100.0);
  m.def("load_problem", [](const std::string& path) { return PyProblem(load_problem_file(path)); });
  m.def("parse_problem", [](const std::string& text) { return PyProblem(parse_problem(text)); });

  m.def("integrate",
        [](const PyProblem& p, const std::string& renorm, const std::string& mode, double dtau,
           std::size_t order, double rtol, double atol, double end, std::size_t stride, double kappa) {
          IntegratorConfig<double> cfg;
          if (mode == "taylor") cfg.mode = StepMode::taylor_const;
          else if (mode == "rk") cfg.mode = StepMode::rk_const;
          else if (mode == "adaptive") cfg.mode = StepMode::rk_adaptive;
          else throw ParseError("mode must be taylor, rk or adaptive");
          cfg.dtau = dtau;
          cfg.order = order;
          cfg.rtol = rtol;
          cfg.atol = atol;
          cfg.end = end > 0 ? end : static_cast<double>(p.loaded.T);
          cfg.stride = stride;
          Trajectory<double> tr;
          {
            py::gil_scoped_release nogil;
            tr = integrate(p.loaded.spec, choice_of(renorm, kappa), p.loaded.state, cfg);
          }
          const std::size_t S = tr.samples.size(), n = p.loaded.spec.size();
          py::array_t<double> t(static_cast<py::ssize_t>(S)), tau(static_cast<py::ssize_t>(S)),
              energy(static_cast<py::ssize_t>(S));
          py::array_t<double> q({static_cast<py::ssize_t>(S), static_cast<py::ssize_t>(n), py::ssize_t(3)});
          py::array_t<double> v({static_cast<py::ssize_t>(S), static_cast<py::ssize_t>(n), py::ssize_t(3)});
          auto wt = t.mutable_unchecked<1>();
          auto wtau = tau.mutable_unchecked<1>();
          auto we = energy.mutable_unchecked<1>();
          auto wq = q.mutable_unchecked<3>();
          auto wv = v.mutable_unchecked<3>();
          for (std::size_t s = 0; s < S; ++s) {
            const auto& st = tr.samples[s];
            wt(s) = st.t;
            wtau(s) = st.tau;
            we(s) = energies(p.loaded.spec, st.q, st.v).total;
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t d = 0; d < 3; ++d) {
                wq(s, i, d) = st.q[i][d];
                wv(s, i, d) = st.v[i][d];
              }
          }
          py::dict out;
          out["t"] = t;
          out["tau"] = tau;
          out["energy"] = energy;
          out["q"] = q;
          out["v"] = v;
          out["accepted"] = tr.accepted;
          out["rejected"] = tr.rejected;
          return out;
        },
        py::arg("problem"), py::arg("renorm") = "s1", py::arg("mode") = "taylor",
        py::arg("dtau") = 0.02, py::arg("order") = 30, py::arg("rtol") = 1e-12,
        py::arg("atol") = 1e-12, py::arg("end") = 0.0, py::arg("stride") = 1,
        py::arg("kappa") = 1.0);

  m.def("strip_width",
        [](const PyProblem& p, const std::string& renorm, double kappa, std::size_t order) {
          TaylorRunOptions opt;
          opt.order = order;
          StripWidth w;
          {
            py::gil_scoped_release nogil;
            w = strip_width(p.loaded, choice_of(renorm, kappa), opt);
          }
          py::dict d;
          d["width"] = w.width;
          d["scaled_width"] = w.scaled_width;
          d["T_j"] = w.T_j;
          d["tau_at_min"] = w.tau_at_min;
          d["steps"] = w.steps;
          return d;
        },
        py::arg("problem"), py::arg("renorm"), py::arg("kappa") = 1.0, py::arg("order") = 30);

  m.def("radius_scan",
        [](const PyProblem& p, double lam) {
          std::vector<ScanRow> rows;
          {
            py::gil_scoped_release nogil;
            rows = radius_scan(p.loaded, lam > 0 ? lam : default_constants().lambda0);
          }
          py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t(5)});
          auto w = out.mutable_unchecked<2>();
          for (std::size_t i = 0; i < rows.size(); ++i) {
            w(i, 0) = rows[i].t;
            w(i, 1) = rows[i].tau;
            w(i, 2) = rows[i].rho;
            w(i, 3) = rows[i].inv_L;
            w(i, 4) = rows[i].product;
          }
          return out;
        },
        py::arg("problem"), py::arg("lam") = 0.0, "Columns: t, tau, rho, 1/L, rho*L.");

  m.def("compare",
        [](const PyProblem& p, const std::vector<std::string>& renorms, double rtol, double atol,
           double kappa) {
          std::vector<RenormChoice> choices;
          for (const auto& r : renorms) choices.push_back(choice_of(r, kappa));
          CompareOptions opt;
          opt.rtol = rtol;
          opt.atol = atol;
          CompareReport rep;
          {
            py::gil_scoped_release nogil;
            rep = compare(p.loaded, choices, opt);
          }
          py::list rows;
          rows.append(row_dict(rep.baseline.row));
          for (const auto& r : rep.runs) rows.append(row_dict(r.row));
          return rows;
        },
        py::arg("problem"), py::arg("renorms") = std::vector<std::string>{"s1", "s2", "s3", "s4"},
        py::arg("rtol") = 1e-13, py::arg("atol") = 1e-13, py::arg("kappa") = 1.0);
}

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "renorm_nbody/bounds.hpp"
#include "renorm_nbody/csv.hpp"
#include "renorm_nbody/dynamics.hpp"
#include "renorm_nbody/errors.hpp"
#include "renorm_nbody/experiments.hpp"
#include "renorm_nbody/integrators.hpp"
#include "renorm_nbody/problems.hpp"
#include "renorm_nbody/scalar.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace renorm;

namespace {

enum class Precision { f64, extended };

Precision precision_from_env() {
  const char* env = std::getenv("RENORM_NBODY_PRECISION");
  if (!env || std::string(env).empty() || std::string(env) == "f64") return Precision::f64;
  if (std::string(env) == "extended") {
    if (!kHaveExtended)
      throw InvariantError("RENORM_NBODY_PRECISION=extended but this build has no extended backend");
    return Precision::extended;
  }
  throw ParseError("RENORM_NBODY_PRECISION must be 'f64' or 'extended', got '" + std::string(env) +
                   "'");
}

template <class F>
void dispatch(F&& f) {
  if (precision_from_env() == Precision::f64) {
    f(double{});
    return;
  }
#ifdef RENORM_NBODY_HAVE_EXTENDED
  f(Extended{});
#endif
}

std::ofstream open_out(const std::string& path) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

RenormChoice make_choice(const std::string& name, double kappa) {
  return RenormChoice(parse_renorm_kind(name), kappa);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

json row_json(const ReportRow& r) {
  return {{"renorm", r.renorm},
          {"strip_width", r.width},
          {"scaled_width", r.scaled_width},
          {"T_j", r.T_j},
          {"dtau", r.dtau},
          {"max_energy_error", r.max_energy_error},
          {"final_position_error", r.final_position_error},
          {"max_position_error", r.max_position_error},
          {"t_end", r.t_end},
          {"steps", r.steps},
          {"rejected", r.rejected},
          {"seconds", r.seconds}};
}

// ------------------------------------------------------------------ commands

struct ConstantsArgs {
  double tol = 1e-10;
};

void cmd_constants(const ConstantsArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConstantsReport c = compute_constants(a.tol);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json out = {{"lambda0", c.lambda0},
                    {"lambda0_residual", c.lambda0_residual},
                    {"lambda_star", c.lambda_star},
                    {"lambda_star_residual", c.lambda_star_residual},
                    {"lambda_max", c.lambda_max},
                    {"lambda_max_bracket", c.lambda_max_bracket},
                    {"beta", c.beta},
                    {"two_beta", 2.0 * c.beta},
                    {"tolerance", c.tolerance},
                    {"seconds", secs}};
  std::cout << out.dump(2) << "\n";
}

struct IntegrateArgs {
  std::string problem, out, renorm = "s1", mode = "taylor";
  double kappa = 1.0;
  std::optional<double> dtau, rtol, atol;
  std::size_t order = 30;
  std::size_t stride = 1;
};

template <class Real>
void run_integrate(const IntegrateArgs& a) {
  const LoadedProblem<Real> p = load_problem<Real>(a.problem);
  const RenormChoice choice = make_choice(a.renorm, a.kappa);
  IntegratorConfig<Real> cfg;
  cfg.end = static_cast<double>(p.T);
  cfg.order = a.order;
  cfg.stride = a.stride;
  if (a.mode == "taylor") {
    if (!a.dtau) throw InvariantError("--mode taylor needs --dtau");
    cfg.mode = StepMode::taylor_const;
    cfg.dtau = *a.dtau;
  } else if (a.mode == "rk") {
    if (a.dtau && (a.rtol || a.atol))
      throw InvariantError("give either --dtau (constant step) or --rtol/--atol (adaptive)");
    if (a.dtau) {
      cfg.mode = StepMode::rk_const;
      cfg.dtau = *a.dtau;
    } else {
      cfg.mode = StepMode::rk_adaptive;
      cfg.rtol = a.rtol.value_or(1e-12);
      cfg.atol = a.atol.value_or(cfg.rtol);
    }
  } else {
    throw ParseError("--mode must be 'taylor' or 'rk'");
  }
  const Trajectory<Real> tr = integrate(p.spec, choice, p.state, cfg);
  const Real H0 = energies(p.spec, p.state.q, p.state.v).total;

  std::vector<std::string> header{"t", "tau", "energy", "energy_rel_err"};
  const auto& labels = p.spec.labels();
  for (std::size_t i = 0; i < p.spec.size(); ++i) {
    const std::string tag = labels.empty() || labels[i].empty() ? std::to_string(i) : labels[i];
    for (const char* c : {"x", "y", "z"}) header.push_back("q_" + tag + "_" + c);
    for (const char* c : {"x", "y", "z"}) header.push_back("v_" + tag + "_" + c);
  }
  std::ofstream out = open_out(a.out);
  CsvWriter csv(out, header);
  for (const auto& s : tr.samples) {
    using std::abs;
    const Real H = energies(p.spec, s.q, s.v).total;
    std::vector<double> row{static_cast<double>(s.t), static_cast<double>(s.tau),
                            static_cast<double>(H), static_cast<double>(abs((H - H0) / H0))};
    for (std::size_t i = 0; i < s.q.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) row.push_back(static_cast<double>(s.q[i][d]));
      for (std::size_t d = 0; d < 3; ++d) row.push_back(static_cast<double>(s.v[i][d]));
    }
    csv.row(row);
  }
  std::cerr << "accepted " << tr.accepted << ", rejected " << tr.rejected << ", warnings "
            << tr.warnings << "\n";
}

struct ScanArgs {
  std::string problem, out;
  std::optional<double> lambda, dtau;
  std::size_t order = 30;
};

template <class Real>
void run_scan(const ScanArgs& a) {
  const LoadedProblem<Real> p = load_problem<Real>(a.problem);
  TaylorRunOptions opt;
  opt.order = a.order;
  opt.dtau = a.dtau.value_or(0.0);
  const double lambda = a.lambda.value_or(default_constants().lambda0);
  const std::vector<ScanRow> rows = radius_scan(p, lambda, opt);
  std::ofstream out = open_out(a.out);
  CsvWriter csv(out, {"t", "tau", "rho", "inv_L", "product"});
  double lo = HUGE_VAL, hi = 0.0;
  for (const auto& r : rows) {
    csv.row({r.t, r.tau, r.rho, r.inv_L, r.product});
    lo = std::min(lo, r.product);
    hi = std::max(hi, r.product);
  }
  std::cerr << rows.size() << " samples, rho*L in [" << lo << ", " << hi << "]\n";
}

struct StripArgs {
  std::string problem, out, renorm = "s1";
  double kappa = 1.0;
  std::optional<double> dtau;
  std::size_t order = 30;
};

template <class Real>
void run_strip(const StripArgs& a) {
  const LoadedProblem<Real> p = load_problem<Real>(a.problem);
  TaylorRunOptions opt;
  opt.order = a.order;
  opt.dtau = a.dtau.value_or(0.0);
  const auto t0 = std::chrono::steady_clock::now();
  const StripWidth w = strip_width(p, make_choice(a.renorm, a.kappa), opt);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json out = {{"renorm", a.renorm},   {"width", w.width},
                    {"scaled_width", w.scaled_width}, {"T_j", w.T_j},
                    {"T", static_cast<double>(p.T - p.state.t)},
                    {"tau_at_min", w.tau_at_min}, {"steps", w.steps},
                    {"order", a.order},     {"seconds", secs}};
  if (a.out.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    open_out(a.out) << out.dump(2) << "\n";
  }
}

struct CompareArgs {
  std::string problem, outdir, renorms = "s1,s2,s3,s4";
  double kappa = 1.0;
  double rtol = 1e-13, atol = 1e-13;
  bool serial = false;
};

template <class Real>
void run_compare(const CompareArgs& a) {
  const LoadedProblem<Real> p = load_problem<Real>(a.problem);
  std::vector<RenormChoice> choices;
  for (const auto& name : split_list(a.renorms)) choices.push_back(make_choice(name, a.kappa));
  CompareOptions opt;
  opt.rtol = a.rtol;
  opt.atol = a.atol;
  opt.parallel = !a.serial;
  const CompareReport rep = compare(p, choices, opt);
  fs::create_directories(a.outdir);

  std::vector<const CompareRun*> all{&rep.baseline};
  for (const auto& r : rep.runs) all.push_back(&r);

  std::ofstream rcsv = open_out((fs::path(a.outdir) / "report.csv").string());
  CsvWriter report(rcsv, {"renorm", "strip_width", "scaled_width", "T_j", "dtau",
                          "max_energy_error", "final_position_error", "max_position_error",
                          "t_end", "steps", "rejected", "seconds"});
  json rj = json::array();
  for (const CompareRun* run : all) {
    const ReportRow& r = run->row;
    report.row_text({r.renorm, format_double(r.width), format_double(r.scaled_width),
                     format_double(r.T_j), format_double(r.dtau),
                     format_double(r.max_energy_error), format_double(r.final_position_error),
                     format_double(r.max_position_error), format_double(r.t_end),
                     std::to_string(r.steps), std::to_string(r.rejected),
                     format_double(r.seconds)});
    rj.push_back(row_json(r));

    std::vector<std::string> header{"t", "tau", "energy_rel_err"};
    for (std::size_t i = 0; i < p.spec.size(); ++i)
      header.push_back("pos_err_" + std::to_string(i));
    std::ofstream s = open_out((fs::path(a.outdir) / ("samples_" + r.renorm + ".csv")).string());
    CsvWriter sc(s, header);
    for (const auto& e : run->samples) {
      std::vector<double> row{e.t, e.tau, e.energy_error};
      row.insert(row.end(), e.position_error.begin(), e.position_error.end());
      sc.row(row);
    }
  }
  open_out((fs::path(a.outdir) / "report.json").string())
      << json{{"problem", a.problem}, {"rtol", a.rtol}, {"atol", a.atol}, {"rows", rj}}.dump(2)
      << "\n";
  for (const CompareRun* run : all)
    std::cout << run->row.renorm << ": energy " << run->row.max_energy_error << ", final position "
              << run->row.final_position_error << ", steps " << run->row.steps << "\n";
}

struct GenArgs {
  std::string which, out;
  double speed = 100.0;
};

void cmd_gen(const GenArgs& a) {
  ProblemFile pf;
  if (a.which == "pythagorean") pf = gen_pythagorean();
  else if (a.which == "binary-visitor") pf = gen_binary_visitor(a.speed);
  else throw ParseError("unknown problem '" + a.which + "'");
  if (a.out.empty()) std::cout << dump_problem(pf);
  else save_problem(pf, a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-renormalized N-body integration experiments"};
  app.require_subcommand(1);

  ConstantsArgs ca;
  auto* c_const = app.add_subcommand("constants", "Compute lambda0, lambda*, lambda_max, beta");
  c_const->add_option("--tol", ca.tol, "golden-section bracket width")->check(CLI::PositiveNumber);

  IntegrateArgs ia;
  auto* c_int = app.add_subcommand("integrate", "Integrate a problem and write a trajectory CSV");
  c_int->add_option("--problem", ia.problem)->required()->check(CLI::ExistingFile);
  c_int->add_option("--renorm", ia.renorm, "s0..s4");
  c_int->add_option("--kappa", ia.kappa, "s3 weight")->check(CLI::PositiveNumber);
  c_int->add_option("--mode", ia.mode, "taylor | rk");
  c_int->add_option("--dtau", ia.dtau, "constant step")->check(CLI::PositiveNumber);
  c_int->add_option("--rtol", ia.rtol)->check(CLI::PositiveNumber);
  c_int->add_option("--atol", ia.atol)->check(CLI::PositiveNumber);
  c_int->add_option("--order", ia.order, "Taylor order")->check(CLI::Range(2, 200));
  c_int->add_option("--stride", ia.stride, "output every n-th step")->check(CLI::PositiveNumber);
  c_int->add_option("--out", ia.out)->required();

  ScanArgs sa;
  auto* c_scan = app.add_subcommand("radius-scan", "Radius estimate vs 1/L along an s1 run");
  c_scan->add_option("--problem", sa.problem)->required()->check(CLI::ExistingFile);
  c_scan->add_option("--lambda", sa.lambda, "defaults to lambda0")->check(CLI::PositiveNumber);
  c_scan->add_option("--dtau", sa.dtau)->check(CLI::PositiveNumber);
  c_scan->add_option("--order", sa.order)->check(CLI::Range(10, 200));
  c_scan->add_option("--out", sa.out)->required();

  StripArgs wa;
  auto* c_strip = app.add_subcommand("strip-width", "Strip width of one renormalization");
  c_strip->add_option("--problem", wa.problem)->required()->check(CLI::ExistingFile);
  c_strip->add_option("--renorm", wa.renorm)->required();
  c_strip->add_option("--kappa", wa.kappa)->check(CLI::PositiveNumber);
  c_strip->add_option("--dtau", wa.dtau)->check(CLI::PositiveNumber);
  c_strip->add_option("--order", wa.order)->check(CLI::Range(10, 200));
  c_strip->add_option("--out", wa.out, "JSON output (stdout if omitted)");

  CompareArgs pa;
  auto* c_cmp = app.add_subcommand("compare", "Adaptive baseline vs step-matched renormalized runs");
  c_cmp->add_option("--problem", pa.problem)->required()->check(CLI::ExistingFile);
  c_cmp->add_option("--renorms", pa.renorms, "comma-separated list");
  c_cmp->add_option("--kappa", pa.kappa)->check(CLI::PositiveNumber);
  c_cmp->add_option("--rtol", pa.rtol)->check(CLI::PositiveNumber);
  c_cmp->add_option("--atol", pa.atol)->check(CLI::PositiveNumber);
  c_cmp->add_flag("--serial", pa.serial, "run choices one after another");
  c_cmp->add_option("--outdir", pa.outdir)->required();

  GenArgs ga;
  auto* c_gen = app.add_subcommand("gen-problem", "Write a built-in problem as JSON");
  c_gen->add_option("which", ga.which, "pythagorean | binary-visitor")->required();
  c_gen->add_option("--speed", ga.speed, "visitor speed")->check(CLI::PositiveNumber);
  c_gen->add_option("--out", ga.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_const) cmd_constants(ca);
    else if (*c_int) dispatch([&](auto tag) { run_integrate<decltype(tag)>(ia); });
    else if (*c_scan) dispatch([&](auto tag) { run_scan<decltype(tag)>(sa); });
    else if (*c_strip) dispatch([&](auto tag) { run_strip<decltype(tag)>(wa); });
    else if (*c_cmp) dispatch([&](auto tag) { run_compare<decltype(tag)>(pa); });
    else if (*c_gen) cmd_gen(ga);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

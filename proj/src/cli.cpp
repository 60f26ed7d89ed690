#include "heis/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "heis/config.hpp"
#include "heis/errors.hpp"
#include "heis/excess_lab.hpp"
#include "heis/heis_core.hpp"
#include "heis/io.hpp"
#include "heis/parallel.hpp"
#include "heis/plate_solver.hpp"
#include "heis/torus_lab.hpp"

namespace heis::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

double get_num(const json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ValidationError(what + " must be an integer");
  return j.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ValidationError(what + " must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::vector<double> get_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be an array");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(get_num(e, what));
  return v;
}

Eigen::MatrixXd get_matrix(const json& j, int n, const std::string& what) {
  Eigen::MatrixXd m(n, n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw ValidationError(what + " must be an n x n array");
  for (int r = 0; r < n; ++r) {
    const auto row = get_vec(j[static_cast<std::size_t>(r)], what);
    if (static_cast<int>(row.size()) != n) throw ValidationError(what + " must be an n x n array");
    for (int c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

const std::map<std::string, std::set<std::string>>& command_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"gauge", {"n", "points", "output", "threads"}},
      {"solve-plate", {"n", "grid", "metric", "boundary", "interior", "output", "threads"}},
      {"minimize", {"n", "grid", "metric", "boundary", "solver", "output", "threads"}},
      {"excess", {"n", "grid", "metric", "boundary", "radius", "plane", "Q", "use_minimizer", "solver", "output", "threads"}},
      {"decay", {"n", "grid", "metric", "boundary", "radii", "solver", "certificate_R", "output", "threads"}},
      {"torus-ratio", {"n", "radii", "samples", "seed", "output", "threads"}},
      {"selftest", {"threads"}},
  };
  return keys;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ValidationError("empty entry in list '" + s + "'");
    out.push_back(io::parse_double(item));
  }
  return out;
}

void emit(const std::string& data, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << data;
  } else {
    io::write_file(path, data);
  }
}

// One-line summary: stdout when the data went to a file, else stderr.
std::ostream& summary_stream(const std::string& path, std::ostream& out, std::ostream& err) {
  return path.empty() ? err : out;
}

json base_json(const std::string& command) { return json{{"schema_version", kSchemaVersion}, {"command", command}}; }

MetricForm metric_of(const ExperimentConfig& c) { return c.metric ? *c.metric : MetricForm::identity(c.n); }

int cmd_gauge(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  std::ostringstream csv;
  csv << "index,gauge\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    const int n = c.n;
    HeisPoint q{Eigen::VectorXd(n), Eigen::VectorXd(n), p[static_cast<std::size_t>(2 * n)]};
    for (int k = 0; k < n; ++k) {
      q.x[k] = p[static_cast<std::size_t>(k)];
      q.y[k] = p[static_cast<std::size_t>(n + k)];
    }
    csv << i << ',' << io::format_double(fk_gauge(q)) << '\n';
  }
  emit(csv.str(), c.output, out);
  summary_stream(c.output, out, err) << "gauge: " << c.points.size() << " points\n";
  return 0;
}

int cmd_solve_plate(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const MetricForm h = metric_of(c);
  const CoefficientTensor coeffs = compute_coefficients(h);
  const EllipticityReport er = ellipticity_report(coeffs);
  const ScalarField f = make_field(c.n, c.grid, c.boundary);
  const PlateSolution sol = solve_dirichlet(PlateProblem{coeffs, f});
  json j = base_json("solve-plate");
  j["lambda0"] = er.lambda0;
  j["Lambda0"] = er.Lambda0;
  j["max_abs_a"] = er.max_abs_a;
  j["coefficients"] = io::to_json(coeffs);
  j["boundary_energy"] = energy(coeffs, f);
  j["solution"] = io::to_json(sol);
  j["agmon_ratio"] = agmon_ratio(sol.u);
  if (c.interior_r) {
    const InteriorBoundReport ib = interior_derivative_bound_check(sol.u, *c.interior_r, *c.interior_R);
    j["interior"] = {{"r", *c.interior_r}, {"R", *c.interior_R}, {"sup_hessian_sq", ib.sup_hessian_sq},
                     {"scaled_integral", ib.scaled_integral}, {"ratio", ib.ratio}};
  }
  emit(j.dump(1) + "\n", c.output, out);
  summary_stream(c.output, out, err) << "solve-plate: " << sol.unknowns << " unknowns, energy "
                                     << io::format_double(sol.energy) << ", residual "
                                     << io::format_double(sol.residual) << "\n";
  return 0;
}

int cmd_minimize(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const MetricForm h = metric_of(c);
  const ScalarField f = make_field(c.n, c.grid, c.boundary);
  const MinimizeResult m = minimize(MinimizeProblem{h, f, c.solver});
  json j = base_json("minimize");
  j["result"] = io::to_json(m);
  emit(j.dump(1) + "\n", c.output, out);
  summary_stream(c.output, out, err) << "minimize: area " << io::format_double(m.final_area) << ", |dA| "
                                     << io::format_double(m.first_variation_norm) << ", " << m.iterations
                                     << " iterations, " << (m.converged ? "converged" : "NOT converged") << "\n";
  if (!m.converged) {
    err << "error: minimization did not converge\n";
    return 2;
  }
  return 0;
}

ScalarField field_for_analysis(const ExperimentConfig& c, bool minimized, bool* ok) {
  const ScalarField f = make_field(c.n, c.grid, c.boundary);
  *ok = true;
  if (!minimized) return f;
  const MinimizeResult m = minimize(MinimizeProblem{metric_of(c), f, c.solver});
  *ok = m.converged;
  return m.v_star;
}

int cmd_excess(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  bool ok = true;
  const ScalarField v = field_for_analysis(c, c.use_minimizer, &ok);
  if (!ok) throw NumericalError("minimization did not converge");
  const LegendrianGraph g(v);
  const HeisPoint center = phi_map(g, v.center());
  const Eigen::MatrixXd A = c.plane ? *c.plane : Eigen::MatrixXd::Zero(c.n, c.n);
  const CylinderSpec cyl{center, c.radius, A, c.Q};
  const ExcessEvaluation e = evaluate_excess(g, cyl);
  const HeightOscillation ho = height_oscillation(g, cyl);
  const BestPlane bp = best_plane(g, center, c.radius);
  json j = base_json("excess");
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  j["radius"] = c.radius;
  j["Q"] = c.Q;
  j["excess"] = e.excess;
  j["deficit_form"] = num(e.deficit);
  j["discrepancy"] = num(e.discrepancy);
  j["preimage_measure"] = e.measure;
  j["q_osc"] = ho.q_osc;
  j["phi_osc"] = ho.phi_osc;
  json bpa = json::array();
  for (int r = 0; r < c.n; ++r) {
    json row = json::array();
    for (int k = 0; k < c.n; ++k) row.push_back(bp.A(r, k));
    bpa.push_back(row);
  }
  j["best_plane"] = {{"A", bpa}, {"excess", bp.excess}, {"seed_excess", bp.seed_excess}, {"converged", bp.converged}};
  emit(j.dump(1) + "\n", c.output, out);
  summary_stream(c.output, out, err) << "excess: E = " << io::format_double(e.excess) << " at r = "
                                     << io::format_double(c.radius) << "\n";
  return 0;
}

int cmd_decay(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  bool ok = true;
  const ScalarField v = field_for_analysis(c, true, &ok);
  if (!ok) throw NumericalError("minimization did not converge");
  const ExcessReport rep = decay_profile(v, c.radii);
  emit(io::excess_csv(rep), c.output, out);
  if (!c.output.empty()) {
    json s = io::excess_summary(rep);
    if (c.certificate_R) s["eps_regularity"] = io::to_json(eps_regularity_certificate(v, *c.certificate_R));
    io::write_file(c.output + ".summary.json", s.dump(1) + "\n");
  }
  summary_stream(c.output, out, err) << "decay: " << rep.records.size() << " radii, fitted exponent "
                                     << (rep.flat_exact ? std::string("flat-exact") : io::format_double(rep.fitted_exponent))
                                     << "\n";
  return 0;
}

int cmd_torus(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  if (c.radii.empty()) throw ValidationError("torus-ratio: no radii given");
  const auto recs = ratio_profile(c.n, c.radii, c.samples, c.seed);
  emit(io::torus_csv(recs), c.output, out);
  summary_stream(c.output, out, err) << "torus-ratio: n = " << c.n << ", " << recs.size() << " radii\n";
  return 0;
}

int cmd_selftest(std::ostream& out) {
  struct Check {
    const char* name;
    std::function<bool()> ok;
  };
  auto near = [](double a, double b, double t) { return std::abs(a - b) <= t; };
  const std::vector<Check> checks = {
      {"identity element", [] {
         HeisPoint q{Eigen::VectorXd::Constant(2, 0.3), Eigen::VectorXd::Constant(2, -1.2), 0.7};
         const HeisPoint p = group_mul(HeisPoint::identity(2), q);
         return p.x == q.x && p.y == q.y && p.phi == q.phi;
       }},
      {"inverse of identity", [] { return fk_gauge(group_inv(HeisPoint::identity(3))) == 0.0; }},
      {"gauge of identity", [] { return fk_gauge(HeisPoint::identity(1)) == 0.0; }},
      {"gauge at phi = 0 is |z|", [&] {
         HeisPoint p{Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 4.0), 0.0};
         return near(fk_gauge(p), 5.0, 1e-12);
       }},
      {"dilation by 1", [] {
         HeisPoint p{Eigen::VectorXd::Constant(2, 0.5), Eigen::VectorXd::Constant(2, 2.0), -0.25};
         const HeisPoint q = dilate(1.0, p);
         return q.x == p.x && q.y == p.y && q.phi == p.phi;
       }},
      {"lift of v = 0", [] {
         const ScalarField v(2, 9, 1.0);
         SmallVec x(2);
         x << 0.1, -0.3;
         const HeisPoint p = phi_map(v, x);
         return p.y.norm() == 0.0 && p.phi == 0.0;
       }},
      {"contact residual of v = 0", [] { return contact_residual(ScalarField(2, 9, 1.0)) == 0.0; }},
      {"area integrand at 0", [] { return area_integrand(SmallMat::Zero(2, 2)) == 1.0; }},
      {"tilt of a flat graph", [] { return tilt_from_hessian(SmallMat::Zero(2, 2), SmallMat::Zero(2, 2)) == 0.0; }},
      {"plate solve reproduces a quadratic", [&] {
         const ScalarField f = ScalarField::sample(2, 17, 1.0, [](const SmallVec& x) {
           return 0.3 * x[0] * x[0] - 0.2 * x[0] * x[1] + 0.1 * x[1] + 1.0;
         });
         const PlateSolution s = solve_dirichlet(PlateProblem{compute_coefficients(MetricForm::identity(2)), f});
         double err = 0.0;
         for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(s.u[i] - f[i]));
         return err < 1e-10;
       }},
      {"energy of an affine field", [] {
         const ScalarField f = ScalarField::sample(2, 9, 1.0, [](const SmallVec& x) { return 2.0 + x[0] - x[1]; });
         return std::abs(energy(compute_coefficients(MetricForm::identity(2)), f)) < 1e-20;
       }},
      {"minimize with zero data", [&] {
         const ScalarField f(2, 9, 1.0);
         const MinimizeResult m = minimize(MinimizeProblem{MetricForm::identity(2), f, {}});
         const double box = std::pow(f.spacing() * (f.points() - 2), 2);
         return m.converged && near(m.final_area, box, 1e-12);
       }},
      {"excess of v = 0", [] {
         const ScalarField v(2, 33, 1.0);
         return cylindrical_excess(v, CylinderSpec{HeisPoint::identity(2), 0.5, Eigen::MatrixXd::Zero(2, 2), 1}) == 0.0;
       }},
      {"torus lift at 0", [] { return fk_gauge(torus_lift(Eigen::VectorXd::Zero(3))) == 0.0; }},
      {"torus residual", [] { return legendrian_residual_torus(3, 1000) < 1e-12; }},
  };
  int failed = 0;
  for (const auto& c : checks) {
    bool ok = false;
    try {
      ok = c.ok();
    } catch (const std::exception&) {
      ok = false;
    }
    out << (ok ? "PASS " : "FAIL ") << c.name << "\n";
    if (!ok) ++failed;
  }
  out << "selftest: " << checks.size() - failed << "/" << checks.size() << " passed\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

ExperimentConfig parse_config(const std::string& command, const json& j) {
  const auto& keys = command_keys();
  const auto it = keys.find(command);
  if (it == keys.end()) throw ValidationError("unknown command '" + command + "'");
  reject_unknown(j, it->second, "config");
  ExperimentConfig c;
  c.command = command;
  if (j.contains("n")) c.n = get_int(j["n"], "n");
  require_dim(c.n);
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"points", "half_width"}, "grid");
    if (g.contains("points")) c.grid.points = get_int(g["points"], "grid.points");
    if (g.contains("half_width")) c.grid.half_width = get_num(g["half_width"], "grid.half_width");
  }
  if (j.contains("metric")) {
    c.metric = io::metric_from_json(j["metric"]);
    if (c.metric->n() != c.n) throw ValidationError("metric dimension differs from n");
  }
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    if (!b.is_object() || !b.contains("family") || !b["family"].is_string()) {
      throw ValidationError("boundary needs a string 'family'");
    }
    c.boundary.family = b["family"].get<std::string>();
    c.boundary.params = b;
    c.boundary.params.erase("family");
  }
  if (j.contains("radii")) c.radii = get_vec(j["radii"], "radii");
  if (j.contains("radius")) c.radius = get_num(j["radius"], "radius");
  if (j.contains("plane")) c.plane = get_matrix(j["plane"], c.n, "plane");
  if (j.contains("Q")) c.Q = get_int(j["Q"], "Q");
  if (j.contains("use_minimizer")) {
    if (!j["use_minimizer"].is_boolean()) throw ValidationError("use_minimizer must be a boolean");
    c.use_minimizer = j["use_minimizer"].get<bool>();
  }
  if (j.contains("samples")) c.samples = get_u64(j["samples"], "samples");
  if (j.contains("seed")) c.seed = get_u64(j["seed"], "seed");
  if (j.contains("interior")) {
    const json& in = j["interior"];
    reject_unknown(in, {"r", "R"}, "interior");
    if (!in.contains("r") || !in.contains("R")) throw ValidationError("interior needs r and R");
    c.interior_r = get_num(in["r"], "interior.r");
    c.interior_R = get_num(in["R"], "interior.R");
  }
  if (j.contains("certificate_R")) c.certificate_R = get_num(j["certificate_R"], "certificate_R");
  if (j.contains("points")) {
    if (!j["points"].is_array()) throw ValidationError("points must be an array");
    for (const auto& p : j["points"]) {
      auto v = get_vec(p, "points");
      if (static_cast<int>(v.size()) != 2 * c.n + 1) throw ValidationError("each point needs 2n+1 coordinates");
      c.points.push_back(std::move(v));
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"max_iterations", "gradient_tolerance", "armijo", "backtrack", "max_backtracks", "boundary_hessian_bound"},
                   "solver");
    if (s.contains("max_iterations")) c.solver.max_iterations = get_int(s["max_iterations"], "solver.max_iterations");
    if (s.contains("gradient_tolerance")) c.solver.gradient_tolerance = get_num(s["gradient_tolerance"], "solver.gradient_tolerance");
    if (s.contains("armijo")) c.solver.armijo = get_num(s["armijo"], "solver.armijo");
    if (s.contains("backtrack")) c.solver.backtrack = get_num(s["backtrack"], "solver.backtrack");
    if (s.contains("max_backtracks")) c.solver.max_backtracks = get_int(s["max_backtracks"], "solver.max_backtracks");
    if (s.contains("boundary_hessian_bound")) {
      c.solver.boundary_hessian_bound = get_num(s["boundary_hessian_bound"], "solver.boundary_hessian_bound");
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("output must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("threads")) parallel::set_max_threads(get_int(j["threads"], "threads"));
  // Validate the boundary family eagerly so bad parameters fail before work.
  if (command != "gauge" && command != "torus-ratio" && command != "selftest") {
    if (c.grid.points < 5 || c.grid.points % 2 == 0) throw ValidationError("grid.points must be odd and >= 5");
    make_field(c.n, GridSpec{5, c.grid.half_width}, c.boundary);
  }
  return c;
}

ScalarField make_field(int n, const GridSpec& grid, const BoundarySpec& b) {
  const json& p = b.params;
  auto param_vec = [&](const char* key, const std::vector<double>& def) {
    if (!p.contains(key)) return def;
    auto v = get_vec(p[key], std::string("boundary.") + key);
    if (static_cast<int>(v.size()) != n) throw ValidationError(std::string("boundary.") + key + " must have n entries");
    return v;
  };
  auto param_num = [&](const char* key, double def) {
    return p.contains(key) ? get_num(p[key], std::string("boundary.") + key) : def;
  };
  const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
  ScalarField::Generator gen;
  if (b.family == "zero") {
    reject_unknown(p, {}, "boundary(zero)");
    gen = [](const SmallVec&) { return 0.0; };
  } else if (b.family == "affine") {
    reject_unknown(p, {"c", "b"}, "boundary(affine)");
    const double c0 = param_num("c", 0.0);
    const auto bv = param_vec("b", zero);
    gen = [c0, bv](const SmallVec& x) {
      double s = c0;
      for (Eigen::Index k = 0; k < x.size(); ++k) s += bv[static_cast<std::size_t>(k)] * x[k];
      return s;
    };
  } else if (b.family == "quadratic") {
    reject_unknown(p, {"A", "b", "c"}, "boundary(quadratic)");
    if (!p.contains("A")) throw ValidationError("boundary(quadratic) needs A");
    const Eigen::MatrixXd A = get_matrix(p["A"], n, "boundary.A");
    const double c0 = param_num("c", 0.0);
    const auto bv = param_vec("b", zero);
    gen = [A, c0, bv](const SmallVec& x) {
      const Eigen::VectorXd xv = x;
      double s = c0 + 0.5 * xv.dot(A * xv);
      for (Eigen::Index k = 0; k < x.size(); ++k) s += bv[static_cast<std::size_t>(k)] * x[k];
      return s;
    };
  } else if (b.family == "bump") {
    reject_unknown(p, {"eps", "width", "center"}, "boundary(bump)");
    const double eps = param_num("eps", 0.1);
    const double w = param_num("width", 1.0);
    if (!(w > 0.0)) throw ValidationError("boundary.width must be positive");
    const auto c = param_vec("center", zero);
    gen = [eps, w, c](const SmallVec& x) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double d = x[k] - c[static_cast<std::size_t>(k)];
        r2 += d * d;
      }
      return eps * std::exp(-r2 / (w * w));
    };
  } else if (b.family == "sinusoid") {
    reject_unknown(p, {"k", "eps"}, "boundary(sinusoid)");
    const double eps = param_num("eps", 0.1);
    std::vector<double> def = zero;
    def[0] = 1.0;
    const auto k = param_vec("k", def);
    gen = [eps, k](const SmallVec& x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) s += k[static_cast<std::size_t>(i)] * x[i];
      return eps * std::sin(s);
    };
  } else {
    throw ValidationError("unknown boundary family '" + b.family + "'");
  }
  return ScalarField::sample(n, grid.points, grid.half_width, gen);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"heislab: Legendrian area minimization in the Heisenberg group"};
  app.set_help_all_flag("--help-all");
  bool version = false;
  int threads = 0;
  app.add_flag("--version", version, "Print the data schema version");
  app.add_option("--threads", threads, "Cap on worker threads")->check(CLI::PositiveNumber);

  struct Sub {
    CLI::App* app;
    std::string config;
    std::string output;
  };
  std::map<std::string, Sub> subs;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"gauge", "Folland-Koranyi gauge of a list of points"},
      {"solve-plate", "Clamped fourth-order comparison problem"},
      {"minimize", "Minimize the discrete Legendrian area"},
      {"excess", "Cylindrical excess, best plane and height oscillation"},
      {"decay", "Excess decay profile of the minimizer"},
      {"torus-ratio", "Density ratios of the lifted Clifford torus"},
      {"selftest", "Run the built-in sanity suite"}};
  for (const auto& [name, desc] : names) {
    Sub s;
    s.app = app.add_subcommand(name, desc);
    subs[name] = s;
  }
  for (auto& [name, s] : subs) {
    if (name == "selftest") continue;
    s.app->add_option("--config", s.config, "JSON experiment config");
    s.app->add_option("--output", s.output, "Output path (default: stdout)");
  }
  int t_n = 0;
  std::string t_radii;
  std::uint64_t t_samples = 0, t_seed = 0;
  CLI::App* torus = subs["torus-ratio"].app;
  auto* opt_n = torus->add_option("--n", t_n, "Dimension n");
  auto* opt_radii = torus->add_option("--radii", t_radii, "Comma-separated radii");
  auto* opt_samples = torus->add_option("--samples", t_samples, "Monte Carlo samples per radius");
  auto* opt_seed = torus->add_option("--seed", t_seed, "RNG seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (version) {
    out << kSchemaVersion << "\n";
    return 0;
  }
  if (threads > 0) parallel::set_max_threads(threads);

  std::string command;
  for (const auto& [name, s] : subs) {
    if (s.app->parsed()) command = name;
  }
  if (command.empty()) {
    err << "error: a subcommand is required\n" << app.help();
    return 1;
  }
  try {
    const Sub& s = subs[command];
    json cfg = json::object();
    if (!s.config.empty()) {
      try {
        cfg = json::parse(io::read_file(s.config));
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (command == "torus-ratio") {
      if (opt_n->count()) cfg["n"] = t_n;
      if (opt_radii->count()) cfg["radii"] = parse_list(t_radii);
      if (opt_samples->count()) cfg["samples"] = t_samples;
      if (opt_seed->count()) cfg["seed"] = t_seed;
    }
    if (!s.output.empty()) cfg["output"] = s.output;
    if (threads > 0) cfg["threads"] = threads;
    const ExperimentConfig c = parse_config(command, cfg);
    if (command == "gauge") return cmd_gauge(c, out, err);
    if (command == "solve-plate") return cmd_solve_plate(c, out, err);
    if (command == "minimize") return cmd_minimize(c, out, err);
    if (command == "excess") return cmd_excess(c, out, err);
    if (command == "decay") return cmd_decay(c, out, err);
    if (command == "torus-ratio") return cmd_torus(c, out, err);
    return cmd_selftest(out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace heis::cli

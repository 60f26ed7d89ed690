#include "heis/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heis/config.hpp"
#include "heis/errors.hpp"

namespace heis::io {
namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* what) {
  if (j.is_null()) return NAN;
  if (!j.is_number()) throw ValidationError(std::string(what) + " must be a number");
  return j.get<double>();
}

json num_json(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

int integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw ValidationError(std::string(what) + " must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(num(e, what));
  return out;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  Eigen::MatrixXd m(rows, cols);
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) throw ValidationError(std::string(what) + " has wrong row count");
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = numbers(j[static_cast<std::size_t>(r)], what);
      if (static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError(std::string(what) + " has wrong column count");
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
  }
  const auto flat = numbers(j, what);
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw ValidationError(std::string(what) + " has wrong size");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

json nested(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json flat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(num_json(m(r, c)));
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("not a number: '" + s + "'");
  return x;
}

json to_json(const MetricForm& h) { return json{{"n", h.n()}, {"H", nested(h.matrix())}}; }

MetricForm metric_from_json(const json& j) {
  const int n = integer(require(j, "n"), "n");
  if (n < 1) throw ValidationError("metric: n must be >= 1");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "n" && it.key() != "H") throw ValidationError("metric: unknown key '" + it.key() + "'");
  }
  return MetricForm(matrix_from(require(j, "H"), 2 * n, 2 * n, "metric H"));
}

json to_json(const ScalarField& v) {
  json origin = json::array();
  for (int k = 0; k < v.n(); ++k) origin.push_back(v.center()[k]);
  json vals = json::array();
  for (double x : v.values()) vals.push_back(num_json(x));
  return json{{"n", v.n()},          {"points_per_axis", v.points()}, {"spacing", v.spacing()},
              {"origin", origin},    {"extent", v.half_width()},      {"values", vals}};
}

ScalarField field_from_json(const json& j) {
  static const char* keys[] = {"n", "points_per_axis", "spacing", "origin", "extent", "values"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(keys), std::end(keys), it.key()) == std::end(keys)) {
      throw ValidationError("field: unknown key '" + it.key() + "'");
    }
  }
  const int n = integer(require(j, "n"), "n");
  const int points = integer(require(j, "points_per_axis"), "points_per_axis");
  const double spacing = num(require(j, "spacing"), "spacing");
  const auto origin = numbers(require(j, "origin"), "origin");
  if (static_cast<int>(origin.size()) != n) throw ValidationError("field: origin has wrong dimension");
  // The extent is implied by spacing when absent.
  const double extent = j.contains("extent") ? num(j.at("extent"), "extent") : 0.5 * spacing * (points - 1);
  if (std::abs(spacing * (points - 1) - 2.0 * extent) > 1e-12 * std::max(1.0, extent)) {
    throw ValidationError("field: spacing * (points - 1) != 2 * extent");
  }
  SmallVec c(n);
  for (int k = 0; k < n; ++k) c[k] = origin[static_cast<std::size_t>(k)];
  ScalarField v(n, points, extent, c);
  const auto vals = numbers(require(j, "values"), "values");
  if (vals.size() != v.size()) throw ValidationError("field: wrong number of values");
  std::copy(vals.begin(), vals.end(), v.values().begin());
  return v;
}

json to_json(const CoefficientTensor& c) {
  return json{{"n", c.n},
              {"ordering", "row-major over (i*n+j, k*n+l), indices 0-based"},
              {"a", flat(c.a)},
              {"a_tilde", flat(c.a_tilde)},
              {"b", flat(c.b)},
              {"pi0_norm_h", c.pi0_norm_h}};
}

CoefficientTensor coefficients_from_json(const json& j) {
  CoefficientTensor c;
  c.n = integer(require(j, "n"), "n");
  if (c.n < 1) throw ValidationError("coefficients: n must be >= 1");
  const int m = c.n * c.n;
  c.a = matrix_from(require(j, "a"), m, m, "a");
  c.a_tilde = matrix_from(require(j, "a_tilde"), m, m, "a_tilde");
  c.b = matrix_from(require(j, "b"), c.n, c.n, "b");
  c.pi0_norm_h = num(require(j, "pi0_norm_h"), "pi0_norm_h");
  return c;
}

json to_json(const ExcessReport& r) {
  json recs = json::array();
  for (const auto& e : r.records) {
    recs.push_back(json{{"radius", e.radius},
                        {"excess_pi0", num_json(e.excess_pi0)},
                        {"excess_best", num_json(e.excess_best)},
                        {"A", nested(e.A)},
                        {"q_osc", e.q_osc},
                        {"phi_osc", e.phi_osc},
                        {"best_converged", e.best_converged}});
  }
  return json{{"n", r.n}, {"records", recs}, {"fitted_exponent", num_json(r.fitted_exponent)}, {"flat_exact", r.flat_exact}};
}

ExcessReport excess_report_from_json(const json& j) {
  ExcessReport r;
  r.n = integer(require(j, "n"), "n");
  r.fitted_exponent = num(require(j, "fitted_exponent"), "fitted_exponent");
  r.flat_exact = require(j, "flat_exact").get<bool>();
  for (const auto& e : require(j, "records")) {
    ExcessRecord x;
    x.radius = num(require(e, "radius"), "radius");
    x.excess_pi0 = num(require(e, "excess_pi0"), "excess_pi0");
    x.excess_best = num(require(e, "excess_best"), "excess_best");
    x.A = matrix_from(require(e, "A"), r.n, r.n, "A");
    x.q_osc = num(require(e, "q_osc"), "q_osc");
    x.phi_osc = num(require(e, "phi_osc"), "phi_osc");
    x.best_converged = require(e, "best_converged").get<bool>();
    r.records.push_back(std::move(x));
  }
  return r;
}

std::string excess_csv(const ExcessReport& r) {
  std::ostringstream out;
  out << "radius,excess_pi0,excess_best";
  for (int i = 0; i < r.n; ++i) {
    for (int j = i; j < r.n; ++j) out << ",A_" << i + 1 << "_" << j + 1;
  }
  out << ",q_osc,phi_osc,best_converged\n";
  for (const auto& e : r.records) {
    out << format_double(e.radius) << ',' << format_double(e.excess_pi0) << ',' << format_double(e.excess_best);
    for (int i = 0; i < r.n; ++i) {
      for (int j = i; j < r.n; ++j) out << ',' << format_double(e.A(i, j));
    }
    out << ',' << format_double(e.q_osc) << ',' << format_double(e.phi_osc) << ',' << (e.best_converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<ExcessRecord> excess_records_from_csv(const std::string& text, int n) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("excess csv: empty input");
  const std::size_t cols = 3 + static_cast<std::size_t>(n * (n + 1) / 2) + 3;
  if (split(line, ',').size() != cols) throw ValidationError("excess csv: header does not match n");
  std::vector<ExcessRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != cols) throw ValidationError("excess csv: wrong column count");
    ExcessRecord e;
    std::size_t k = 0;
    e.radius = parse_double(f[k++]);
    e.excess_pi0 = parse_double(f[k++]);
    e.excess_best = parse_double(f[k++]);
    e.A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        e.A(i, j) = parse_double(f[k++]);
        e.A(j, i) = e.A(i, j);
      }
    }
    e.q_osc = parse_double(f[k++]);
    e.phi_osc = parse_double(f[k++]);
    e.best_converged = f[k++] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

json excess_summary(const ExcessReport& r) {
  json s{{"schema_version", kSchemaVersion},
         {"n", r.n},
         {"records", r.records.size()},
         {"fitted_exponent", num_json(r.fitted_exponent)},
         {"flat_exact", r.flat_exact},
         {"height_exponents_reference", {{"q", 1.0 / (2.0 * r.n)}, {"phi", 1.0 / (r.n * (r.n + 1.0))}}}};
  return s;
}

std::string torus_csv(const std::vector<RatioRecord>& records) {
  std::ostringstream out;
  out << "n,r,samples,seed,volume,std_error,ratio\n";
  for (const auto& r : records) {
    out << r.n << ',' << format_double(r.r) << ',' << r.samples << ',' << r.seed << ',' << format_double(r.volume_estimate)
        << ',' << format_double(r.std_error) << ',' << format_double(r.ratio) << '\n';
  }
  return out.str();
}

json to_json(const MinimizeResult& m, bool include_field) {
  json j{{"final_area", m.final_area},
         {"initial_area", m.initial_area},
         {"first_variation_norm", m.first_variation_norm},
         {"iterations", m.iterations},
         {"newton_steps", m.newton_steps},
         {"gradient_steps", m.gradient_steps},
         {"converged", m.converged},
         {"convexity_warning", m.convexity_warning}};
  if (include_field) j["v_star"] = to_json(m.v_star);
  return j;
}

json to_json(const PlateSolution& s, bool include_field) {
  json j{{"residual", s.residual}, {"energy", s.energy}, {"unknowns", s.unknowns}, {"method", s.method}};
  if (include_field) j["u"] = to_json(s.u);
  return j;
}

json to_json(const EpsRegularityReport& r) {
  json q = json::array(), ratios = json::array();
  for (int k = 0; k < 4; ++k) {
    q.push_back(num_json(r.quantities[k]));
    ratios.push_back(num_json(r.ratios[k]));
  }
  return json{{"R", r.R}, {"quantities", q}, {"excess", r.excess}, {"rhs", r.rhs}, {"ratios", ratios},
              {"labels", {"R^-2 sup|f|", "R^-1 sup|Df|", "sup|D2f|", "R^1/2 [D2f]_1/2"}}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ValidationError("write failed for '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot write '" + path + "': " + ec.message());
}

}  // namespace heis::io

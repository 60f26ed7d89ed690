#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "heis/area_minimizer.hpp"
#include "heis/excess_lab.hpp"
#include "heis/plate_solver.hpp"
#include "heis/scalar_field.hpp"
#include "heis/torus_lab.hpp"
#include "heis/wedge.hpp"

namespace heis::io {

using nlohmann::json;

// All readers throw ValidationError on malformed input.

// {"n": n, "H": [[...], ...]}; a flat row-major array of 4 n^2 entries is
// accepted on input.
json to_json(const MetricForm& h);
MetricForm metric_from_json(const json& j);

// {"n", "points_per_axis", "spacing", "origin", "extent", "values"}, where
// origin is the box center, extent the half-width, values row-major.
json to_json(const ScalarField& v);
ScalarField field_from_json(const json& j);

// a, a_tilde flat row-major over (i*n+j, k*n+l), 0-based; b row-major.
json to_json(const CoefficientTensor& c);
CoefficientTensor coefficients_from_json(const json& j);

json to_json(const ExcessReport& r);
ExcessReport excess_report_from_json(const json& j);
// Columns radius, excess_pi0, excess_best, A_i_j (upper triangle, 1-based
// labels), q_osc, phi_osc, best_converged.
std::string excess_csv(const ExcessReport& r);
std::vector<ExcessRecord> excess_records_from_csv(const std::string& text, int n);
json excess_summary(const ExcessReport& r);

// Columns n, r, samples, seed, volume, std_error, ratio.
std::string torus_csv(const std::vector<RatioRecord>& records);

json to_json(const MinimizeResult& m, bool include_field = true);
json to_json(const PlateSolution& s, bool include_field = true);
json to_json(const EpsRegularityReport& r);

// Shortest round-trip decimal form of a double; nan/inf spelled out.
std::string format_double(double x);
double parse_double(const std::string& s);

std::string read_file(const std::string& path);
// Writes atomically enough for batch use: to path.tmp, then renames.
void write_file(const std::string& path, const std::string& content);

}  // namespace heis::io

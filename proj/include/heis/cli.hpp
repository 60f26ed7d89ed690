#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "heis/area_minimizer.hpp"
#include "heis/scalar_field.hpp"
#include "heis/wedge.hpp"

namespace heis::cli {

struct GridSpec {
  int points = 65;
  double half_width = 1.0;
};

// Named boundary-data family and its parameters (validated on use).
struct BoundarySpec {
  std::string family = "zero";
  nlohmann::json params = nlohmann::json::object();
};

// Everything a subcommand may read. Which keys are allowed depends on the
// command; unknown keys are rejected before any computation.
struct ExperimentConfig {
  std::string command;
  int n = 2;
  GridSpec grid;
  std::optional<MetricForm> metric;
  BoundarySpec boundary;
  std::vector<double> radii;
  double radius = 0.5;
  std::optional<Eigen::MatrixXd> plane;
  int Q = 1;
  bool use_minimizer = false;
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  std::optional<double> interior_r, interior_R;
  std::optional<double> certificate_R;
  std::vector<std::vector<double>> points;
  MinimizeOptions solver;
  std::string output;
};

ExperimentConfig parse_config(const std::string& command, const nlohmann::json& j);

// Samples the configured family on the configured grid.
ScalarField make_field(int n, const GridSpec& grid, const BoundarySpec& b);

// Runs the CLI with argv[0] excluded. Data goes to `out` unless an output
// path is set; diagnostics always go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace heis::cli

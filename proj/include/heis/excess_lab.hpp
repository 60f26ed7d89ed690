#pragma once

#include <Eigen/Dense>
#include <vector>

#include "heis/legendrian_graph.hpp"

namespace heis {

// The cylinder C_r^{pi_A}(center) = {xi : |p^{pi_A}(Pi(xi) - Pi(center))| < r}.
struct CylinderSpec {
  HeisPoint center;
  double radius = 0.0;
  Eigen::MatrixXd plane;  // symmetric n x n; 0 is pi_0. |plane|_F <= 1.
  int Q = 1;              // multiplicity, a constant factor
};

void validate_cylinder(const CylinderSpec& c, int n);

// Base-plane preimage of the cylinder under Phi^v.
Region cylinder_region(const LegendrianGraph& g, const CylinderSpec& c);

struct ExcessEvaluation {
  double excess = 0.0;       // Q r^-n 1/2 int tilt(v, x, A) J dx
  // For A = 0: r^-n (area - Q |preimage|), both over the same quadrature,
  // and |excess - deficit| / max(|excess|, tiny). NaN otherwise.
  double deficit = NAN;
  double discrepancy = NAN;
  double measure = 0.0;      // quadrature measure of the preimage
  std::size_t leaves = 0;
};

ExcessEvaluation evaluate_excess(const LegendrianGraph& g, const CylinderSpec& c,
                                 const QuadratureOptions& opts = {});
double cylindrical_excess(const LegendrianGraph& g, const CylinderSpec& c);
double cylindrical_excess(const ScalarField& v, const CylinderSpec& c);

struct BestPlane {
  Eigen::MatrixXd A;
  double excess = 0.0;
  Eigen::MatrixXd seed;
  double seed_excess = 0.0;
  int iterations = 0;
  bool converged = false;  // false: the seed is returned
};

// Minimizes the excess over symmetric A with |A|_F <= 1, seeded at the
// average Hessian over the pi_0 cylinder. Alternates a Newton solve for A
// on a fixed preimage region with re-evaluation of the region.
BestPlane best_plane(const LegendrianGraph& g, const HeisPoint& center, double r);
BestPlane best_plane(const ScalarField& v, const HeisPoint& center, double r);

struct HeightOscillation {
  double q_osc = 0.0;    // diameter of q over the radius r/2 cylinder
  double phi_osc = 0.0;  // oscillation of phi over the radius r/4 cylinder
};

// Evaluated on grid nodes. phi is taken after the left translation that
// puts the graph point nearest the cylinder axis at q = 0.
HeightOscillation height_oscillation(const LegendrianGraph& g, const CylinderSpec& c);
HeightOscillation height_oscillation(const ScalarField& v, const CylinderSpec& c);

struct ExcessRecord {
  double radius = 0.0;
  double excess_pi0 = 0.0;
  double excess_best = 0.0;
  Eigen::MatrixXd A;
  double q_osc = 0.0;
  double phi_osc = 0.0;
  bool best_converged = true;
};

struct ExcessReport {
  int n = 0;
  std::vector<ExcessRecord> records;
  double fitted_exponent = NAN;
  bool flat_exact = false;  // every excess vanished, exponent undefined
};

bool operator==(const ExcessReport& a, const ExcessReport& b);

// Cylinders are centered at Phi^v at the field center. Radii must be
// strictly decreasing.
ExcessReport decay_profile(const ScalarField& v_star, const std::vector<double>& radii);

struct EpsRegularityReport {
  double R = 0.0;
  // R^-2 sup|f|, R^-1 sup|Df|, sup|D^2 f|, R^(1/2) [D^2 f]_{1/2} over B_{R/2},
  // f = v - v(c) - Dv(c).(x - c).
  double quantities[4] = {0, 0, 0, 0};
  double excess = 0.0;   // excess at pi_0 over radius R
  double rhs = 0.0;      // sqrt(excess)
  double ratios[4] = {0, 0, 0, 0};
};

EpsRegularityReport eps_regularity_certificate(const ScalarField& v_star, double R);

}  // namespace heis

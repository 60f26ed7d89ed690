#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "heis/hessian_stencil.hpp"
#include "heis/scalar_field.hpp"
#include "heis/wedge.hpp"

namespace heis {

// Pointwise area density of a Legendrian graph with Hessian sigma in the
// frozen metric h, F(sigma) = sqrt(det G), G = T^T H T, T = [I; sigma].
// With B = G^-1 (H_xy + sigma^T H_yy):
//   dF[d]      = F tr(B d)
//   d2F[d, e]  = F (tr(B e) tr(B d) - tr(G^-1 dG[e] B d) + tr(G^-1 e^T H_yy d))
// where dG[e] = H_xy e + e^T H_yx + e^T H_yy sigma + sigma^T H_yy e.
class AreaDensity {
 public:
  explicit AreaDensity(const MetricForm& h);
  int n() const { return n_; }
  double value(const Eigen::MatrixXd& sigma) const;
  // Gradient with respect to the n^2 entries of sigma, index i * n + j.
  double value_grad(const Eigen::MatrixXd& sigma, Eigen::VectorXd& grad) const;
  // Gradient and n^2 x n^2 Hessian.
  double value_grad_hess(const Eigen::MatrixXd& sigma, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;

 private:
  int n_;
  Eigen::MatrixXd Hxx_, Hxy_, Hyx_, Hyy_;
};

// Discrete area h^n 2^-n sum_{x, s} F(S^s(x)) over base nodes, the
// energy minimized below.
double discrete_area(const MetricForm& h, const ScalarField& v);

// Gradient of discrete_area with respect to free node values (layer >= 2),
// zero on the clamped layers.
ScalarField first_variation(const MetricForm& h, const ScalarField& v);

// Hessian of discrete_area on the free nodes, ordered as clamped_index().
Eigen::SparseMatrix<double> area_hessian(const MetricForm& h, const ScalarField& v);

struct MinimizeOptions {
  int max_iterations = 60;
  double gradient_tolerance = 1e-10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  // Precondition on sup |D^2 v| (operator norm) of the boundary field.
  double boundary_hessian_bound = 0.5;
};

struct MinimizeProblem {
  MetricForm metric = MetricForm::identity(1);
  ScalarField boundary_field;
  MinimizeOptions options;
};

struct MinimizeResult {
  ScalarField v_star;
  double final_area = 0.0;
  double initial_area = 0.0;  // at the plate-solver initial guess
  double first_variation_norm = 0.0;
  int iterations = 0;
  int newton_steps = 0;
  int gradient_steps = 0;
  bool converged = false;
  bool convexity_warning = false;  // some iterate had sup |D^2 v| > 0.9
  std::vector<double> area_history;
};

MinimizeResult minimize(const MinimizeProblem& p);

// sup over base nodes and octants of the operator norm of S.
double max_stencil_hessian(const ScalarField& v);

// sqrt(h^n 2^-n sum |S|^2), the discrete L^2 norm of D^2 w.
double hessian_l2(const ScalarField& w);

struct GapRecord {
  double eps = 0.0;
  double gap = 0.0;  // |D^2 (v* - u)| / |D^2 u|
  double plate_norm = 0.0;
  bool converged = true;
};

// For each eps, minimize and solve the plate problem on eps * f0 and report
// the relative Hessian gap. eps must be decreasing.
std::vector<GapRecord> linearization_gap(const MetricForm& h, const ScalarField& f0,
                                         const std::vector<double>& eps,
                                         const MinimizeOptions& opts = {});

// Least-squares slope of log y against log x over entries with y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace heis

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>

#include "heis/hessian_stencil.hpp"
#include "heis/scalar_field.hpp"
#include "heis/wedge.hpp"

namespace heis {

// Coefficients of the comparison operator a_{ik}^{jl} d_ijkl u. Matrices
// are n^2 x n^2 with entry (i * n + j, k * n + l) (0-based), so that the
// energy density is sum a[(i,j),(k,l)] S_ij S_kl.
struct CoefficientTensor {
  int n = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_tilde;
  Eigen::MatrixXd b;  // n x n, b(i, j) = h(pi_0, pi_i^j)
  double pi0_norm_h = 0.0;

  double at(int i, int j, int k, int l) const { return a(i * n + j, k * n + l); }
  // The quadratic form a : sigma sigma for an n x n matrix sigma.
  double form(const Eigen::MatrixXd& sigma) const;
};

bool operator==(const CoefficientTensor& x, const CoefficientTensor& y);

CoefficientTensor compute_coefficients(const MetricForm& h);

struct EllipticityReport {
  double lambda0 = 0.0;  // min eigenvalue on Sym(n)
  double Lambda0 = 0.0;  // max eigenvalue on Sym(n)
  double max_abs_a = 0.0;
  double symmetry_defect = 0.0;  // max |a - a^T|
};
EllipticityReport ellipticity_report(const CoefficientTensor& c);
double check_ellipticity(const CoefficientTensor& c);

// Discrete energy h^n 2^-n sum_{x, s} a : S^s(x) S^s(x) over base nodes.
double energy(const CoefficientTensor& c, const ScalarField& u);

// The symmetric matrix K of the discrete energy E(u) = u^T K u restricted to
// the free nodes (layer >= 2), in the order of clamped_index().
Eigen::SparseMatrix<double> assemble_plate_operator(const CoefficientTensor& c, const ScalarField& grid);

// Energy gradient 2 K u on every node (zero on clamped nodes).
ScalarField plate_gradient(const CoefficientTensor& c, const ScalarField& u);

struct PlateProblem {
  CoefficientTensor coeffs;
  // Supplies the clamped data on the two outer layers and the initial guess.
  ScalarField boundary_field;
};

struct PlateSolution {
  ScalarField u;
  double residual = 0.0;  // max norm of the energy gradient on free nodes
  double energy = 0.0;
  std::size_t unknowns = 0;
  std::string method;
};

struct PlateOptions {
  std::size_t direct_limit = 100000;
  double cg_tolerance = 1e-12;
};

PlateSolution solve_dirichlet(const PlateProblem& p, const PlateOptions& opts = {});

struct InteriorBoundReport {
  double sup_hessian_sq = 0.0;     // sup over nodes in B_r of |D^2 u|^2
  double scaled_integral = 0.0;    // (R - r)^-n int_{B_R} |D^2 u|^2
  double ratio = 0.0;
};
InteriorBoundReport interior_derivative_bound_check(const ScalarField& u, double r, double R);

// max |Du| over free nodes divided by max |Du| over the first inner layer.
double agmon_ratio(const ScalarField& u);

}  // namespace heis

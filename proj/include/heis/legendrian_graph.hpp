#pragma once

#include <functional>
#include <vector>

#include "heis/heis_core.hpp"
#include "heis/scalar_field.hpp"
#include "heis/wedge.hpp"

namespace heis {

// The Legendrian lift of a gridded potential v over pi_0,
//   Phi^v(x) = (x, Dv(x), 1/2 x . Dv(x) - v(x)),
// with derivatives from FieldDerivatives.
class LegendrianGraph {
 public:
  explicit LegendrianGraph(const ScalarField& v) : deriv_(v) {}

  const ScalarField& field() const { return deriv_.field(); }
  const FieldDerivatives& derivatives() const { return deriv_; }
  int n() const { return deriv_.n(); }

 private:
  FieldDerivatives deriv_;
};

struct GraphPoint {
  SmallVec base;
  HeisPoint point;
  std::vector<TangentVector> frame;
  double jacobian = 1.0;
  SimpleNVector tangent;
};

HeisPoint lift(const SmallVec& x, const Jet& jet);
HeisPoint phi_map(const LegendrianGraph& g, const SmallVec& x);
HeisPoint phi_map(const ScalarField& v, const SmallVec& x);

// D Phi^v(x) e_i = grad_H x^i + sum_j d_ij v(x) grad_H y^j at Phi^v(x).
std::vector<TangentVector> graph_frame(const LegendrianGraph& g, const SmallVec& x);
std::vector<TangentVector> graph_frame(const ScalarField& v, const SmallVec& x);

GraphPoint graph_point(const LegendrianGraph& g, const SmallVec& x);

// Max over nodes at distance >= 2 from the boundary of |theta(d_i Phi_h)|,
// where d_i Phi_h is the centered difference of the discrete lift (so the
// residual measures the discretization, and vanishes for quadratic v).
double contact_residual(const ScalarField& v);

// J = sqrt(det(I + S^2)) for symmetric S (symmetrized first).
double area_integrand(const SmallMat& hess);
// sqrt(det g^v) with g^v_ij = h(D Phi e_i, D Phi e_j).
double area_integrand_h(const MetricForm& h, const SmallMat& hess);

// Unit tangent n-vector D Phi pi_0 / J of a graph with Hessian S.
SimpleNVector tangent_from_hessian(const SmallMat& hess);
// |T - pi_A|^2 by Gram-determinant polarization.
double tilt_from_hessian(const SmallMat& hess, const SmallMat& A);

SimpleNVector tangent_nvector(const LegendrianGraph& g, const SmallVec& x);
double tilt(const LegendrianGraph& g, const SmallVec& x, const SmallMat& A);

// ---------------------------------------------------------------------------
// Quadrature over curved regions of the base plane.
//
// A region is {x : distance(x, jet(x)) < radius}, with `lipschitz` an upper
// bound for the Lipschitz constant of distance along the base. Grid cells
// between valid nodes are classified from the value at their center:
// certainly inside cells use the cell-center rule, certainly outside cells
// are dropped, and boundary cells are split into 2^n subcells recursively
// up to max_depth, where the subcell center decides membership.

struct Region {
  std::function<double(const SmallVec&, const Jet&)> distance;
  double radius = 0.0;
  double lipschitz = 1.0;
};

struct Ball {
  SmallVec center;
  double radius = 0.0;
};

Region ball_region(const Ball& ball);

struct QuadratureOptions {
  // Negative: 7 for n <= 2, 4 for n = 3 (the subcell count grows as 2^(n depth)).
  int max_depth = -1;
};

struct QuadratureLeaf {
  double weight = 0.0;
  SmallVec x;
  Jet jet;
};

// Leaves in a deterministic order. Throws ValidationError if the region
// reaches the outermost valid cells.
std::vector<QuadratureLeaf> region_leaves(const FieldDerivatives& d, const Region& region,
                                          const QuadratureOptions& opts = {});

// Deterministic sum of weight * f(leaf).
double integrate(const std::vector<QuadratureLeaf>& leaves,
                 const std::function<double(const QuadratureLeaf&)>& f);

double area(const LegendrianGraph& g, const Ball& ball, const QuadratureOptions& opts = {});
double area(const ScalarField& v, const Ball& ball, const QuadratureOptions& opts = {});
double area_h(const LegendrianGraph& g, const Ball& ball, const MetricForm& h,
              const QuadratureOptions& opts = {});
double area_h(const ScalarField& v, const Ball& ball, const MetricForm& h,
              const QuadratureOptions& opts = {});
// Quadrature measure of the ball itself (the rule applied to 1).
double region_measure(const LegendrianGraph& g, const Ball& ball, const QuadratureOptions& opts = {});

// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

}  // namespace heis

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace heis {

// A point (x, y, phi) of the Heisenberg group H^n in exponential coordinates.
struct HeisPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double phi = 0.0;

  HeisPoint() = default;
  HeisPoint(Eigen::VectorXd x_, Eigen::VectorXd y_, double phi_);

  static HeisPoint identity(int n);
  int dim() const { return static_cast<int>(x.size()); }
  bool is_finite() const;
};

// Components of a tangent vector in the coordinate frame (d_x, d_y, d_phi).
struct TangentVector {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double w = 0.0;

  TangentVector() = default;
  TangentVector(Eigen::VectorXd u_, Eigen::VectorXd v_, double w_);
};

// Dimension n of H^n. Everything is implemented for arbitrary n >= 1 but
// tested for n in {1, 2, 3}.
void require_dim(int n);

HeisPoint group_mul(const HeisPoint& p, const HeisPoint& q);
HeisPoint group_inv(const HeisPoint& p);
double fk_gauge(const HeisPoint& p);
double fk_dist(const HeisPoint& p, const HeisPoint& q);
HeisPoint dilate(double r, const HeisPoint& p);

// theta_p(t) = w - 1/2 (x . v - y . u).
double contact_eval(const HeisPoint& p, const TangentVector& t);

// Left-invariant horizontal frame at p, ordered grad_H x^1..x^n, grad_H y^1..y^n.
std::vector<TangentVector> horizontal_frame(const HeisPoint& p);

// |grad_H tau|(p) = |z| / tau(p). Throws at the identity, where the gauge
// is not differentiable.
double hgrad_tau(const HeisPoint& p);

using UnitaryMatrix = Eigen::MatrixXcd;
// (z, phi) -> (U z, phi). Throws if U is not unitary to tol::kUnitary.
HeisPoint unitary_act(const UnitaryMatrix& U, const HeisPoint& p);

Eigen::VectorXd project_p(const HeisPoint& p);
Eigen::VectorXd project_q(const HeisPoint& p);
Eigen::VectorXd project_pi(const HeisPoint& p);

// Legendrian planes near pi_0 in the graph chart {(s, A s)}, A symmetric.
// Orthonormal basis of the plane as the columns of a 2n x n matrix.
Eigen::MatrixXd graph_plane_basis(const Eigen::MatrixXd& A);
// Orthonormal basis of its g_H-orthogonal complement {(-A w, w)}.
Eigen::MatrixXd graph_plane_normal_basis(const Eigen::MatrixXd& A);
// 2n x 2n orthogonal projector of R^{2n} onto the plane.
Eigen::MatrixXd graph_plane_projector(const Eigen::MatrixXd& A);
// p^{pi_A}(xi) and q^{pi_A}(xi): coordinates of Pi(xi) in the bases above.
Eigen::VectorXd project_p_tilted(const Eigen::MatrixXd& A, const HeisPoint& p);
Eigen::VectorXd project_q_tilted(const Eigen::MatrixXd& A, const HeisPoint& p);
// Operator norm |p^{pi_A} - p^{pi_B}| computed on the projectors.
double projection_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Symmetric part 1/2 (M + M^T); throws on a non-square input.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M);

}  // namespace heis

#include "heis/heis_core.hpp"

#include <cmath>
#include <string>

#include "heis/config.hpp"
#include "heis/errors.hpp"

namespace heis {
namespace {

void require_same_dim(const HeisPoint& p, const HeisPoint& q) {
  if (p.dim() != q.dim() || p.y.size() != q.y.size()) {
    throw ValidationError("dimension mismatch: H^" + std::to_string(p.dim()) + " vs H^" +
                          std::to_string(q.dim()));
  }
}

void require_symmetric_chart(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() < 1) throw ValidationError("plane chart must be a square matrix");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry * (1.0 + A.cwiseAbs().maxCoeff())) {
    throw ValidationError("Legendrian plane chart must be symmetric");
  }
}

// Symmetric inverse square root of I + A^2.
Eigen::MatrixXd inv_sqrt_gram(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd::Identity(n, n) + A * A);
  return es.operatorInverseSqrt();
}

}  // namespace

HeisPoint::HeisPoint(Eigen::VectorXd x_, Eigen::VectorXd y_, double phi_)
    : x(std::move(x_)), y(std::move(y_)), phi(phi_) {
  if (x.size() != y.size()) throw ValidationError("HeisPoint: x and y must have equal length");
}

HeisPoint HeisPoint::identity(int n) {
  require_dim(n);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0};
}

bool HeisPoint::is_finite() const { return x.allFinite() && y.allFinite() && std::isfinite(phi); }

TangentVector::TangentVector(Eigen::VectorXd u_, Eigen::VectorXd v_, double w_)
    : u(std::move(u_)), v(std::move(v_)), w(w_) {
  if (u.size() != v.size()) throw ValidationError("TangentVector: u and v must have equal length");
}

void require_dim(int n) {
  if (n < 1) throw ValidationError("dimension n must be >= 1, got " + std::to_string(n));
}

HeisPoint group_mul(const HeisPoint& p, const HeisPoint& q) {
  require_same_dim(p, q);
  // Same accumulation order as the batched kernels.
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.x.size(); ++k) acc = acc + (p.x[k] * q.y[k] - p.y[k] * q.x[k]);
  return {p.x + q.x, p.y + q.y, (p.phi + q.phi) + 0.5 * acc};
}

HeisPoint group_inv(const HeisPoint& p) { return {-p.x, -p.y, -p.phi}; }

double fk_gauge(const HeisPoint& p) {
  const double z2 = p.x.squaredNorm() + p.y.squaredNorm();
  return std::sqrt(std::sqrt(z2 * z2 + 16.0 * (p.phi * p.phi)));
}

double fk_dist(const HeisPoint& p, const HeisPoint& q) { return fk_gauge(group_mul(group_inv(p), q)); }

HeisPoint dilate(double r, const HeisPoint& p) {
  if (!(r > 0.0)) throw ValidationError("dilation factor must be positive");
  return {r * p.x, r * p.y, r * r * p.phi};
}

double contact_eval(const HeisPoint& p, const TangentVector& t) {
  if (t.u.size() != p.x.size()) throw ValidationError("contact_eval: dimension mismatch");
  return t.w - 0.5 * (p.x.dot(t.v) - p.y.dot(t.u));
}

std::vector<TangentVector> horizontal_frame(const HeisPoint& p) {
  const int n = p.dim();
  std::vector<TangentVector> frame;
  frame.reserve(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    frame.emplace_back(Eigen::VectorXd::Unit(n, i), Eigen::VectorXd::Zero(n), -0.5 * p.y[i]);
  }
  for (int i = 0; i < n; ++i) {
    frame.emplace_back(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Unit(n, i), 0.5 * p.x[i]);
  }
  return frame;
}

double hgrad_tau(const HeisPoint& p) {
  const double z2 = p.x.squaredNorm() + p.y.squaredNorm();
  const double z4 = z2 * z2;
  const double tau4 = z4 + 16.0 * (p.phi * p.phi);
  if (tau4 == 0.0) throw ValidationError("hgrad_tau: gauge is not differentiable at the identity");
  // (|z|^4 / tau^4)^(1/4); the quotient form cannot round above 1.
  return std::sqrt(std::sqrt(z4 / tau4));
}

HeisPoint unitary_act(const UnitaryMatrix& U, const HeisPoint& p) {
  const Eigen::Index n = p.x.size();
  if (U.rows() != n || U.cols() != n) throw ValidationError("unitary_act: matrix size mismatch");
  const double defect = (U.adjoint() * U - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > tol::kUnitary) throw ValidationError("unitary_act: matrix is not unitary");
  Eigen::VectorXcd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = {p.x[k], p.y[k]};
  const Eigen::VectorXcd w = U * z;
  return {w.real(), w.imag(), p.phi};
}

Eigen::VectorXd project_p(const HeisPoint& p) { return p.x; }
Eigen::VectorXd project_q(const HeisPoint& p) { return p.y; }
Eigen::VectorXd project_pi(const HeisPoint& p) {
  Eigen::VectorXd z(2 * p.x.size());
  z << p.x, p.y;
  return z;
}

Eigen::MatrixXd graph_plane_basis(const Eigen::MatrixXd& A) {
  require_symmetric_chart(A);
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd T(2 * n, n);
  T << Eigen::MatrixXd::Identity(n, n), A;
  return T * inv_sqrt_gram(A);
}

Eigen::MatrixXd graph_plane_normal_basis(const Eigen::MatrixXd& A) {
  require_symmetric_chart(A);
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd N(2 * n, n);
  N << -A, Eigen::MatrixXd::Identity(n, n);
  return N * inv_sqrt_gram(A);
}

Eigen::MatrixXd graph_plane_projector(const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd B = graph_plane_basis(A);
  return B * B.transpose();
}

Eigen::VectorXd project_p_tilted(const Eigen::MatrixXd& A, const HeisPoint& p) {
  if (A.rows() != p.dim()) throw ValidationError("project_p_tilted: dimension mismatch");
  return graph_plane_basis(A).transpose() * project_pi(p);
}

Eigen::VectorXd project_q_tilted(const Eigen::MatrixXd& A, const HeisPoint& p) {
  if (A.rows() != p.dim()) throw ValidationError("project_q_tilted: dimension mismatch");
  return graph_plane_normal_basis(A).transpose() * project_pi(p);
}

double projection_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd D = graph_plane_projector(A) - graph_plane_projector(B);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ValidationError("symmetrize: matrix must be square");
  return 0.5 * (M + M.transpose());
}

}  // namespace heis

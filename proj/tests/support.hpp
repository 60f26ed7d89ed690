#pragma once

#include <Eigen/Dense>
#include <random>

#include "heis/heis_core.hpp"
#include "heis/scalar_field.hpp"

namespace heis::test {

inline HeisPoint random_point(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  HeisPoint p{Eigen::VectorXd(n), Eigen::VectorXd(n), u(rng)};
  for (int k = 0; k < n; ++k) {
    p.x[k] = u(rng);
    p.y[k] = u(rng);
  }
  return p;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) A(i, j) = A(j, i) = scale * u(rng);
  }
  return A;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int m, double spread = 1.0) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) M(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) d[i] = std::pow(spread, u(rng));
  Eigen::MatrixXd H = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (H + H.transpose());
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline HeisPoint point(std::initializer_list<double> x, std::initializer_list<double> y, double phi) {
  HeisPoint p{Eigen::VectorXd(static_cast<Eigen::Index>(x.size())), Eigen::VectorXd(static_cast<Eigen::Index>(y.size())), phi};
  Eigen::Index k = 0;
  for (double v : x) p.x[k++] = v;
  k = 0;
  for (double v : y) p.y[k++] = v;
  return p;
}

// Smooth window vanishing to second order two cells inside the box, so
// perturbations times the window leave the clamped layers untouched.
inline double clamp_window(const ScalarField& grid, const SmallVec& x) {
  const double W = grid.half_width() - 2.0 * grid.spacing();
  double w = 1.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double t = (x[k] - grid.center()[k]) / W;
    w *= t * t >= 1.0 ? 0.0 : (1.0 - t * t) * (1.0 - t * t);
  }
  return w;
}

}  // namespace heis::test

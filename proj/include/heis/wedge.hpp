#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace heis {

// Constants of the frozen-metric ellipticity assumptions, estimated by
// sampling random unit Legendrian n-vectors. Each inequality has its own
// homogeneity in lambda, so each is reported separately.
struct MetricConstants {
  double mass_lower = 0.0;   // min |pi|_h
  double mass_upper = 0.0;   // max |pi|_h
  // min of (h(p,p) h(w,w) - h(p,w)^2) / (|p|^2 |w|^2) over g_H-orthogonal
  // pairs; estimates lambda^4.
  double ellipticity = 0.0;
  // min of (|p|_h - h(p,w)/|w|_h) / |p - w|^2 over Legendrian unit pairs.
  double coercivity = 0.0;
  int samples = 0;
};

// A constant symmetric positive-definite bilinear form h_0 on the
// horizontal space Xi_0, written in the frame {grad_H x^i, grad_H y^i}.
class MetricForm {
 public:
  static constexpr int kDefaultSamples = 400;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed0001u;

  // Validates symmetry and positive-definiteness and samples the
  // constants; throws ValidationError ("constructed-metric error") on failure.
  explicit MetricForm(Eigen::MatrixXd H, int samples = kDefaultSamples,
                      std::uint64_t seed = kDefaultSeed);

  static MetricForm identity(int n);
  static MetricForm scaled_identity(int n, double c);

  int n() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return H_; }
  const MetricConstants& constants() const { return constants_; }

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(H_ * b); }

  // Blocks of H: xx, xy, yy (each n x n).
  Eigen::MatrixXd block_xx() const { return H_.topLeftCorner(n_, n_); }
  Eigen::MatrixXd block_xy() const { return H_.topRightCorner(n_, n_); }
  Eigen::MatrixXd block_yy() const { return H_.bottomRightCorner(n_, n_); }

 private:
  int n_ = 0;
  Eigen::MatrixXd H_;
  MetricConstants constants_;
};

bool operator==(const MetricForm& a, const MetricForm& b);

// A simple n-vector a_1 ^ ... ^ a_n stored by its factors, each a vector
// of length 2n in the horizontal frame.
struct SimpleNVector {
  std::vector<Eigen::VectorXd> factors;

  SimpleNVector() = default;
  explicit SimpleNVector(std::vector<Eigen::VectorXd> f);
  // Factors are the columns of a 2n x n matrix.
  static SimpleNVector from_columns(const Eigen::MatrixXd& M);

  int n() const { return static_cast<int>(factors.size()); }
  Eigen::MatrixXd columns() const;
  SimpleNVector scaled(double c) const;
};

// Finite linear combination of simple n-vectors; inner products expand by
// bilinearity.
struct NVectorSum {
  std::vector<double> coeffs;
  std::vector<SimpleNVector> terms;

  NVectorSum() = default;
  explicit NVectorSum(SimpleNVector a) : coeffs{1.0}, terms{std::move(a)} {}
  NVectorSum& add(double c, SimpleNVector a);
};

NVectorSum operator-(const NVectorSum& a, const NVectorSum& b);

// pi_0 = grad_H x^1 ^ ... ^ grad_H x^n.
SimpleNVector basis_pi0(int n);
// pi_i^j: factor i of pi_0 replaced by grad_H y^j (0-based i, j).
SimpleNVector basis_pij(int n, int i, int j);
// Normalized (or raw) n-vector of the Legendrian graph plane {(s, A s)}.
SimpleNVector graph_plane_nvector(const Eigen::MatrixXd& A, bool normalized = true);

// det[h(a_i, b_j)].
double nvector_inner(const MetricForm& h, const SimpleNVector& a, const SimpleNVector& b);
double nvector_inner(const MetricForm& h, const NVectorSum& a, const NVectorSum& b);
// Same with the standard metric g_H.
double nvector_inner(const SimpleNVector& a, const SimpleNVector& b);
double nvector_inner(const NVectorSum& a, const NVectorSum& b);

// |a - b|^2 in g_H by polarization on the simple summands.
double nvector_dist_sq(const SimpleNVector& a, const SimpleNVector& b);

struct MetricBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// min/max of |pi|_h over random unit Legendrian graph n-vectors.
MetricBounds metric_bounds(const MetricForm& h, int samples, std::uint64_t seed = 1);

}  // namespace heis

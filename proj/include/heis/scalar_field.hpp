#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heis {

// Gridded modules support n <= 3; small fixed-capacity Eigen types keep the
// per-point work allocation free.
inline constexpr int kMaxGridDim = 3;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxGridDim, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxGridDim, kMaxGridDim>;

// A potential v sampled on a uniform cubical grid centered at `center`
// with half-width R: node i has coordinates center - R + i * spacing, and
// spacing * (points - 1) = 2R. The point count per axis is odd so a center
// node exists. Values are stored row-major (the first axis varies slowest).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int n, int points, double half_width, SmallVec center);
  ScalarField(int n, int points, double half_width);

  using Generator = std::function<double(const SmallVec&)>;
  static ScalarField sample(int n, int points, double half_width, const Generator& f);
  static ScalarField sample(int n, int points, double half_width, const SmallVec& center,
                            const Generator& f);

  int n() const { return n_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  double half_width() const { return half_width_; }
  const SmallVec& center() const { return center_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Stride of axis k in the flat array.
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  std::size_t index(std::span<const int> multi) const;
  void multi_index(std::size_t flat, std::span<int> out) const;
  SmallVec node(std::size_t flat) const;
  // Grid distance of node `flat` from the nearest face (0 on the boundary).
  int layer(std::size_t flat) const;

  bool same_grid(const ScalarField& other) const;

 private:
  int n_ = 0;
  int points_ = 0;
  double spacing_ = 0.0;
  double half_width_ = 0.0;
  SmallVec center_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

bool operator==(const ScalarField& a, const ScalarField& b);

// Value, gradient and Hessian of a potential at a point.
struct Jet {
  double value = 0.0;
  SmallVec grad;
  SmallMat hess;
};

// Centered second-order finite differences of a ScalarField, stored on the
// nodes at distance >= 1 from the boundary ("valid nodes") and interpolated
// multilinearly in between. The Hessian uses the standard centered
// stencils and is symmetric by construction.
class FieldDerivatives {
 public:
  explicit FieldDerivatives(const ScalarField& v);

  const ScalarField& field() const { return field_; }
  int n() const { return field_.n(); }

  // Box of the valid region, [lo, hi] per axis.
  double valid_lo(int axis) const;
  double valid_hi(int axis) const;
  bool in_valid_region(const SmallVec& x, double slack = 1e-12) const;

  Jet node_jet(std::size_t flat) const;
  // Throws ValidationError outside the valid region.
  Jet jet_at(const SmallVec& x) const;

  // max Frobenius norm of the node Hessians over valid nodes.
  double max_hessian_norm() const { return max_hessian_norm_; }

 private:
  ScalarField field_;
  std::vector<double> grad_;  // n entries per node
  std::vector<double> hess_;  // n*n entries per node
  double max_hessian_norm_ = 0.0;
};

}  // namespace heis

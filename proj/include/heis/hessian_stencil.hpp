#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "heis/scalar_field.hpp"

namespace heis {

// One-sided ("octant") discrete Hessians used by every discrete energy.
//
// At a base node x (layer >= 1) and an octant s in {+1,-1}^n:
//   S_ii = (u(x + e_i) - 2 u(x) + u(x - e_i)) / h^2
//   S_ij = s_i s_j (u(x + s_i e_i + s_j e_j) - u(x + s_i e_i) - u(x + s_j e_j) + u(x)) / h^2
// A discrete functional of D^2 u is h^n sum_x 2^-n sum_s G(S^s(x)). For
// G = |S|^2 this is the usual 13-point bilaplacian energy in two
// dimensions; the cross differences live on cells, so there are no
// checkerboard null modes as with a wide centered mixed difference.
class OctantStencil {
 public:
  explicit OctantStencil(const ScalarField& grid);

  int n() const { return n_; }
  int octants() const { return octants_; }
  // Nodes touched per base node: 3^n (offsets in {-1, 0, 1}^n).
  int local_size() const { return local_size_; }
  std::ptrdiff_t offset(int local) const { return offsets_[static_cast<std::size_t>(local)]; }
  // n^2 x 3^n matrix mapping local values to S entries, row i * n + j.
  const Eigen::MatrixXd& matrix(int octant) const { return mats_[static_cast<std::size_t>(octant)]; }
  // Base nodes (layer >= 1) in increasing flat order.
  const std::vector<std::size_t>& bases() const { return bases_; }
  // Weight h^n / 2^n of one (base, octant) term.
  double weight() const { return weight_; }

  void gather(std::span<const double> values, std::size_t base, Eigen::VectorXd& local) const;
  SmallMat hessian(std::span<const double> values, std::size_t base, int octant) const;

 private:
  int n_;
  int octants_;
  int local_size_;
  double weight_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<Eigen::MatrixXd> mats_;
  std::vector<std::size_t> bases_;
};

// Flat indices of nodes with layer >= 2, the free nodes of a clamped
// problem, and the inverse map (-1 for clamped nodes).
struct ClampedIndex {
  std::vector<std::size_t> free_nodes;
  std::vector<std::ptrdiff_t> slot;
};
ClampedIndex clamped_index(const ScalarField& grid);

}  // namespace heis

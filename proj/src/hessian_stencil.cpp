#include "heis/hessian_stencil.hpp"

#include <cmath>

#include "heis/errors.hpp"

namespace heis {

OctantStencil::OctantStencil(const ScalarField& grid) : n_(grid.n()) {
  if (grid.points() < 5) throw ValidationError("stencil needs at least 5 points per axis");
  const int n = n_;
  const double h = grid.spacing();
  octants_ = n == 1 ? 1 : 1 << n;
  local_size_ = 1;
  for (int k = 0; k < n; ++k) local_size_ *= 3;
  weight_ = std::pow(h, n) / octants_;

  // Local index l encodes offsets d_k = digit_k(l) - 1, with the first axis
  // as the most significant digit so local order follows flat order.
  offsets_.resize(static_cast<std::size_t>(local_size_));
  auto local_of = [n](const int* d) {
    int l = 0;
    for (int k = 0; k < n; ++k) l = 3 * l + (d[k] + 1);
    return l;
  };
  for (int l = 0; l < local_size_; ++l) {
    int rem = l;
    std::ptrdiff_t off = 0;
    for (int k = n - 1; k >= 0; --k) {
      const int d = rem % 3 - 1;
      rem /= 3;
      off += d * static_cast<std::ptrdiff_t>(grid.stride(k));
    }
    offsets_[static_cast<std::size_t>(l)] = off;
  }

  const double ih2 = 1.0 / (h * h);
  mats_.assign(static_cast<std::size_t>(octants_), Eigen::MatrixXd::Zero(n * n, local_size_));
  for (int o = 0; o < octants_; ++o) {
    Eigen::MatrixXd& M = mats_[static_cast<std::size_t>(o)];
    int sgn[kMaxGridDim];
    for (int k = 0; k < n; ++k) sgn[k] = ((o >> k) & 1) ? -1 : 1;
    for (int i = 0; i < n; ++i) {
      int d[kMaxGridDim] = {0, 0, 0};
      const int row = i * n + i;
      M(row, local_of(d)) += -2.0 * ih2;
      d[i] = 1;
      M(row, local_of(d)) += ih2;
      d[i] = -1;
      M(row, local_of(d)) += ih2;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double c = sgn[i] * sgn[j] * ih2;
        const int r = i * n + j;
        int e[kMaxGridDim] = {0, 0, 0};
        M(r, local_of(e)) += c;
        e[i] = sgn[i];
        M(r, local_of(e)) -= c;
        e[j] = sgn[j];
        M(r, local_of(e)) += c;
        e[i] = 0;
        M(r, local_of(e)) -= c;
      }
    }
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.layer(i) >= 1) bases_.push_back(i);
  }
}

void OctantStencil::gather(std::span<const double> values, std::size_t base, Eigen::VectorXd& local) const {
  local.resize(local_size_);
  for (int l = 0; l < local_size_; ++l) {
    local[l] = values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + offsets_[static_cast<std::size_t>(l)])];
  }
}

SmallMat OctantStencil::hessian(std::span<const double> values, std::size_t base, int octant) const {
  Eigen::VectorXd local;
  gather(values, base, local);
  const Eigen::VectorXd s = matrix(octant) * local;
  SmallMat S(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) S(i, j) = s[i * n_ + j];
  }
  return S;
}

ClampedIndex clamped_index(const ScalarField& grid) {
  ClampedIndex c;
  c.slot.assign(grid.size(), -1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.layer(i) >= 2) {
      c.slot[i] = static_cast<std::ptrdiff_t>(c.free_nodes.size());
      c.free_nodes.push_back(i);
    }
  }
  return c;
}

}  // namespace heis

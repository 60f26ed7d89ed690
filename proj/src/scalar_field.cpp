#include "heis/scalar_field.hpp"

#include <cmath>
#include <string>

#include "heis/errors.hpp"

namespace heis {

ScalarField::ScalarField(int n, int points, double half_width, SmallVec center)
    : n_(n), points_(points), half_width_(half_width), center_(std::move(center)) {
  if (n < 1 || n > kMaxGridDim) {
    throw ValidationError("ScalarField: dimension must be in [1, 3], got " + std::to_string(n));
  }
  if (points < 3 || points % 2 == 0) {
    throw ValidationError("ScalarField: points per axis must be odd and >= 3");
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ValidationError("ScalarField: half-width must be positive");
  }
  if (center_.size() != n) throw ValidationError("ScalarField: center has wrong dimension");
  spacing_ = 2.0 * half_width / (points - 1);
  strides_.assign(static_cast<std::size_t>(n), 1);
  for (int k = n - 2; k >= 0; --k) {
    strides_[static_cast<std::size_t>(k)] = strides_[static_cast<std::size_t>(k + 1)] * static_cast<std::size_t>(points);
  }
  values_.assign(strides_[0] * static_cast<std::size_t>(points), 0.0);
}

ScalarField::ScalarField(int n, int points, double half_width)
    : ScalarField(n, points, half_width, SmallVec::Zero(std::max(1, std::min(n, kMaxGridDim)))) {}

ScalarField ScalarField::sample(int n, int points, double half_width, const Generator& f) {
  ScalarField v(n, points, half_width);
  for (std::size_t i = 0; i < v.size(); ++i) v.values_[i] = f(v.node(i));
  return v;
}

ScalarField ScalarField::sample(int n, int points, double half_width, const SmallVec& center,
                                const Generator& f) {
  ScalarField v(n, points, half_width, center);
  for (std::size_t i = 0; i < v.size(); ++i) v.values_[i] = f(v.node(i));
  return v;
}

std::size_t ScalarField::index(std::span<const int> multi) const {
  std::size_t flat = 0;
  for (int k = 0; k < n_; ++k) flat += static_cast<std::size_t>(multi[static_cast<std::size_t>(k)]) * strides_[static_cast<std::size_t>(k)];
  return flat;
}

void ScalarField::multi_index(std::size_t flat, std::span<int> out) const {
  for (int k = 0; k < n_; ++k) {
    const std::size_t s = strides_[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = static_cast<int>(flat / s);
    flat %= s;
  }
}

SmallVec ScalarField::node(std::size_t flat) const {
  int idx[kMaxGridDim];
  multi_index(flat, std::span<int>(idx, static_cast<std::size_t>(n_)));
  SmallVec x(n_);
  for (int k = 0; k < n_; ++k) x[k] = center_[k] - half_width_ + idx[k] * spacing_;
  return x;
}

int ScalarField::layer(std::size_t flat) const {
  int idx[kMaxGridDim];
  multi_index(flat, std::span<int>(idx, static_cast<std::size_t>(n_)));
  int d = points_;
  for (int k = 0; k < n_; ++k) d = std::min({d, idx[k], points_ - 1 - idx[k]});
  return d;
}

bool ScalarField::same_grid(const ScalarField& o) const {
  return n_ == o.n_ && points_ == o.points_ && spacing_ == o.spacing_ && center_ == o.center_;
}

bool operator==(const ScalarField& a, const ScalarField& b) {
  if (!a.same_grid(b) || a.half_width() != b.half_width()) return false;
  const auto va = a.values();
  const auto vb = b.values();
  return std::equal(va.begin(), va.end(), vb.begin(), vb.end());
}

FieldDerivatives::FieldDerivatives(const ScalarField& v) : field_(v) {
  const int n = v.n();
  const auto nn = static_cast<std::size_t>(n);
  const double h = v.spacing();
  grad_.assign(v.size() * nn, 0.0);
  hess_.assign(v.size() * nn * nn, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.layer(i) < 1) continue;
    for (int a = 0; a < n; ++a) {
      const std::size_t sa = v.stride(a);
      grad_[i * nn + static_cast<std::size_t>(a)] = (v[i + sa] - v[i - sa]) / (2.0 * h);
      hess_[(i * nn + static_cast<std::size_t>(a)) * nn + static_cast<std::size_t>(a)] =
          (v[i + sa] - 2.0 * v[i] + v[i - sa]) / (h * h);
      for (int b = a + 1; b < n; ++b) {
        const std::size_t sb = v.stride(b);
        const double d = (v[i + sa + sb] - v[i + sa - sb] - v[i - sa + sb] + v[i - sa - sb]) / (4.0 * h * h);
        hess_[(i * nn + static_cast<std::size_t>(a)) * nn + static_cast<std::size_t>(b)] = d;
        hess_[(i * nn + static_cast<std::size_t>(b)) * nn + static_cast<std::size_t>(a)] = d;
      }
    }
    double f2 = 0.0;
    for (std::size_t e = 0; e < nn * nn; ++e) f2 += hess_[i * nn * nn + e] * hess_[i * nn * nn + e];
    max_hessian_norm_ = std::max(max_hessian_norm_, std::sqrt(f2));
  }
}

double FieldDerivatives::valid_lo(int axis) const {
  return field_.center()[axis] - field_.half_width() + field_.spacing();
}

double FieldDerivatives::valid_hi(int axis) const {
  return field_.center()[axis] + field_.half_width() - field_.spacing();
}

bool FieldDerivatives::in_valid_region(const SmallVec& x, double slack) const {
  if (x.size() != n()) return false;
  for (int k = 0; k < n(); ++k) {
    if (!(x[k] >= valid_lo(k) - slack && x[k] <= valid_hi(k) + slack)) return false;
  }
  return true;
}

Jet FieldDerivatives::node_jet(std::size_t flat) const {
  const int n = this->n();
  const auto nn = static_cast<std::size_t>(n);
  Jet j;
  j.value = field_[flat];
  j.grad.resize(n);
  j.hess.resize(n, n);
  for (int a = 0; a < n; ++a) {
    j.grad[a] = grad_[flat * nn + static_cast<std::size_t>(a)];
    for (int b = 0; b < n; ++b) j.hess(a, b) = hess_[(flat * nn + static_cast<std::size_t>(a)) * nn + static_cast<std::size_t>(b)];
  }
  return j;
}

Jet FieldDerivatives::jet_at(const SmallVec& x) const {
  if (!in_valid_region(x)) throw ValidationError("point outside the valid region of the grid");
  const ScalarField& v = field_;
  const int n = this->n();
  const auto nn = static_cast<std::size_t>(n);
  const double h = v.spacing();
  int base[kMaxGridDim];
  double t[kMaxGridDim];
  for (int k = 0; k < n; ++k) {
    const double s = (x[k] - (v.center()[k] - v.half_width())) / h;
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 1, v.points() - 3);
    base[k] = i;
    t[k] = std::clamp(s - i, 0.0, 1.0);
  }
  Jet j;
  j.grad = SmallVec::Zero(n);
  j.hess = SmallMat::Zero(n, n);
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < n; ++k) {
      const int bit = (c >> k) & 1;
      w *= bit ? t[k] : 1.0 - t[k];
      flat += static_cast<std::size_t>(base[k] + bit) * v.stride(k);
    }
    if (w == 0.0) continue;
    j.value += w * v[flat];
    for (int a = 0; a < n; ++a) {
      j.grad[a] += w * grad_[flat * nn + static_cast<std::size_t>(a)];
      for (int b = 0; b < n; ++b) j.hess(a, b) += w * hess_[(flat * nn + static_cast<std::size_t>(a)) * nn + static_cast<std::size_t>(b)];
    }
  }
  return j;
}

}  // namespace heis

#include <cmath>

#include "kernels.hpp"

namespace heis::simd::detail {
namespace {

void fk_gauge_scalar(const double* z2, const double* phi, double* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) out[i] = std::sqrt(std::sqrt(gauge_quartic(z2[i], phi[i])));
}

std::size_t gauge_ball_mask_scalar(const double* z2, const double* phi, double r4,
                                   std::uint8_t* mask, std::size_t count) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const bool inside = gauge_quartic(z2[i], phi[i]) < r4;
    mask[i] = inside ? 1 : 0;
    hits += inside ? 1 : 0;
  }
  return hits;
}

void group_mul_scalar(const MulBatchArgs& a) {
  const std::size_t m = a.count;
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int k = 0; k < a.dim; ++k) {
      const std::size_t j = static_cast<std::size_t>(k) * m + i;
      acc = acc + (a.x1[j] * a.y2[j] - a.y1[j] * a.x2[j]);
      a.x_out[j] = a.x1[j] + a.x2[j];
      a.y_out[j] = a.y1[j] + a.y2[j];
    }
    a.phi_out[i] = (a.phi1[i] + a.phi2[i]) + 0.5 * acc;
  }
}

void area_integrand_2d_scalar(const double* s11, const double* s12, const double* s22,
                              double* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) out[i] = std::sqrt(area_det_2d(s11[i], s12[i], s22[i]));
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{fk_gauge_scalar, gauge_ball_mask_scalar, group_mul_scalar,
                                 area_integrand_2d_scalar};
  return table;
}

}  // namespace heis::simd::detail

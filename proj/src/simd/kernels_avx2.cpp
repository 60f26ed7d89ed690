#include <immintrin.h>

#include <cmath>

#include "kernels.hpp"

namespace heis::simd::detail {
namespace {

// Four doubles per register. Tails fall back to the shared scalar formulas.

void fk_gauge_avx2(const double* z2, const double* phi, double* out, std::size_t count) {
  const __m256d sixteen = _mm256_set1_pd(16.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d z = _mm256_loadu_pd(z2 + i);
    const __m256d p = _mm256_loadu_pd(phi + i);
    const __m256d q = _mm256_add_pd(_mm256_mul_pd(z, z), _mm256_mul_pd(sixteen, _mm256_mul_pd(p, p)));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_sqrt_pd(q)));
  }
  for (; i < count; ++i) out[i] = std::sqrt(std::sqrt(gauge_quartic(z2[i], phi[i])));
}

std::size_t gauge_ball_mask_avx2(const double* z2, const double* phi, double r4,
                                 std::uint8_t* mask, std::size_t count) {
  const __m256d sixteen = _mm256_set1_pd(16.0);
  const __m256d bound = _mm256_set1_pd(r4);
  std::size_t hits = 0;
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d z = _mm256_loadu_pd(z2 + i);
    const __m256d p = _mm256_loadu_pd(phi + i);
    const __m256d q = _mm256_add_pd(_mm256_mul_pd(z, z), _mm256_mul_pd(sixteen, _mm256_mul_pd(p, p)));
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(q, bound, _CMP_LT_OQ));
    for (int lane = 0; lane < 4; ++lane) mask[i + lane] = static_cast<std::uint8_t>((bits >> lane) & 1);
    hits += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
  }
  for (; i < count; ++i) {
    const bool inside = gauge_quartic(z2[i], phi[i]) < r4;
    mask[i] = inside ? 1 : 0;
    hits += inside ? 1 : 0;
  }
  return hits;
}

void group_mul_avx2(const MulBatchArgs& a) {
  const std::size_t m = a.count;
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int k = 0; k < a.dim; ++k) {
      const std::size_t j = static_cast<std::size_t>(k) * m + i;
      const __m256d x1 = _mm256_loadu_pd(a.x1 + j);
      const __m256d y1 = _mm256_loadu_pd(a.y1 + j);
      const __m256d x2 = _mm256_loadu_pd(a.x2 + j);
      const __m256d y2 = _mm256_loadu_pd(a.y2 + j);
      acc = _mm256_add_pd(acc, _mm256_sub_pd(_mm256_mul_pd(x1, y2), _mm256_mul_pd(y1, x2)));
      _mm256_storeu_pd(a.x_out + j, _mm256_add_pd(x1, x2));
      _mm256_storeu_pd(a.y_out + j, _mm256_add_pd(y1, y2));
    }
    const __m256d p = _mm256_add_pd(_mm256_loadu_pd(a.phi1 + i), _mm256_loadu_pd(a.phi2 + i));
    _mm256_storeu_pd(a.phi_out + i, _mm256_add_pd(p, _mm256_mul_pd(half, acc)));
  }
  for (; i < m; ++i) {
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

void area_integrand_2d_avx2(const double* s11, const double* s12, const double* s22, double* out,
                            std::size_t count) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d a = _mm256_loadu_pd(s11 + i);
    const __m256d b = _mm256_loadu_pd(s12 + i);
    const __m256d c = _mm256_loadu_pd(s22 + i);
    const __m256d bb = _mm256_mul_pd(b, b);
    const __m256d p = _mm256_add_pd(_mm256_add_pd(one, _mm256_mul_pd(a, a)), bb);
    const __m256d q = _mm256_add_pd(_mm256_add_pd(one, bb), _mm256_mul_pd(c, c));
    const __m256d t = _mm256_mul_pd(b, _mm256_add_pd(a, c));
    const __m256d det = _mm256_sub_pd(_mm256_mul_pd(p, q), _mm256_mul_pd(t, t));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(det));
  }
  for (; i < count; ++i) out[i] = std::sqrt(area_det_2d(s11[i], s12[i], s22[i]));
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{fk_gauge_avx2, gauge_ball_mask_avx2, group_mul_avx2,
                                 area_integrand_2d_avx2};
  return table;
}

}  // namespace heis::simd::detail

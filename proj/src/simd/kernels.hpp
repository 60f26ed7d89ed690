#pragma once

#include <cstddef>
#include <cstdint>

#include "heis/simd.hpp"

namespace heis::simd::detail {

struct KernelTable {
  void (*fk_gauge)(const double* z2, const double* phi, double* out, std::size_t count);
  std::size_t (*gauge_ball_mask)(const double* z2, const double* phi, double r4,
                                 std::uint8_t* mask, std::size_t count);
  void (*group_mul)(const MulBatchArgs& args);
  void (*area_integrand_2d)(const double* s11, const double* s12, const double* s22,
                            double* out, std::size_t count);
};

const KernelTable& scalar_table();
#if defined(HEIS_BUILD_AVX2)
const KernelTable& avx2_table();
#endif

// Reference formulas shared by the scalar table and the SIMD tails. The
// operation order here is the contract every variant reproduces.
inline double gauge_quartic(double z2, double phi) { return z2 * z2 + 16.0 * (phi * phi); }

inline double area_det_2d(double a, double b, double c) {
  const double p = (1.0 + a * a) + b * b;
  const double q = (1.0 + b * b) + c * c;
  const double t = b * (a + c);
  return p * q - t * t;
}

}  // namespace heis::simd::detail

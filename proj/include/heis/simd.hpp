#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Batched arithmetic kernels with a scalar reference implementation and
// optional SIMD variants chosen at runtime. Every variant performs the same
// IEEE operations in the same order (no FMA, correctly rounded sqrt), so all
// variants return bit-identical results.
namespace heis::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
// True if the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);
// Best available variant; HEIS_SIMD=scalar in the environment forces scalar.
Isa detected_isa();
Isa active_isa();
// Throws ValidationError if `isa` is not available.
void set_active_isa(Isa isa);

// out[i] = (z2[i]^2 + 16 phi[i]^2)^(1/4), the Folland-Koranyi gauge from
// |z|^2 and phi.
void fk_gauge(std::span<const double> z2, std::span<const double> phi, std::span<double> out);
void fk_gauge(Isa isa, std::span<const double> z2, std::span<const double> phi,
              std::span<double> out);

// mask[i] = 1 iff z2[i]^2 + 16 phi[i]^2 < r4, i.e. the point lies in the
// open gauge ball of radius r4^(1/4). Returns the number of set entries.
std::size_t gauge_ball_mask(std::span<const double> z2, std::span<const double> phi, double r4,
                            std::span<std::uint8_t> mask);
std::size_t gauge_ball_mask(Isa isa, std::span<const double> z2, std::span<const double> phi,
                            double r4, std::span<std::uint8_t> mask);

// Heisenberg vertical coordinate of a product over a batch in structure-of-
// arrays layout: coordinate k of point i lives at [k * count + i].
// phi_out[i] = phi1[i] + phi2[i] + 1/2 sum_k (x1 y2 - y1 x2).
struct MulBatchArgs {
  int dim = 0;
  std::size_t count = 0;
  const double* x1 = nullptr;
  const double* y1 = nullptr;
  const double* phi1 = nullptr;
  const double* x2 = nullptr;
  const double* y2 = nullptr;
  const double* phi2 = nullptr;
  double* x_out = nullptr;
  double* y_out = nullptr;
  double* phi_out = nullptr;
};
void group_mul(const MulBatchArgs& args);
void group_mul(Isa isa, const MulBatchArgs& args);

// Area integrand sqrt(det(I + S^2)) for symmetric 2x2 S = [[s11, s12], [s12, s22]].
void area_integrand_2d(std::span<const double> s11, std::span<const double> s12,
                       std::span<const double> s22, std::span<double> out);
void area_integrand_2d(Isa isa, std::span<const double> s11, std::span<const double> s12,
                       std::span<const double> s22, std::span<double> out);

}  // namespace heis::simd

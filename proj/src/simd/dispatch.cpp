#include <atomic>
#include <cstdlib>
#include <string>

#include "heis/errors.hpp"
#include "kernels.hpp"

namespace heis::simd {
namespace {

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(detected_isa())};
  return slot;
}

const detail::KernelTable& table_for(Isa isa) {
#if defined(HEIS_BUILD_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  (void)isa;
  return detail::scalar_table();
}

void check_sizes(std::size_t expected, std::size_t a, std::size_t b) {
  if (a != expected || b != expected) throw ValidationError("simd kernel: mismatched batch sizes");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(HEIS_BUILD_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detected_isa() {
  if (const char* env = std::getenv("HEIS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() { return static_cast<Isa>(active_slot().load()); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw ValidationError("simd variant not available on this machine: " + std::string(isa_name(isa)));
  }
  active_slot().store(static_cast<int>(isa));
}

void fk_gauge(Isa isa, std::span<const double> z2, std::span<const double> phi, std::span<double> out) {
  check_sizes(out.size(), z2.size(), phi.size());
  table_for(isa).fk_gauge(z2.data(), phi.data(), out.data(), out.size());
}
void fk_gauge(std::span<const double> z2, std::span<const double> phi, std::span<double> out) {
  fk_gauge(active_isa(), z2, phi, out);
}

std::size_t gauge_ball_mask(Isa isa, std::span<const double> z2, std::span<const double> phi,
                            double r4, std::span<std::uint8_t> mask) {
  check_sizes(mask.size(), z2.size(), phi.size());
  return table_for(isa).gauge_ball_mask(z2.data(), phi.data(), r4, mask.data(), mask.size());
}
std::size_t gauge_ball_mask(std::span<const double> z2, std::span<const double> phi, double r4,
                            std::span<std::uint8_t> mask) {
  return gauge_ball_mask(active_isa(), z2, phi, r4, mask);
}

void group_mul(Isa isa, const MulBatchArgs& args) {
  if (args.dim < 1) throw ValidationError("simd group_mul: dimension must be positive");
  table_for(isa).group_mul(args);
}
void group_mul(const MulBatchArgs& args) { group_mul(active_isa(), args); }

void area_integrand_2d(Isa isa, std::span<const double> s11, std::span<const double> s12,
                       std::span<const double> s22, std::span<double> out) {
  check_sizes(out.size(), s11.size(), s12.size());
  check_sizes(out.size(), s22.size(), s22.size());
  table_for(isa).area_integrand_2d(s11.data(), s12.data(), s22.data(), out.data(), out.size());
}
void area_integrand_2d(std::span<const double> s11, std::span<const double> s12,
                       std::span<const double> s22, std::span<double> out) {
  area_integrand_2d(active_isa(), s11, s12, s22, out);
}

}  // namespace heis::simd

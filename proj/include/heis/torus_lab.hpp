#pragma once

#include <cstdint>
#include <vector>

#include "heis/heis_core.hpp"

namespace heis {

// Lift of the generalized Clifford torus,
//   t -> (cos t_i - 1, sin t_i, 1/2 sum (t_i - sin t_i)).
HeisPoint torus_lift(const Eigen::VectorXd& t);
// d/dt_i of the lift in closed form.
std::vector<TangentVector> torus_frame(const Eigen::VectorXd& t);

// max |theta(d lift / dt_i)| over `samples` random parameters.
double legendrian_residual_torus(int n, std::size_t samples, std::uint64_t seed = 1);
// max relative error between the closed-form frame and centered
// differences of the lift.
double torus_frame_fd_error(int n, std::size_t samples, std::uint64_t seed = 1);

struct RatioRecord {
  int n = 0;
  double r = 0.0;
  double volume_estimate = 0.0;
  double std_error = 0.0;
  double ratio = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t hits = 0;
  // Diagnostics: the truncation T of the t_1 range, max |t_1| over hits,
  // and the sandwich defect max(0, max |t mod 2 pi| / r - 1) over hits.
  double t1_bound = 0.0;
  double max_hit_t1 = 0.0;
  double sandwich_delta = 0.0;
};

bool operator==(const RatioRecord& a, const RatioRecord& b);

// Stratified Monte Carlo estimate of |{t in C_0 : gauge(lift(t)) < r}|.
// See the README for the reduction of the sampling domain.
RatioRecord ball_volume(int n, double r, std::uint64_t samples, std::uint64_t seed);

// ball_volume at each radius with the same seed (common random numbers).
std::vector<RatioRecord> ratio_profile(int n, const std::vector<double>& radii, std::uint64_t samples,
                                       std::uint64_t seed);

// The truncation T = r^2/2 + 2 pi n + n.
double torus_t1_bound(int n, double r);

}  // namespace heis

#include "heis/torus_lab.hpp"

#include <cmath>
#include <numbers>

#include "heis/errors.hpp"
#include "heis/legendrian_graph.hpp"
#include "heis/parallel.hpp"
#include "heis/simd.hpp"

namespace heis {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based uniform in [0, 1): depends only on (seed, index, dim).
double uniform(std::uint64_t seed, std::uint64_t index, int dim) {
  const std::uint64_t key = mix64(seed) ^ mix64(index * 0x632be59bd9b4e019ull + static_cast<std::uint64_t>(dim));
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

Eigen::VectorXd random_t(int n, std::uint64_t seed, std::uint64_t index) {
  Eigen::VectorXd t(n);
  t[0] = -20.0 + 40.0 * uniform(seed, index, 0);
  for (int k = 1; k < n; ++k) t[k] = kTwoPi * uniform(seed, index, k);
  return t;
}

struct Stratum {
  double lo = 0.0;
  double len = 0.0;
  std::uint64_t first = 0;  // global index of its first sample
  std::uint64_t count = 0;
};

}  // namespace

HeisPoint torus_lift(const Eigen::VectorXd& t) {
  const int n = static_cast<int>(t.size());
  require_dim(n);
  HeisPoint p{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0};
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    p.x[i] = std::cos(t[i]) - 1.0;
    p.y[i] = std::sin(t[i]);
    s += t[i] - std::sin(t[i]);
  }
  p.phi = 0.5 * s;
  return p;
}

std::vector<TangentVector> torus_frame(const Eigen::VectorXd& t) {
  const int n = static_cast<int>(t.size());
  require_dim(n);
  std::vector<TangentVector> out;
  for (int i = 0; i < n; ++i) {
    TangentVector v(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.5 * (1.0 - std::cos(t[i])));
    v.u[i] = -std::sin(t[i]);
    v.v[i] = std::cos(t[i]);
    out.push_back(std::move(v));
  }
  return out;
}

double legendrian_residual_torus(int n, std::size_t samples, std::uint64_t seed) {
  require_dim(n);
  if (samples < 1) throw ValidationError("legendrian_residual_torus: samples must be >= 1");
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd t = random_t(n, seed, s);
    const HeisPoint p = torus_lift(t);
    for (const auto& v : torus_frame(t)) worst = std::max(worst, std::abs(contact_eval(p, v)));
  }
  return worst;
}

double torus_frame_fd_error(int n, std::size_t samples, std::uint64_t seed) {
  require_dim(n);
  const double step = 1e-5;
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd t = random_t(n, seed, s);
    const auto frame = torus_frame(t);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd tp = t, tm = t;
      tp[i] += step;
      tm[i] -= step;
      const HeisPoint a = torus_lift(tp), b = torus_lift(tm);
      Eigen::VectorXd fd(2 * n + 1), ex(2 * n + 1);
      fd << (a.x - b.x) / (2 * step), (a.y - b.y) / (2 * step), (a.phi - b.phi) / (2 * step);
      const auto& f = frame[static_cast<std::size_t>(i)];
      ex << f.u, f.v, f.w;
      worst = std::max(worst, (fd - ex).norm() / std::max(ex.norm(), 1e-300));
    }
  }
  return worst;
}

bool operator==(const RatioRecord& a, const RatioRecord& b) {
  return a.n == b.n && a.r == b.r && a.volume_estimate == b.volume_estimate && a.std_error == b.std_error &&
         a.ratio == b.ratio && a.samples == b.samples && a.seed == b.seed && a.hits == b.hits &&
         a.t1_bound == b.t1_bound && a.max_hit_t1 == b.max_hit_t1 && a.sandwich_delta == b.sandwich_delta;
}

double torus_t1_bound(int n, double r) { return 0.5 * r * r + kTwoPi * n + n; }

RatioRecord ball_volume(int n, double r, std::uint64_t samples, std::uint64_t seed) {
  require_dim(n);
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("ball_volume: r must be positive");
  if (samples < 1000) throw ValidationError("ball_volume: at least 1000 samples required");

  const double T = torus_t1_bound(n, r);
  // gauge < r forces |z| < r, hence 2 |sin(t_i / 2)| < r: every t_i lies
  // within alpha of 2 pi Z.
  const double alpha = r < 2.0 ? 2.0 * std::asin(0.5 * r) : std::numbers::pi;

  std::vector<Stratum> strata;
  if (r < 2.0) {
    const auto kmax = static_cast<long>(std::ceil((T + alpha) / kTwoPi));
    for (long k = -kmax; k <= kmax; ++k) {
      const double lo = std::max(-T, kTwoPi * k - alpha);
      const double hi = std::min(T, kTwoPi * k + alpha);
      if (hi > lo) strata.push_back({lo, hi - lo});
    }
  } else {
    auto K = static_cast<std::uint64_t>(std::ceil(2.0 * T / kTwoPi));
    K = std::max<std::uint64_t>(1, std::min<std::uint64_t>(K, samples / 64));
    const double len = 2.0 * T / static_cast<double>(K);
    for (std::uint64_t k = 0; k < K; ++k) strata.push_back({-T + len * static_cast<double>(k), len});
  }
  // Proportional allocation, largest remainders first (ties by order).
  double total_len = 0.0;
  for (const auto& s : strata) total_len += s.len;
  std::uint64_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> rem;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const double exact = static_cast<double>(samples) * strata[i].len / total_len;
    strata[i].count = static_cast<std::uint64_t>(std::floor(exact));
    assigned += strata[i].count;
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < samples; ++k, ++assigned) strata[rem[k % rem.size()].second].count += 1;
  std::uint64_t first = 0;
  for (auto& s : strata) {
    s.first = first;
    first += s.count;
  }

  // Work items never straddle strata.
  struct Item {
    std::size_t stratum;
    std::uint64_t begin, end;
  };
  constexpr std::uint64_t kBatch = 4096;
  std::vector<Item> items;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    for (std::uint64_t b = 0; b < strata[i].count; b += kBatch) {
      items.push_back({i, strata[i].first + b, strata[i].first + std::min(strata[i].count, b + kBatch)});
    }
  }
  std::vector<std::uint64_t> item_hits(items.size(), 0);
  std::vector<double> item_t1(items.size(), 0.0), item_delta(items.size(), 0.0);
  const double r4 = r * r * r * r;

  parallel::for_chunks(items.size(), 1, [&](std::size_t idx, std::size_t, std::size_t) {
    const Item& it = items[idx];
    const Stratum& st = strata[it.stratum];
    const auto m = static_cast<std::size_t>(it.end - it.begin);
    std::vector<double> z2(m), phi(m), t1(m), tnorm(m);
    std::vector<std::uint8_t> mask(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint64_t g = it.begin + j;
      const double a = st.lo + st.len * uniform(seed, g, 0);
      double zz = 0.0, ph = 0.0, tn = 0.0;
      for (int k = 0; k < n; ++k) {
        double t = a;
        if (k > 0) {
          t = (2.0 * uniform(seed, g, k) - 1.0) * alpha;
          if (t < 0.0) t += kTwoPi;
        }
        const double c = std::cos(t) - 1.0, s = std::sin(t);
        zz += c * c + s * s;
        ph += t - s;
        const double red = t - kTwoPi * std::nearbyint(t / kTwoPi);
        tn += red * red;
      }
      z2[j] = zz;
      phi[j] = 0.5 * ph;
      t1[j] = a;
      tnorm[j] = std::sqrt(tn);
    }
    item_hits[idx] = simd::gauge_ball_mask(z2, phi, r4, mask);
    double mt = 0.0, md = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!mask[j]) continue;
      mt = std::max(mt, std::abs(t1[j]));
      md = std::max(md, tnorm[j] / r - 1.0);
    }
    item_t1[idx] = mt;
    item_delta[idx] = md;
  });

  std::vector<std::uint64_t> hits(strata.size(), 0);
  RatioRecord rec;
  for (std::size_t i = 0; i < items.size(); ++i) {
    hits[items[i].stratum] += item_hits[i];
    rec.max_hit_t1 = std::max(rec.max_hit_t1, item_t1[i]);
    rec.sandwich_delta = std::max(rec.sandwich_delta, item_delta[i]);
  }
  const double cross = std::pow(2.0 * alpha, n - 1);
  std::vector<double> vol(strata.size()), var(strata.size());
  for (std::size_t i = 0; i < strata.size(); ++i) {
    rec.hits += hits[i];
    if (strata[i].count == 0) continue;
    const double D = strata[i].len * cross;
    const double p = static_cast<double>(hits[i]) / static_cast<double>(strata[i].count);
    vol[i] = D * p;
    var[i] = D * D * p * (1.0 - p) / static_cast<double>(strata[i].count);
  }
  rec.n = n;
  rec.r = r;
  rec.samples = samples;
  rec.seed = seed;
  rec.t1_bound = T;
  rec.volume_estimate = parallel::pairwise_sum(vol);
  rec.std_error = std::sqrt(parallel::pairwise_sum(var));
  rec.ratio = rec.volume_estimate / (unit_ball_volume(n) * std::pow(r, n));
  return rec;
}

std::vector<RatioRecord> ratio_profile(int n, const std::vector<double>& radii, std::uint64_t samples,
                                       std::uint64_t seed) {
  std::vector<RatioRecord> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(ball_volume(n, r, samples, seed));
  return out;
}

}  // namespace heis

#include "heis/wedge.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "heis/config.hpp"
#include "heis/errors.hpp"

namespace heis {
namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      A(i, j) = scale * gauss(rng);
      A(j, i) = A(i, j);
    }
  }
  return A;
}

// Log-uniform tilt scale so samples cover both nearly horizontal and steep planes.
double random_tilt_scale(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> expo(-2.0, 1.5);
  return std::pow(10.0, expo(rng));
}

void require_same_n(const SimpleNVector& a, const SimpleNVector& b) {
  if (a.n() != b.n() || a.n() == 0 || a.factors.front().size() != b.factors.front().size()) {
    throw ValidationError("n-vector dimension mismatch");
  }
}

double gram_det(const Eigen::MatrixXd& H, const SimpleNVector& a, const SimpleNVector& b) {
  require_same_n(a, b);
  if (a.factors.front().size() != H.rows()) throw ValidationError("n-vector / metric dimension mismatch");
  return (a.columns().transpose() * H * b.columns()).determinant();
}

MetricConstants sample_constants(const MetricForm& h, int samples, std::uint64_t seed) {
  const int n = h.n();
  std::mt19937_64 rng(seed);
  MetricConstants c;
  c.samples = samples;
  c.mass_lower = std::numeric_limits<double>::infinity();
  c.mass_upper = 0.0;
  c.ellipticity = std::numeric_limits<double>::infinity();
  c.coercivity = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const SimpleNVector p = graph_plane_nvector(random_symmetric(rng, n, random_tilt_scale(rng)));
    const SimpleNVector w = graph_plane_nvector(random_symmetric(rng, n, random_tilt_scale(rng)));
    const double hp = std::sqrt(nvector_inner(h, p, p));
    const double hw = std::sqrt(nvector_inner(h, w, w));
    c.mass_lower = std::min(c.mass_lower, hp);
    c.mass_upper = std::max(c.mass_upper, hp);

    const double dist = nvector_dist_sq(p, w);
    if (dist > 1e-8) {
      c.coercivity = std::min(c.coercivity, (hp - nvector_inner(h, p, w) / hw) / dist);
    }

    // Orthogonalize w against p in g_H; the result is a sum of two simple n-vectors.
    const double pw = nvector_inner(p, w);
    NVectorSum perp(w);
    perp.add(-pw, p);
    const double perp_norm2 = nvector_inner(perp, perp);
    if (perp_norm2 > 1e-8) {
      const NVectorSum ps(p);
      const double hpp = nvector_inner(h, ps, ps);
      const double hqq = nvector_inner(h, perp, perp);
      const double hpq = nvector_inner(h, ps, perp);
      c.ellipticity = std::min(c.ellipticity, (hpp * hqq - hpq * hpq) / perp_norm2);
    }
  }
  return c;
}

}  // namespace

MetricForm::MetricForm(Eigen::MatrixXd H, int samples, std::uint64_t seed) : H_(std::move(H)) {
  if (H_.rows() != H_.cols() || H_.rows() < 2 || H_.rows() % 2 != 0) {
    throw ValidationError("constructed-metric error: H must be 2n x 2n");
  }
  if (!H_.allFinite()) throw ValidationError("constructed-metric error: non-finite entries");
  n_ = static_cast<int>(H_.rows() / 2);
  const double scale = 1.0 + H_.cwiseAbs().maxCoeff();
  if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry * scale) {
    throw ValidationError("constructed-metric error: H is not symmetric");
  }
  H_ = 0.5 * (H_ + H_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw ValidationError("constructed-metric error: H is not positive definite");
  }
  if (samples < 1) throw ValidationError("constructed-metric error: need at least one sample");
  constants_ = sample_constants(*this, samples, seed);
  if (!(constants_.mass_lower > 0.0) || !(constants_.ellipticity > 0.0) || !(constants_.coercivity >= 0.0)) {
    throw ValidationError("constructed-metric error: sampled ellipticity constants are not positive");
  }
}

MetricForm MetricForm::identity(int n) { return scaled_identity(n, 1.0); }

MetricForm MetricForm::scaled_identity(int n, double c) {
  if (n < 1) throw ValidationError("dimension n must be >= 1");
  return MetricForm(c * Eigen::MatrixXd::Identity(2 * n, 2 * n));
}

bool operator==(const MetricForm& a, const MetricForm& b) {
  return a.n() == b.n() && a.matrix() == b.matrix();
}

SimpleNVector::SimpleNVector(std::vector<Eigen::VectorXd> f) : factors(std::move(f)) {
  const auto n = static_cast<Eigen::Index>(factors.size());
  for (const auto& v : factors) {
    if (v.size() != 2 * n) throw ValidationError("SimpleNVector: factors must have length 2n");
  }
}

SimpleNVector SimpleNVector::from_columns(const Eigen::MatrixXd& M) {
  std::vector<Eigen::VectorXd> f;
  for (Eigen::Index j = 0; j < M.cols(); ++j) f.emplace_back(M.col(j));
  return SimpleNVector(std::move(f));
}

Eigen::MatrixXd SimpleNVector::columns() const {
  Eigen::MatrixXd M(2 * n(), n());
  for (int j = 0; j < n(); ++j) M.col(j) = factors[static_cast<std::size_t>(j)];
  return M;
}

SimpleNVector SimpleNVector::scaled(double c) const {
  SimpleNVector out = *this;
  if (!out.factors.empty()) out.factors.front() *= c;
  return out;
}

NVectorSum& NVectorSum::add(double c, SimpleNVector a) {
  coeffs.push_back(c);
  terms.push_back(std::move(a));
  return *this;
}

NVectorSum operator-(const NVectorSum& a, const NVectorSum& b) {
  NVectorSum out = a;
  for (std::size_t k = 0; k < b.terms.size(); ++k) out.add(-b.coeffs[k], b.terms[k]);
  return out;
}

SimpleNVector basis_pi0(int n) {
  if (n < 1) throw ValidationError("dimension n must be >= 1");
  std::vector<Eigen::VectorXd> f;
  for (int i = 0; i < n; ++i) f.emplace_back(Eigen::VectorXd::Unit(2 * n, i));
  return SimpleNVector(std::move(f));
}

SimpleNVector basis_pij(int n, int i, int j) {
  if (n < 1 || i < 0 || i >= n || j < 0 || j >= n) {
    throw ValidationError("basis_pij: index out of range");
  }
  SimpleNVector p = basis_pi0(n);
  p.factors[static_cast<std::size_t>(i)] = Eigen::VectorXd::Unit(2 * n, n + j);
  return p;
}

SimpleNVector graph_plane_nvector(const Eigen::MatrixXd& A, bool normalized) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || n < 1) throw ValidationError("graph plane chart must be square");
  Eigen::MatrixXd T(2 * n, n);
  T << Eigen::MatrixXd::Identity(n, n), A;
  SimpleNVector p = SimpleNVector::from_columns(T);
  if (!normalized) return p;
  return p.scaled(1.0 / std::sqrt((T.transpose() * T).determinant()));
}

double nvector_inner(const MetricForm& h, const SimpleNVector& a, const SimpleNVector& b) {
  return gram_det(h.matrix(), a, b);
}

double nvector_inner(const SimpleNVector& a, const SimpleNVector& b) {
  require_same_n(a, b);
  return (a.columns().transpose() * b.columns()).determinant();
}

double nvector_inner(const MetricForm& h, const NVectorSum& a, const NVectorSum& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    for (std::size_t j = 0; j < b.terms.size(); ++j) {
      s += a.coeffs[i] * b.coeffs[j] * nvector_inner(h, a.terms[i], b.terms[j]);
    }
  }
  return s;
}

double nvector_inner(const NVectorSum& a, const NVectorSum& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    for (std::size_t j = 0; j < b.terms.size(); ++j) {
      s += a.coeffs[i] * b.coeffs[j] * nvector_inner(a.terms[i], b.terms[j]);
    }
  }
  return s;
}

double nvector_dist_sq(const SimpleNVector& a, const SimpleNVector& b) {
  return nvector_inner(a, a) - 2.0 * nvector_inner(a, b) + nvector_inner(b, b);
}

MetricBounds metric_bounds(const MetricForm& h, int samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("metric_bounds: samples must be >= 1");
  std::mt19937_64 rng(seed);
  MetricBounds b{std::numeric_limits<double>::infinity(), 0.0};
  for (int s = 0; s < samples; ++s) {
    const SimpleNVector p = graph_plane_nvector(random_symmetric(rng, h.n(), random_tilt_scale(rng)));
    const double norm = std::sqrt(nvector_inner(h, p, p));
    b.lower = std::min(b.lower, norm);
    b.upper = std::max(b.upper, norm);
  }
  return b;
}

}  // namespace heis

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "heis/area_minimizer.hpp"
#include "heis/errors.hpp"
#include "heis/excess_lab.hpp"
#include "support.hpp"

using namespace heis;

namespace {

ScalarField quadratic(int n, int points, double half_width, const Eigen::MatrixXd& A) {
  return ScalarField::sample(n, points, half_width, [&A](const SmallVec& x) {
    return 0.5 * x.dot(A * Eigen::VectorXd(x));
  });
}

CylinderSpec cylinder(const ScalarField& v, double r, Eigen::MatrixXd A = {}) {
  const int n = v.n();
  if (A.size() == 0) A = Eigen::MatrixXd::Zero(n, n);
  return CylinderSpec{phi_map(v, SmallVec::Zero(n)), r, A, 1};
}

ScalarField bump(double eps, int points = 65, double half_width = 1.0) {
  return ScalarField::sample(2, points, half_width, [eps](const SmallVec& x) {
    const double dx = x[0] - 0.35, dy = x[1] - 0.2;
    return eps * std::exp(-(dx * dx + dy * dy));
  });
}

}  // namespace

TEST_SUITE("excess_lab") {

TEST_CASE("flat graph has no excess") {
  const ScalarField zero(2, 33, 1.0);
  const ExcessEvaluation e = evaluate_excess(LegendrianGraph(zero), cylinder(zero, 0.6));
  CHECK(e.excess == 0.0);
  CHECK(e.deficit == 0.0);
  const BestPlane bp = best_plane(zero, phi_map(zero, SmallVec::Zero(2)), 0.6);
  CHECK(bp.A.norm() < 1e-12);
  CHECK(bp.excess < 1e-20);
}

TEST_CASE("one dimensional parabola") {
  const auto v = quadratic(1, 129, 1.5, Eigen::MatrixXd::Identity(1, 1));
  CHECK(cylindrical_excess(v, cylinder(v, 1.0)) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-3));
}

TEST_CASE("constant Hessian against its own plane and against pi_0") {
  std::mt19937_64 rng(31);
  for (int n = 1; n <= 3; ++n) {
    const Eigen::MatrixXd A0 = test::random_symmetric(rng, n, 0.5 / n);
    const int points = n == 3 ? 33 : 65;
    const auto v = quadratic(n, points, 1.0, A0);
    CHECK(cylindrical_excess(v, cylinder(v, 0.5, A0)) < 1e-8);
    const double expect =
        unit_ball_volume(n) * (std::sqrt((Eigen::MatrixXd::Identity(n, n) + A0 * A0).determinant()) - 1.0);
    const ExcessEvaluation e = evaluate_excess(LegendrianGraph(v), cylinder(v, 0.5));
    CHECK(e.excess == doctest::Approx(expect).epsilon(1e-3));
    CHECK(e.discrepancy < 1e-6);
    const BestPlane bp = best_plane(v, phi_map(v, SmallVec::Zero(n)), 0.5);
    CHECK((bp.A - A0).norm() < 1e-6);
    CHECK(bp.excess <= bp.seed_excess);
  }
}

TEST_CASE("invalid cylinders") {
  const ScalarField zero(2, 33, 1.0);
  CHECK_THROWS_AS(cylindrical_excess(zero, cylinder(zero, 0.0)), ValidationError);
  CHECK_THROWS_AS(cylindrical_excess(zero, cylinder(zero, 0.5, 2.0 * Eigen::MatrixXd::Identity(2, 2))), ValidationError);
  Eigen::MatrixXd skew(2, 2);
  skew << 0, 0.1, -0.1, 0;
  CHECK_THROWS_AS(cylindrical_excess(zero, cylinder(zero, 0.5, skew)), ValidationError);
  CHECK_THROWS_AS(cylindrical_excess(zero, cylinder(zero, 0.99)), ValidationError);
}

TEST_CASE("deficit and tilt forms agree") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double a = 0.2 * u(rng), b = 0.2 * u(rng), c = u(rng), w = 1.0 + 0.5 * u(rng);
    const auto v = ScalarField::sample(2, 65, 1.0, [=](const SmallVec& x) {
      return a * std::sin(w * x[0] + c * x[1]) + b * x[0] * x[0] * x[1];
    });
    const ExcessEvaluation e = evaluate_excess(LegendrianGraph(v), cylinder(v, 0.6));
    CHECK(e.discrepancy < 1e-6);
    // The best plane never does worse than pi_0.
    CHECK(best_plane(v, phi_map(v, SmallVec::Zero(2)), 0.6).excess <= e.excess);
  }
}

TEST_CASE("best plane tilt is controlled by the excess") {
  // |A_best|^2 <= (4 / omega_n) E at pi_0 on a smooth family.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double C = 4.0 / std::numbers::pi;
  for (int k = 0; k < 5; ++k) {
    const double a = 0.3 * u(rng), b = 0.3 * u(rng), c = 0.3 * u(rng), d = 0.2 * u(rng);
    const auto v = ScalarField::sample(2, 65, 1.0, [=](const SmallVec& x) {
      return 0.5 * (a * x[0] * x[0] + 2 * b * x[0] * x[1] + c * x[1] * x[1]) + d * std::sin(2 * x[0] - x[1]);
    });
    const HeisPoint center = phi_map(v, SmallVec::Zero(2));
    const BestPlane bp = best_plane(v, center, 0.5);
    const double e0 = cylindrical_excess(v, CylinderSpec{center, 0.5, Eigen::MatrixXd::Zero(2, 2), 1});
    CHECK(bp.A.squaredNorm() <= C * e0);
  }
}

TEST_CASE("height oscillation") {
  const auto v1 = quadratic(1, 49, 1.5, Eigen::MatrixXd::Identity(1, 1));
  const HeightOscillation h1 = height_oscillation(v1, cylinder(v1, 1.0));
  CHECK(h1.q_osc == doctest::Approx(1.0).epsilon(1e-12));

  const auto aff = ScalarField::sample(2, 33, 1.0, [](const SmallVec& x) { return 0.3 - 0.2 * x[0] + 0.7 * x[1]; });
  const HeightOscillation h2 = height_oscillation(aff, cylinder(aff, 0.8));
  CHECK(h2.q_osc < 1e-12);
  CHECK(h2.phi_osc < 1e-12);

  double prev_e = -1.0, prev_q = -1.0;
  for (double eps : {0.05, 0.1, 0.2, 0.4}) {
    const auto v = bump(eps);
    const double e = cylindrical_excess(v, cylinder(v, 0.6));
    const double q = height_oscillation(v, cylinder(v, 0.6)).q_osc;
    CHECK(e > prev_e);
    CHECK(q >= prev_q);
    prev_e = e;
    prev_q = q;
  }
}

TEST_CASE("excess is covariant under dilations") {
  // v_s(x) = s^-2 v(s x) is the graph image under the dilation by 1/s.
  const double s = 0.5;
  auto f = [](const SmallVec& x) { return 0.3 * std::sin(x[0] + 0.4 * x[1]) * std::cos(0.7 * x[1]); };
  const auto v = ScalarField::sample(2, 129, 1.0, f);
  const auto vs = ScalarField::sample(2, 97, 1.0 / s, [&](const SmallVec& x) { return f(s * x) / (s * s); });
  for (double rho : {0.6, 1.2}) {
    const double a = cylindrical_excess(vs, cylinder(vs, rho));
    const double b = cylindrical_excess(v, cylinder(v, s * rho));
    CHECK(b > 1e-3);
    CHECK(std::abs(a - b) < 1e-4);
  }
}

TEST_CASE("decay profile of flat and curved data") {
  const ExcessReport flat = decay_profile(ScalarField(2, 33, 1.0), {0.4, 0.2, 0.1});
  CHECK(flat.flat_exact);
  CHECK(std::isnan(flat.fitted_exponent));
  CHECK_THROWS_AS(decay_profile(ScalarField(2, 33, 1.0), {0.2, 0.4}), ValidationError);

  const MinimizeResult m = minimize(MinimizeProblem{MetricForm::identity(2), bump(0.2), {}});
  REQUIRE(m.converged);
  const ExcessReport rep = decay_profile(m.v_star, {0.4, 0.2, 0.1, 0.05});
  CHECK(!rep.flat_exact);
  CHECK(rep.fitted_exponent >= 1.7);
  CHECK(rep.fitted_exponent <= 2.3);
  for (const auto& r : rep.records) {
    CHECK(r.excess_best <= r.excess_pi0);
    CHECK(r.excess_best >= 0.0);
  }
}

TEST_CASE("epsilon regularity certificate") {
  const EpsRegularityReport z = eps_regularity_certificate(ScalarField(2, 33, 1.0), 0.6);
  for (double q : z.quantities) CHECK(q == 0.0);

  Eigen::MatrixXd A(2, 2);
  A << 0.3, 0.1, 0.1, -0.2;
  const EpsRegularityReport q = eps_regularity_certificate(quadratic(2, 65, 1.0, A), 0.6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  CHECK(q.quantities[2] == doctest::Approx(es.eigenvalues().cwiseAbs().maxCoeff()).epsilon(1e-10));
  CHECK(q.quantities[3] < 1e-10);
  CHECK(q.rhs > 0.0);

  // Minimizers of halving bump data keep their ratios within twice the
  // family median.
  std::vector<std::array<double, 4>> ratios;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const MinimizeResult m = minimize(MinimizeProblem{MetricForm::identity(2), bump(eps), {}});
    const EpsRegularityReport r = eps_regularity_certificate(m.v_star, 0.6);
    ratios.push_back({r.ratios[0], r.ratios[1], r.ratios[2], r.ratios[3]});
  }
  for (int k = 0; k < 4; ++k) {
    std::vector<double> col;
    for (const auto& r : ratios) col.push_back(r[static_cast<std::size_t>(k)]);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[1] + sorted[2]);
    for (double c : col) CHECK(c <= 2.0 * median);
  }
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <complex>

#include "heis/errors.hpp"
#include "heis/heis_core.hpp"
#include "support.hpp"

using namespace heis;
using heis::test::point;
using heis::test::random_point;

namespace {

double max_diff(const HeisPoint& a, const HeisPoint& b) {
  return std::max({(a.x - b.x).cwiseAbs().maxCoeff(), (a.y - b.y).cwiseAbs().maxCoeff(), std::abs(a.phi - b.phi)});
}

UnitaryMatrix random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
  return qr.householderQ();
}

}  // namespace

TEST_SUITE("heis_core") {

TEST_CASE("group law on hand-evaluated points") {
  const HeisPoint p = group_mul(point({1}, {0}, 0), point({0}, {1}, 0));
  CHECK(p.x[0] == 1.0);
  CHECK(p.y[0] == 1.0);
  CHECK(p.phi == 0.5);
  // (1,2,3)(4,5,6) = (5, 7, 9 + (1*5 - 2*4)/2)
  const HeisPoint q = group_mul(point({1}, {2}, 3), point({4}, {5}, 6));
  CHECK(q.phi == doctest::Approx(7.5).epsilon(1e-15));
}

TEST_CASE("identity and inverse") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    const HeisPoint e = HeisPoint::identity(n);
    CHECK(max_diff(group_inv(e), e) == 0.0);
    for (int k = 0; k < 2000; ++k) {
      const HeisPoint p = random_point(rng, n, 3.0);
      CHECK(max_diff(group_mul(e, p), p) == 0.0);
      CHECK(max_diff(group_mul(p, group_inv(p)), e) < 1e-12);
      CHECK(max_diff(group_inv(group_inv(p)), p) == 0.0);
    }
  }
  const HeisPoint i = group_inv(point({1}, {2}, 3));
  CHECK((i.x[0] == -1.0 && i.y[0] == -2.0 && i.phi == -3.0));
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(group_mul(HeisPoint::identity(1), HeisPoint::identity(2)), ValidationError);
  CHECK_THROWS_AS(dilate(0.0, HeisPoint::identity(1)), ValidationError);
  CHECK_THROWS_AS(dilate(-1.0, HeisPoint::identity(1)), ValidationError);
}

TEST_CASE("gauge values") {
  CHECK(fk_gauge(HeisPoint::identity(2)) == 0.0);
  CHECK(fk_gauge(point({0}, {0}, 1)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fk_gauge(point({3, 0}, {0, 4}, 0)) == doctest::Approx(5.0).epsilon(1e-15));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const HeisPoint p = random_point(rng, 2);
    const double r = 0.1 + k * 0.01;
    CHECK(fk_gauge(dilate(r, p)) == doctest::Approx(r * fk_gauge(p)).epsilon(1e-13));
    CHECK(fk_dist(p, p) == 0.0);
  }
}

TEST_CASE("contact form and frame") {
  CHECK(contact_eval(HeisPoint::identity(1), TangentVector(Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 3.0), 0.7)) == 0.7);
  CHECK(contact_eval(point({1}, {0}, 0), TangentVector(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 0.0)) == -0.5);
  const auto f = horizontal_frame(point({0}, {1}, 0));
  CHECK(f[0].u[0] == 1.0);
  CHECK(f[0].v[0] == 0.0);
  CHECK(f[0].w == -0.5);
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k < 1000; ++k) {
      const HeisPoint p = random_point(rng, n, 5.0);
      for (const auto& t : horizontal_frame(p)) CHECK(std::abs(contact_eval(p, t)) < 1e-12);
    }
  }
}

TEST_CASE("horizontal gradient of the gauge") {
  CHECK(hgrad_tau(point({0.3}, {0.4}, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hgrad_tau(point({0}, {0}, 1)) == 0.0);
  CHECK_THROWS_AS(hgrad_tau(HeisPoint::identity(2)), ValidationError);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20000; ++k) {
    const double g = hgrad_tau(random_point(rng, 2, 2.0));
    CHECK((g >= 0.0 && g <= 1.0));
  }
}

TEST_CASE("unitary action is a gauge preserving automorphism") {
  std::mt19937_64 rng(13);
  const HeisPoint p0 = random_point(rng, 2);
  CHECK(max_diff(unitary_act(UnitaryMatrix::Identity(2, 2), p0), p0) == 0.0);
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k < 500; ++k) {
      const UnitaryMatrix U = random_unitary(rng, n);
      const HeisPoint p = random_point(rng, n), q = random_point(rng, n);
      CHECK(fk_gauge(unitary_act(U, p)) == doctest::Approx(fk_gauge(p)).epsilon(1e-12));
      CHECK(max_diff(unitary_act(U, group_mul(p, q)), group_mul(unitary_act(U, p), unitary_act(U, q))) < 1e-12);
    }
  }
  UnitaryMatrix bad = UnitaryMatrix::Identity(2, 2);
  bad(0, 0) = 1.1;
  CHECK_THROWS_AS(unitary_act(bad, p0), ValidationError);
}

TEST_CASE("projections are homomorphisms") {
  const HeisPoint p = point({1}, {2}, 3);
  CHECK(project_q(p)[0] == 2.0);
  CHECK(project_p(p)[0] == 1.0);
  CHECK(project_pi(p).size() == 2);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const HeisPoint a = random_point(rng, 3), b = random_point(rng, 3);
    CHECK((project_p(group_mul(a, b)) - project_p(a) - project_p(b)).norm() < 1e-14);
    CHECK((project_q(group_mul(a, b)) - project_q(a) - project_q(b)).norm() < 1e-14);
  }
}

TEST_CASE("graph-plane chart") {
  std::mt19937_64 rng(19);
  for (int n = 1; n <= 3; ++n) {
    const Eigen::MatrixXd A = heis::test::random_symmetric(rng, n, 0.4);
    const Eigen::MatrixXd P = graph_plane_basis(A), N = graph_plane_normal_basis(A);
    CHECK((P.transpose() * P - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-13);
    CHECK((N.transpose() * N - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-13);
    CHECK((P.transpose() * N).norm() < 1e-13);
    // The basis spans {(s, A s)}.
    Eigen::MatrixXd T(2 * n, n);
    T << Eigen::MatrixXd::Identity(n, n), A;
    CHECK(((Eigen::MatrixXd::Identity(2 * n, 2 * n) - graph_plane_projector(A)) * T).norm() < 1e-13);
    CHECK(projection_distance(A, A) < 1e-14);
  }
}

TEST_CASE("two nearby planes control the modulus of a point") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 3;
    const Eigen::MatrixXd A = heis::test::random_symmetric(rng, n, 0.5);
    const double d = projection_distance(A, Eigen::MatrixXd::Zero(n, n));
    if (d * d > 0.125) continue;
    const double r = 0.5 + 0.01 * trial;
    for (int k = 0; k < 50; ++k) {
      HeisPoint p{Eigen::VectorXd(n), Eigen::VectorXd(n), u(rng)};
      for (int i = 0; i < n; ++i) {
        p.x[i] = 3.0 * r * u(rng);
        p.y[i] = r * u(rng);
      }
      if (project_p_tilted(A, p).norm() > r || project_q(p).norm() > r) continue;
      ++checked;
      CHECK(project_pi(p).norm() <= 2.0 * r);
    }
  }
  CHECK(checked > 1000);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <random>

#include "heis/area_minimizer.hpp"
#include "heis/errors.hpp"
#include "heis/plate_solver.hpp"
#include "support.hpp"

using namespace heis;

namespace {

ScalarField bump(int points, double eps) {
  return ScalarField::sample(2, points, 1.0, [eps](const SmallVec& x) {
    const double dx = x[0] - 0.35, dy = x[1] - 0.2;
    return eps * std::exp(-(dx * dx + dy * dy));
  });
}

// Smooth random direction vanishing on the clamped layers.
ScalarField direction(const ScalarField& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), k1 = 1.0 + u(rng), k2 = 1.0 + u(rng);
  ScalarField d = ScalarField::sample(grid.n(), grid.points(), grid.half_width(), [&](const SmallVec& x) {
    return (a * std::sin(k1 * x[0] + c) * std::cos(k2 * x[x.size() - 1]) + b * x.squaredNorm()) *
           test::clamp_window(grid, x);
  });
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.layer(i) < 2) d[i] = 0.0;
  }
  return d;
}

ScalarField axpy(const ScalarField& v, double t, const ScalarField& d) {
  ScalarField w = v;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += t * d[i];
  return w;
}

double dot(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_SUITE("area_minimizer") {

TEST_CASE("area density derivatives") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 3; ++n) {
    const MetricForm h(test::random_spd(rng, 2 * n, 4.0));
    const AreaDensity F(h);
    const Eigen::MatrixXd s = test::random_symmetric(rng, n, 0.4);
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    const double f = F.value_grad_hess(s, g, H);
    CHECK(f == doctest::Approx(F.value(s)).epsilon(1e-15));
    const double t = 1e-5;
    for (int e = 0; e < n * n; ++e) {
      Eigen::MatrixXd sp = s, sm = s;
      sp(e / n, e % n) += t;
      sm(e / n, e % n) -= t;
      CHECK(g[e] == doctest::Approx((F.value(sp) - F.value(sm)) / (2 * t)).epsilon(1e-8));
      Eigen::VectorXd gp, gm;
      F.value_grad(sp, gp);
      F.value_grad(sm, gm);
      const Eigen::VectorXd fd = (gp - gm) / (2 * t);
      CHECK((H.col(e) - fd).norm() <= 1e-7 * (1.0 + fd.norm()));
    }
  }
  // Standard metric: F = sqrt(det(I + S^2)).
  const AreaDensity F1(MetricForm::identity(2));
  CHECK(F1.value(Eigen::Matrix2d::Identity()) == doctest::Approx(2.0));
}

TEST_CASE("discrete area of flat and quadratic data") {
  const auto zero = ScalarField(2, 17, 1.0);
  const double box = std::pow(15 * zero.spacing(), 2);
  CHECK(discrete_area(MetricForm::identity(2), zero) == doctest::Approx(box).epsilon(1e-14));
  const auto affine = ScalarField::sample(2, 17, 1.0, [](const SmallVec& x) { return 0.5 - x[0] + 3 * x[1]; });
  const ScalarField g = first_variation(MetricForm::identity(2), affine);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i]) < 1e-12);
}

TEST_CASE("first variation matches finite differences") {
  std::mt19937_64 rng(23);
  const MetricForm metrics[] = {MetricForm::identity(2), MetricForm(test::random_spd(rng, 4, 6.0))};
  for (const MetricForm& h : metrics) {
    const ScalarField v = bump(21, 0.3);
    const ScalarField g = first_variation(h, v);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (v.layer(i) < 2) CHECK(g[i] == 0.0);
    }
    const auto K = area_hessian(h, v);
    const ClampedIndex idx = clamped_index(v);
    for (int k = 0; k < 10; ++k) {
      const ScalarField d = direction(v, rng);
      const double t = 1e-4;
      const double fd = (discrete_area(h, axpy(v, t, d)) - discrete_area(h, axpy(v, -t, d))) / (2 * t);
      CHECK(std::abs(dot(g, d) - fd) <= 1e-6 * std::abs(fd));

      const ScalarField gp = first_variation(h, axpy(v, t, d)), gm = first_variation(h, axpy(v, -t, d));
      Eigen::VectorXd dv(static_cast<Eigen::Index>(idx.free_nodes.size())), fdv(dv.size());
      for (Eigen::Index j = 0; j < dv.size(); ++j) {
        const std::size_t node = idx.free_nodes[static_cast<std::size_t>(j)];
        dv[j] = d[node];
        fdv[j] = (gp[node] - gm[node]) / (2 * t);
      }
      CHECK((K * dv - fdv).norm() <= 1e-6 * fdv.norm());
    }
  }
}

TEST_CASE("trivial minimizations") {
  MinimizeProblem p{MetricForm::identity(2), ScalarField(2, 17, 1.0), {}};
  const MinimizeResult r0 = minimize(p);
  CHECK(r0.converged);
  CHECK(test::max_abs_diff(r0.v_star, p.boundary_field) == 0.0);
  CHECK(r0.final_area == doctest::Approx(std::pow(15 * p.boundary_field.spacing(), 2)));

  p.boundary_field = ScalarField::sample(2, 17, 1.0, [](const SmallVec& x) { return 0.2 * x[0] - 0.4 * x[1] + 1; });
  const MinimizeResult r1 = minimize(p);
  CHECK(r1.converged);
  CHECK(test::max_abs_diff(r1.v_star, p.boundary_field) < 1e-12);
}

TEST_CASE("competitor ordering") {
  for (double eps : {0.1, 0.2}) {
    const ScalarField f = bump(33, eps);
    const MetricForm h = MetricForm::identity(2);
    const MinimizeResult r = minimize(MinimizeProblem{h, f, {}});
    CHECK(r.converged);
    CHECK(r.first_variation_norm < 1e-10);
    const ScalarField plate = solve_dirichlet(PlateProblem{compute_coefficients(h), f}).u;
    CHECK(r.final_area <= discrete_area(h, plate));
    CHECK(discrete_area(h, plate) <= discrete_area(h, f));
    // A few perturbed competitors with the same clamped data.
    std::mt19937_64 rng(static_cast<std::uint64_t>(eps * 100));
    for (int k = 0; k < 5; ++k) {
      CHECK(r.final_area <= discrete_area(h, axpy(r.v_star, 1e-3, direction(f, rng))));
    }
  }
}

TEST_CASE("descent is monotone and clamped data is preserved") {
  std::mt19937_64 rng(29);
  const ScalarField f = bump(33, 0.2);
  const MinimizeResult r = minimize(MinimizeProblem{MetricForm(test::random_spd(rng, 4, 4.0)), f, {}});
  CHECK(r.converged);
  for (std::size_t k = 1; k < r.area_history.size(); ++k) CHECK(r.area_history[k] <= r.area_history[k - 1]);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.layer(i) < 2) CHECK(r.v_star[i] == f[i]);
  }
  CHECK(r.final_area <= r.initial_area);
}

TEST_CASE("minimizer commutes with grid symmetries") {
  const ScalarField f = bump(25, 0.2);
  const int P = f.points();
  MinimizeOptions o;
  o.gradient_tolerance = 1e-12;
  const MetricForm h = MetricForm::identity(2);
  const ScalarField v = minimize(MinimizeProblem{h, f, o}).v_star;

  ScalarField swapped = f, flipped = f;
  for (int i = 0; i < P; ++i) {
    for (int j = 0; j < P; ++j) {
      swapped[static_cast<std::size_t>(i * P + j)] = f[static_cast<std::size_t>(j * P + i)];
      flipped[static_cast<std::size_t>(i * P + j)] = f[static_cast<std::size_t>((P - 1 - i) * P + (P - 1 - j))];
    }
  }
  const ScalarField vs = minimize(MinimizeProblem{h, swapped, o}).v_star;
  const ScalarField vf = minimize(MinimizeProblem{h, flipped, o}).v_star;
  double ds = 0.0, df = 0.0;
  for (int i = 0; i < P; ++i) {
    for (int j = 0; j < P; ++j) {
      ds = std::max(ds, std::abs(vs[static_cast<std::size_t>(i * P + j)] - v[static_cast<std::size_t>(j * P + i)]));
      df = std::max(df, std::abs(vf[static_cast<std::size_t>(i * P + j)] -
                                 v[static_cast<std::size_t>((P - 1 - i) * P + (P - 1 - j))]));
    }
  }
  CHECK(ds < 1e-10);
  CHECK(df < 1e-10);
}

TEST_CASE("boundary precondition") {
  const ScalarField steep = ScalarField::sample(2, 17, 1.0, [](const SmallVec& x) { return 0.4 * x.squaredNorm(); });
  CHECK_THROWS_AS(minimize(MinimizeProblem{MetricForm::identity(2), steep, {}}), ValidationError);
  CHECK(max_stencil_hessian(steep) == doctest::Approx(0.8));
}

TEST_CASE("linearization gap shrinks") {
  const ScalarField f0 = bump(33, 1.0);
  const auto recs = linearization_gap(MetricForm::identity(2), f0, {0.2, 0.1, 0.05});
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].gap < recs[0].gap);
  CHECK(recs[2].gap < recs[1].gap);
  for (const auto& r : recs) CHECK(r.converged);
  const auto zero = linearization_gap(MetricForm::identity(2), f0, {0.0});
  CHECK(zero[0].gap == 0.0);
  CHECK_THROWS_AS(linearization_gap(MetricForm::identity(2), f0, {0.1, 0.2}), ValidationError);

  const MetricForm aniso(Eigen::Vector4d(1, 2, 3, 4).asDiagonal().toDenseMatrix());
  const auto ar = linearization_gap(aniso, f0, {0.2, 0.1, 0.05});
  CHECK(ar[1].gap < ar[0].gap);
  CHECK(ar[2].gap < ar[1].gap);
}

TEST_CASE("first variation of a scaled quadratic is cubic in the scale") {
  // Against the plate gradient of the same field, which is linear in eps.
  std::vector<double> eps{0.2, 0.1, 0.05}, res;
  for (double e : eps) {
    const auto v = ScalarField::sample(2, 17, 1.0, [e](const SmallVec& x) {
      return e * (0.5 * x.squaredNorm() + 0.3 * std::sin(x[0] + 2 * x[1]));
    });
    const ScalarField g = first_variation(MetricForm::identity(2), v);
    const ScalarField p = plate_gradient(compute_coefficients(MetricForm::identity(2)), v);
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i] - 0.5 * p[i]));
    res.push_back(m);
  }
  CHECK(loglog_slope(eps, res) >= 2.5);
}

}  // TEST_SUITE

#include "heis/area_minimizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "heis/config.hpp"
#include "heis/errors.hpp"
#include "heis/parallel.hpp"
#include "heis/plate_solver.hpp"

namespace heis {
namespace {

Eigen::MatrixXd unvec(const Eigen::VectorXd& s, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = s[i * n + j];
  }
  return m;
}

struct LocalTerms {
  std::vector<double> value;           // per base
  std::vector<Eigen::VectorXd> grad;   // per base, local_size entries
  std::vector<Eigen::MatrixXd> hess;   // per base, local_size^2 (optional)
};

LocalTerms local_terms(const AreaDensity& F, const OctantStencil& st, const ScalarField& v, int order) {
  const auto& bases = st.bases();
  LocalTerms t;
  t.value.assign(bases.size(), 0.0);
  if (order >= 1) t.grad.assign(bases.size(), Eigen::VectorXd());
  if (order >= 2) t.hess.assign(bases.size(), Eigen::MatrixXd());
  const auto vals = v.values();
  const int n = st.n();
  const double w = st.weight();
  parallel::for_chunks(bases.size(), 256, [&](std::size_t, std::size_t begin, std::size_t end) {
    Eigen::VectorXd loc, g;
    Eigen::MatrixXd H;
    for (std::size_t k = begin; k < end; ++k) {
      st.gather(vals, bases[k], loc);
      double val = 0.0;
      Eigen::VectorXd lg = Eigen::VectorXd::Zero(order >= 1 ? st.local_size() : 0);
      Eigen::MatrixXd lh = Eigen::MatrixXd::Zero(order >= 2 ? st.local_size() : 0, order >= 2 ? st.local_size() : 0);
      for (int o = 0; o < st.octants(); ++o) {
        const Eigen::MatrixXd& C = st.matrix(o);
        const Eigen::MatrixXd sigma = unvec(C * loc, n);
        if (order == 0) {
          val += F.value(sigma);
        } else if (order == 1) {
          val += F.value_grad(sigma, g);
          lg.noalias() += C.transpose() * g;
        } else {
          val += F.value_grad_hess(sigma, g, H);
          lg.noalias() += C.transpose() * g;
          lh.noalias() += C.transpose() * H * C;
        }
      }
      t.value[k] = w * val;
      if (order >= 1) t.grad[k] = w * lg;
      if (order >= 2) t.hess[k] = (0.5 * w) * (lh + lh.transpose());
    }
  });
  return t;
}

std::vector<std::ptrdiff_t> base_slots(const OctantStencil& st, std::size_t size) {
  std::vector<std::ptrdiff_t> slot(size, -1);
  for (std::size_t k = 0; k < st.bases().size(); ++k) slot[st.bases()[k]] = static_cast<std::ptrdiff_t>(k);
  return slot;
}

ScalarField gather_gradient(const OctantStencil& st, const LocalTerms& t, const ScalarField& v) {
  ScalarField g = v;
  std::fill(g.values().begin(), g.values().end(), 0.0);
  const auto slots = base_slots(st, v.size());
  const ClampedIndex idx = clamped_index(v);
  for (std::size_t node : idx.free_nodes) {
    double acc = 0.0;
    for (int p = 0; p < st.local_size(); ++p) {
      const auto b = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) - st.offset(p));
      acc += t.grad[static_cast<std::size_t>(slots[b])][p];
    }
    g[node] = acc;
  }
  return g;
}

Eigen::SparseMatrix<double> scatter_hessian(const OctantStencil& st, const LocalTerms& t, const ScalarField& v) {
  const ClampedIndex idx = clamped_index(v);
  const auto& bases = st.bases();
  const int m = st.local_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(bases.size() * static_cast<std::size_t>(m * m));
  for (std::size_t k = 0; k < bases.size(); ++k) {
    const auto b = static_cast<std::ptrdiff_t>(bases[k]);
    for (int p = 0; p < m; ++p) {
      const std::ptrdiff_t sp = idx.slot[static_cast<std::size_t>(b + st.offset(p))];
      if (sp < 0) continue;
      for (int q = 0; q < m; ++q) {
        const std::ptrdiff_t sq = idx.slot[static_cast<std::size_t>(b + st.offset(q))];
        if (sq < 0) continue;
        const double val = t.hess[k](p, q);
        if (val != 0.0) trip.emplace_back(static_cast<int>(sp), static_cast<int>(sq), val);
      }
    }
  }
  const auto nf = static_cast<Eigen::Index>(idx.free_nodes.size());
  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

double sum_values(const LocalTerms& t) { return parallel::pairwise_sum(t.value); }

double max_norm_free(const ScalarField& g) {
  double m = 0.0;
  for (double x : g.values()) m = std::max(m, std::abs(x));
  return m;
}

double op_norm(const SmallMat& S) {
  const SmallMat s = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<SmallMat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double max_node_hessian_op(const ScalarField& v) {
  const FieldDerivatives d(v);
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.layer(i) >= 1) m = std::max(m, op_norm(d.node_jet(i).hess));
  }
  return m;
}

}  // namespace

AreaDensity::AreaDensity(const MetricForm& h)
    : n_(h.n()), Hxx_(h.block_xx()), Hxy_(h.block_xy()), Hyx_(h.block_xy().transpose()), Hyy_(h.block_yy()) {}

double AreaDensity::value(const Eigen::MatrixXd& s) const {
  const Eigen::MatrixXd G = Hxx_ + Hxy_ * s + s.transpose() * Hyx_ + s.transpose() * Hyy_ * s;
  return std::sqrt(G.determinant());
}

double AreaDensity::value_grad(const Eigen::MatrixXd& s, Eigen::VectorXd& grad) const {
  const int n = n_;
  const Eigen::MatrixXd G = Hxx_ + Hxy_ * s + s.transpose() * Hyx_ + s.transpose() * Hyy_ * s;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  const double F = std::sqrt(G.determinant());
  const Eigen::MatrixXd B = ldlt.solve(Hxy_ + s.transpose() * Hyy_);
  grad.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) grad[i * n + j] = F * B(j, i);
  }
  return F;
}

double AreaDensity::value_grad_hess(const Eigen::MatrixXd& s, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
  const int n = n_;
  const Eigen::MatrixXd G = Hxx_ + Hxy_ * s + s.transpose() * Hyx_ + s.transpose() * Hyy_ * s;
  const Eigen::MatrixXd K = G.inverse();
  const double F = std::sqrt(G.determinant());
  const Eigen::MatrixXd B = K * (Hxy_ + s.transpose() * Hyy_);
  grad.resize(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) grad[i * n + j] = F * B(j, i);
  }
  hess.resize(n * n, n * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(k, l) = 1.0;
      const Eigen::MatrixXd dG = Hxy_ * e + e.transpose() * Hyx_ + e.transpose() * Hyy_ * s + s.transpose() * Hyy_ * e;
      const Eigen::MatrixXd M = -K * dG * B + K * e.transpose() * Hyy_;
      // tr(M E_ij) = M(j, i); tr(B e) = B(l, k).
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) hess(i * n + j, k * n + l) = F * (B(l, k) * B(j, i) + M(j, i));
      }
    }
  }
  return F;
}

double discrete_area(const MetricForm& h, const ScalarField& v) {
  if (h.n() != v.n()) throw ValidationError("discrete_area: dimension mismatch");
  const OctantStencil st(v);
  return sum_values(local_terms(AreaDensity(h), st, v, 0));
}

ScalarField first_variation(const MetricForm& h, const ScalarField& v) {
  if (h.n() != v.n()) throw ValidationError("first_variation: dimension mismatch");
  const OctantStencil st(v);
  return gather_gradient(st, local_terms(AreaDensity(h), st, v, 1), v);
}

Eigen::SparseMatrix<double> area_hessian(const MetricForm& h, const ScalarField& v) {
  if (h.n() != v.n()) throw ValidationError("area_hessian: dimension mismatch");
  const OctantStencil st(v);
  return scatter_hessian(st, local_terms(AreaDensity(h), st, v, 2), v);
}

double max_stencil_hessian(const ScalarField& v) {
  const OctantStencil st(v);
  double m = 0.0;
  for (std::size_t b : st.bases()) {
    for (int o = 0; o < st.octants(); ++o) m = std::max(m, op_norm(st.hessian(v.values(), b, o)));
  }
  return m;
}

double hessian_l2(const ScalarField& w) {
  CoefficientTensor id = compute_coefficients(MetricForm::identity(w.n()));
  return std::sqrt(std::max(0.0, energy(id, w)));
}

MinimizeResult minimize(const MinimizeProblem& p) {
  const MetricForm& h = p.metric;
  const ScalarField& f = p.boundary_field;
  const MinimizeOptions& o = p.options;
  if (h.n() != f.n()) throw ValidationError("minimize: metric and field dimensions differ");
  for (double x : f.values()) {
    if (!std::isfinite(x)) throw ValidationError("minimize: boundary field is not finite");
  }
  if (o.max_iterations < 0 || !(o.backtrack > 0.0 && o.backtrack < 1.0) || !(o.armijo > 0.0 && o.armijo < 0.5)) {
    throw ValidationError("minimize: invalid solver options");
  }
  const double bh = max_node_hessian_op(f);
  if (bh > o.boundary_hessian_bound) {
    throw ValidationError("minimize: boundary Hessian sup-norm " + std::to_string(bh) + " exceeds " +
                          std::to_string(o.boundary_hessian_bound));
  }

  const CoefficientTensor c = compute_coefficients(h);
  const ClampedIndex idx = clamped_index(f);
  const OctantStencil st(f);
  const AreaDensity F(h);

  MinimizeResult res;
  res.v_star = solve_dirichlet(PlateProblem{c, f}).u;
  ScalarField& v = res.v_star;

  LocalTerms t = local_terms(F, st, v, 2);
  double area = sum_values(t);
  ScalarField g = gather_gradient(st, t, v);
  double gnorm = max_norm_free(g);
  res.initial_area = area;
  res.area_history.push_back(area);
  res.convexity_warning = max_stencil_hessian(v) > tol::kConvexityGuard;

  const auto nf = static_cast<Eigen::Index>(idx.free_nodes.size());
  for (int it = 0; it < o.max_iterations && gnorm >= o.gradient_tolerance; ++it) {
    Eigen::VectorXd gv(nf);
    for (Eigen::Index k = 0; k < nf; ++k) gv[k] = g[idx.free_nodes[static_cast<std::size_t>(k)]];
    const Eigen::SparseMatrix<double> K = scatter_hessian(st, t, v);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    Eigen::VectorXd dir;
    bool newton = false;
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
      dir = ldlt.solve(-gv);
      newton = dir.allFinite() && dir.dot(gv) < 0.0;
    }
    if (!newton) dir = -gv;
    const double slope = dir.dot(gv);

    double step = 1.0;
    bool accepted = false;
    ScalarField trial = v;
    LocalTerms tt;
    ScalarField gt;
    double at = 0.0, gnt = 0.0;
    for (int bt = 0; bt <= o.max_backtracks; ++bt) {
      trial = v;
      for (Eigen::Index k = 0; k < nf; ++k) trial[idx.free_nodes[static_cast<std::size_t>(k)]] += step * dir[k];
      tt = local_terms(F, st, trial, 2);
      at = sum_values(tt);
      gt = gather_gradient(st, tt, trial);
      gnt = max_norm_free(gt);
      // Near the optimum the area change drops below its rounding; a step
      // that does not raise the area and reduces the gradient is accepted
      // too.
      const bool armijo = at <= area + o.armijo * step * slope;
      const bool flat = at <= area && gnt < gnorm;
      if (std::isfinite(at) && (armijo || flat)) {
        accepted = true;
        break;
      }
      step *= o.backtrack;
    }
    if (!accepted) break;
    v = std::move(trial);
    t = std::move(tt);
    g = std::move(gt);
    area = at;
    gnorm = gnt;
    res.area_history.push_back(area);
    ++res.iterations;
    (newton ? res.newton_steps : res.gradient_steps) += 1;
    if (max_stencil_hessian(v) > tol::kConvexityGuard) res.convexity_warning = true;
  }
  res.final_area = area;
  res.first_variation_norm = gnorm;
  res.converged = gnorm < o.gradient_tolerance;
  return res;
}

std::vector<GapRecord> linearization_gap(const MetricForm& h, const ScalarField& f0, const std::vector<double>& eps,
                                         const MinimizeOptions& opts) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= 0.0)) throw ValidationError("linearization_gap: eps must be nonnegative");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ValidationError("linearization_gap: eps must be decreasing");
  }
  const CoefficientTensor c = compute_coefficients(h);
  std::vector<GapRecord> out;
  for (double e : eps) {
    GapRecord r;
    r.eps = e;
    ScalarField data = f0;
    for (double& x : data.values()) x *= e;
    if (e == 0.0) {
      out.push_back(r);
      continue;
    }
    const ScalarField u = solve_dirichlet(PlateProblem{c, data}).u;
    const MinimizeResult m = minimize(MinimizeProblem{h, data, opts});
    ScalarField diff = m.v_star;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= u[i];
    r.plate_norm = hessian_l2(u);
    r.gap = r.plate_norm > 0.0 ? hessian_l2(diff) / r.plate_norm : 0.0;
    r.converged = m.converged;
    out.push_back(r);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return NAN;
  const double m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = m * sxx - sx * sx;
  if (den == 0.0) return NAN;
  return (m * sxy - sx * sy) / den;
}

}  // namespace heis

#include "heis/legendrian_graph.hpp"

#include <cmath>
#include <numbers>

#include "heis/errors.hpp"
#include "heis/parallel.hpp"
#include "heis/simd.hpp"

namespace heis {
namespace {

SmallMat sym(const SmallMat& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd graph_factor_matrix(const SmallMat& S) {
  const Eigen::Index n = S.rows();
  Eigen::MatrixXd T(2 * n, n);
  T << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd(S);
  return T;
}

void require_square(const SmallMat& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw ValidationError("expected a square matrix");
}

struct Cell {
  SmallVec lo;
  double size;
};

}  // namespace

HeisPoint lift(const SmallVec& x, const Jet& jet) {
  const Eigen::VectorXd xv = x;
  const Eigen::VectorXd g = jet.grad;
  return {xv, g, 0.5 * xv.dot(g) - jet.value};
}

HeisPoint phi_map(const LegendrianGraph& g, const SmallVec& x) { return lift(x, g.derivatives().jet_at(x)); }
HeisPoint phi_map(const ScalarField& v, const SmallVec& x) { return phi_map(LegendrianGraph(v), x); }

std::vector<TangentVector> graph_frame(const LegendrianGraph& g, const SmallVec& x) {
  const Jet jet = g.derivatives().jet_at(x);
  const HeisPoint p = lift(x, jet);
  const auto frame = horizontal_frame(p);
  const int n = g.n();
  const SmallMat S = sym(jet.hess);
  std::vector<TangentVector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TangentVector t = frame[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const TangentVector& yj = frame[static_cast<std::size_t>(n + j)];
      t.u += S(i, j) * yj.u;
      t.v += S(i, j) * yj.v;
      t.w += S(i, j) * yj.w;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TangentVector> graph_frame(const ScalarField& v, const SmallVec& x) {
  return graph_frame(LegendrianGraph(v), x);
}

GraphPoint graph_point(const LegendrianGraph& g, const SmallVec& x) {
  const Jet jet = g.derivatives().jet_at(x);
  GraphPoint gp;
  gp.base = x;
  gp.point = lift(x, jet);
  gp.frame = graph_frame(g, x);
  gp.jacobian = area_integrand(jet.hess);
  gp.tangent = tangent_from_hessian(jet.hess);
  return gp;
}

double contact_residual(const ScalarField& v) {
  const FieldDerivatives d(v);
  const int n = v.n();
  const double h = v.spacing();
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.layer(i) < 2) continue;
    const HeisPoint p = lift(v.node(i), d.node_jet(i));
    for (int a = 0; a < n; ++a) {
      const std::size_t s = v.stride(a);
      const HeisPoint plus = lift(v.node(i + s), d.node_jet(i + s));
      const HeisPoint minus = lift(v.node(i - s), d.node_jet(i - s));
      const TangentVector t(Eigen::VectorXd::Unit(n, a), (plus.y - minus.y) / (2.0 * h),
                            (plus.phi - minus.phi) / (2.0 * h));
      worst = std::max(worst, std::abs(contact_eval(p, t)));
    }
  }
  return worst;
}

double area_integrand(const SmallMat& hess) {
  require_square(hess);
  const SmallMat S = sym(hess);
  const Eigen::Index n = S.rows();
  const SmallMat G = SmallMat::Identity(n, n) + S * S;
  return std::sqrt(G.determinant());
}

double area_integrand_h(const MetricForm& h, const SmallMat& hess) {
  require_square(hess);
  if (hess.rows() != h.n()) throw ValidationError("area_integrand_h: dimension mismatch");
  const Eigen::MatrixXd T = graph_factor_matrix(sym(hess));
  return std::sqrt((T.transpose() * h.matrix() * T).determinant());
}

SimpleNVector tangent_from_hessian(const SmallMat& hess) {
  require_square(hess);
  return graph_plane_nvector(Eigen::MatrixXd(sym(hess)), true);
}

double tilt_from_hessian(const SmallMat& hess, const SmallMat& A) {
  if (hess.rows() != A.rows()) throw ValidationError("tilt: dimension mismatch");
  return nvector_dist_sq(tangent_from_hessian(hess), graph_plane_nvector(Eigen::MatrixXd(sym(A)), true));
}

SimpleNVector tangent_nvector(const LegendrianGraph& g, const SmallVec& x) {
  return tangent_from_hessian(g.derivatives().jet_at(x).hess);
}

double tilt(const LegendrianGraph& g, const SmallVec& x, const SmallMat& A) {
  return tilt_from_hessian(g.derivatives().jet_at(x).hess, A);
}

Region ball_region(const Ball& ball) {
  if (!(ball.radius > 0.0)) throw ValidationError("ball radius must be positive");
  const SmallVec c = ball.center;
  return Region{[c](const SmallVec& x, const Jet&) { return (x - c).norm(); }, ball.radius, 1.0};
}

std::vector<QuadratureLeaf> region_leaves(const FieldDerivatives& d, const Region& region,
                                          const QuadratureOptions& opts) {
  const ScalarField& v = d.field();
  const int n = v.n();
  if (!(region.radius > 0.0)) throw ValidationError("region radius must be positive");
  const int max_depth = opts.max_depth < 0 ? (n >= 3 ? 4 : 7) : opts.max_depth;
  if (max_depth > 16) throw ValidationError("quadrature depth out of range");
  const int cells_per_axis = v.points() - 3;
  if (cells_per_axis < 1) throw ValidationError("grid too small for quadrature");
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(cells_per_axis);

  const double h = v.spacing();
  const double r = region.radius;
  const double L = region.lipschitz;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  constexpr std::size_t kChunk = 512;
  std::vector<std::vector<QuadratureLeaf>> per_chunk(parallel::chunk_count(total, kChunk));
  std::vector<int> escaped(per_chunk.size(), 0);

  parallel::for_chunks(total, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& out = per_chunk[c];
    std::vector<Cell> stack;
    for (std::size_t cell = begin; cell < end; ++cell) {
      // Cell multi-index in [0, cells_per_axis); node base index is +1.
      SmallVec lo(n);
      bool border = false;
      std::size_t rem = cell;
      for (int k = n - 1; k >= 0; --k) {
        const int ik = static_cast<int>(rem % static_cast<std::size_t>(cells_per_axis));
        rem /= static_cast<std::size_t>(cells_per_axis);
        lo[k] = v.center()[k] - v.half_width() + (ik + 1) * h;
        border = border || ik == 0 || ik == cells_per_axis - 1;
      }
      stack.clear();
      stack.push_back({lo, h});
      // Depth-first subdivision; depth is recovered from the size.
      while (!stack.empty()) {
        const Cell cur = stack.back();
        stack.pop_back();
        const int depth = static_cast<int>(std::lround(std::log2(h / cur.size)));
        SmallVec mid = cur.lo.array() + 0.5 * cur.size;
        const Jet jet = d.jet_at(mid);
        const double rho = region.distance(mid, jet);
        const double reach = L * 0.5 * cur.size * sqrt_n;
        const double vol = std::pow(cur.size, n);
        if (rho - reach >= r) continue;
        if (border && depth == 0) {
          escaped[c] = 1;
          return;
        }
        if (rho + reach < r || depth >= max_depth) {
          if (rho + reach < r || rho < r) out.push_back({vol, mid, jet});
          continue;
        }
        const double half = 0.5 * cur.size;
        // Push children in reverse so they pop in lexicographic order.
        for (int child = (1 << n) - 1; child >= 0; --child) {
          SmallVec clo = cur.lo;
          for (int k = 0; k < n; ++k) {
            if ((child >> k) & 1) clo[k] += half;
          }
          stack.push_back({clo, half});
        }
      }
    }
  });
  for (int e : escaped) {
    if (e) throw ValidationError("integration region exceeds the valid grid region");
  }
  std::vector<QuadratureLeaf> leaves;
  std::size_t count = 0;
  for (const auto& chunk : per_chunk) count += chunk.size();
  leaves.reserve(count);
  for (auto& chunk : per_chunk) {
    for (auto& leaf : chunk) leaves.push_back(std::move(leaf));
  }
  return leaves;
}

double integrate(const std::vector<QuadratureLeaf>& leaves,
                 const std::function<double(const QuadratureLeaf&)>& f) {
  return parallel::deterministic_sum(leaves.size(), [&](std::size_t i) {
    return leaves[i].weight * f(leaves[i]);
  });
}

double area(const LegendrianGraph& g, const Ball& ball, const QuadratureOptions& opts) {
  const auto leaves = region_leaves(g.derivatives(), ball_region(ball), opts);
  if (g.n() != 2) {
    return integrate(leaves, [](const QuadratureLeaf& l) { return area_integrand(l.jet.hess); });
  }
  // Batched SIMD path for surfaces.
  std::vector<double> s11(leaves.size()), s12(leaves.size()), s22(leaves.size()), jac(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const SmallMat& H = leaves[i].jet.hess;
    s11[i] = H(0, 0);
    s12[i] = 0.5 * (H(0, 1) + H(1, 0));
    s22[i] = H(1, 1);
  }
  simd::area_integrand_2d(s11, s12, s22, jac);
  return parallel::deterministic_sum(leaves.size(), [&](std::size_t i) { return leaves[i].weight * jac[i]; });
}

double area(const ScalarField& v, const Ball& ball, const QuadratureOptions& opts) {
  return area(LegendrianGraph(v), ball, opts);
}

double area_h(const LegendrianGraph& g, const Ball& ball, const MetricForm& h, const QuadratureOptions& opts) {
  if (h.n() != g.n()) throw ValidationError("area_h: metric dimension mismatch");
  const auto leaves = region_leaves(g.derivatives(), ball_region(ball), opts);
  return integrate(leaves, [&](const QuadratureLeaf& l) { return area_integrand_h(h, l.jet.hess); });
}

double area_h(const ScalarField& v, const Ball& ball, const MetricForm& h, const QuadratureOptions& opts) {
  return area_h(LegendrianGraph(v), ball, h, opts);
}

double region_measure(const LegendrianGraph& g, const Ball& ball, const QuadratureOptions& opts) {
  const auto leaves = region_leaves(g.derivatives(), ball_region(ball), opts);
  return integrate(leaves, [](const QuadratureLeaf&) { return 1.0; });
}

double unit_ball_volume(int n) {
  if (n < 1) throw ValidationError("dimension n must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace heis

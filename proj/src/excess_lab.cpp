#include "heis/excess_lab.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "heis/area_minimizer.hpp"
#include "heis/config.hpp"
#include "heis/errors.hpp"
#include "heis/parallel.hpp"

namespace heis {
namespace {

Eigen::VectorXd pi_of(const HeisPoint& p) {
  Eigen::VectorXd w(2 * p.dim());
  w << p.x, p.y;
  return w;
}

// Pi(Phi(x)) - Pi(center) for a base point and its jet.
Eigen::VectorXd rel_pi(const SmallVec& x, const Jet& jet, const Eigen::VectorXd& c) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd w(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    w[k] = x[k] - c[k];
    w[n + k] = jet.grad[k] - c[n + k];
  }
  return w;
}

double op_norm(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Symmetric matrices <-> parameter vectors: diagonal entries first, then
// the upper triangle, so A = sum a_k E_k with E_k = E_ij + E_ji off the
// diagonal.
int sym_dim(int n) { return n * (n + 1) / 2; }

Eigen::MatrixXd sym_from(const Eigen::VectorXd& a, int n) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) A(i, i) = a[k++];
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = a[k];
      A(j, i) = a[k];
      ++k;
    }
  }
  return A;
}

Eigen::VectorXd sym_to(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::VectorXd a(sym_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) a[k++] = A(i, i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) a[k++] = A(i, j);
  }
  return a;
}

// Gradient of a scalar function of symmetric A given dphi = tr(G dA).
Eigen::VectorXd sym_grad(const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  Eigen::VectorXd g(sym_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) g[k++] = G(i, i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g[k++] = G(i, j) + G(j, i);
  }
  return g;
}

Eigen::MatrixXd clamp_plane(Eigen::MatrixXd A) {
  const double f = A.norm();
  if (f > 1.0) A *= 1.0 / f;
  return A;
}

// Fixed-region excess integrand 1/2 tilt J = J - det(I + S A) / J_A, and
// its gradient in A:
//   d [det(I + S A) / J_A] = det(I + S A) / J_A tr(((I + S A)^-1 S - (I + A^2)^-1 A) dA).
struct FixedRegionObjective {
  const std::vector<QuadratureLeaf>* leaves;
  std::vector<double> J;

  double value(const Eigen::MatrixXd& A) const {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const double JA = std::sqrt((I + A * A).determinant());
    return parallel::deterministic_sum(leaves->size(), [&](std::size_t k) {
      const Eigen::MatrixXd S = symmetrize(Eigen::MatrixXd((*leaves)[k].jet.hess));
      return (*leaves)[k].weight * (J[k] - (I + S * A).determinant() / JA);
    });
  }

  Eigen::VectorXd gradient(const Eigen::MatrixXd& A) const {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const double JA = std::sqrt((I + A * A).determinant());
    const Eigen::MatrixXd RA = (I + A * A).inverse() * A;
    const int m = sym_dim(static_cast<int>(n));
    std::vector<Eigen::VectorXd> parts(leaves->size());
    parallel::for_chunks(leaves->size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        const Eigen::MatrixXd S = symmetrize(Eigen::MatrixXd((*leaves)[k].jet.hess));
        const Eigen::MatrixXd M = I + S * A;
        const double N = M.determinant();
        const Eigen::MatrixXd G = -(N / JA) * (M.inverse() * S - RA);
        parts[k] = (*leaves)[k].weight * sym_grad(G);
      }
    });
    Eigen::VectorXd g(m);
    std::vector<double> comp(parts.size());
    for (int c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < parts.size(); ++k) comp[k] = parts[k][c];
      g[c] = parallel::pairwise_sum(comp);
    }
    return g;
  }
};

std::vector<double> leaf_jacobians(const std::vector<QuadratureLeaf>& leaves) {
  std::vector<double> J(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k) J[k] = area_integrand(leaves[k].jet.hess);
  return J;
}

}  // namespace

void validate_cylinder(const CylinderSpec& c, int n) {
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) throw ValidationError("cylinder radius must be positive");
  if (c.center.dim() != n || c.center.y.size() != n) throw ValidationError("cylinder center has wrong dimension");
  if (c.plane.rows() != n || c.plane.cols() != n) throw ValidationError("cylinder plane must be n x n");
  if ((c.plane - c.plane.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry) {
    throw ValidationError("cylinder plane must be symmetric");
  }
  if (c.plane.norm() > 1.0 + 1e-12) throw ValidationError("cylinder plane chart requires |A| <= 1");
  if (c.Q < 1) throw ValidationError("multiplicity must be >= 1");
}

Region cylinder_region(const LegendrianGraph& g, const CylinderSpec& c) {
  validate_cylinder(c, g.n());
  const Eigen::MatrixXd Pt = graph_plane_basis(c.plane).transpose();
  const Eigen::VectorXd cp = pi_of(c.center);
  Region r;
  r.radius = c.radius;
  r.lipschitz = 1.5 * (1.0 + c.plane.norm() * g.derivatives().max_hessian_norm());
  r.distance = [Pt, cp](const SmallVec& x, const Jet& jet) { return (Pt * rel_pi(x, jet, cp)).norm(); };
  return r;
}

ExcessEvaluation evaluate_excess(const LegendrianGraph& g, const CylinderSpec& c, const QuadratureOptions& opts) {
  const Region region = cylinder_region(g, c);
  const auto leaves = region_leaves(g.derivatives(), region, opts);
  const int n = g.n();
  const double scale = std::pow(c.radius, -n);
  const SmallMat A = c.plane;
  ExcessEvaluation e;
  e.leaves = leaves.size();
  e.measure = integrate(leaves, [](const QuadratureLeaf&) { return 1.0; });
  const double tilt_int = integrate(leaves, [&](const QuadratureLeaf& l) {
    return 0.5 * tilt_from_hessian(l.jet.hess, A) * area_integrand(l.jet.hess);
  });
  e.excess = c.Q * scale * tilt_int;
  if (c.plane.cwiseAbs().maxCoeff() == 0.0) {
    const double area = integrate(leaves, [](const QuadratureLeaf& l) { return area_integrand(l.jet.hess); });
    e.deficit = c.Q * scale * (area - e.measure);
    const double den = std::max(std::abs(e.excess), 1e-300);
    e.discrepancy = std::abs(e.excess - e.deficit) / den;
    if (e.excess == 0.0 && e.deficit == 0.0) e.discrepancy = 0.0;
  }
  return e;
}

double cylindrical_excess(const LegendrianGraph& g, const CylinderSpec& c) { return evaluate_excess(g, c).excess; }
double cylindrical_excess(const ScalarField& v, const CylinderSpec& c) {
  return cylindrical_excess(LegendrianGraph(v), c);
}

BestPlane best_plane(const LegendrianGraph& g, const HeisPoint& center, double r) {
  const int n = g.n();
  CylinderSpec cyl{center, r, Eigen::MatrixXd::Zero(n, n), 1};
  const auto leaves0 = region_leaves(g.derivatives(), cylinder_region(g, cyl));
  BestPlane out;
  {
    const double m = integrate(leaves0, [](const QuadratureLeaf&) { return 1.0; });
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        avg(i, j) = integrate(leaves0, [&](const QuadratureLeaf& l) { return 0.5 * (l.jet.hess(i, j) + l.jet.hess(j, i)); });
      }
    }
    out.seed = clamp_plane(m > 0.0 ? Eigen::MatrixXd(avg / m) : avg);
  }
  cyl.plane = out.seed;
  out.seed_excess = cylindrical_excess(g, cyl);

  Eigen::MatrixXd A = out.seed;
  const int m = sym_dim(n);
  bool ok = true;
  for (int outer = 0; outer < 12 && ok; ++outer) {
    cyl.plane = A;
    const auto leaves = region_leaves(g.derivatives(), cylinder_region(g, cyl));
    FixedRegionObjective obj{&leaves, leaf_jacobians(leaves)};
    const Eigen::MatrixXd A_start = A;
    for (int it = 0; it < 30; ++it) {
      ++out.iterations;
      const Eigen::VectorXd gr = obj.gradient(A);
      // Hessian by central differences of the analytic gradient.
      Eigen::MatrixXd H(m, m);
      const double step = 1e-5;
      const Eigen::VectorXd a = sym_to(A);
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd ap = a, am = a;
        ap[k] += step;
        am[k] -= step;
        H.col(k) = (obj.gradient(sym_from(ap, n)) - obj.gradient(sym_from(am, n))) / (2.0 * step);
      }
      H = 0.5 * (H + H.transpose());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd d = -gr;
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) d = ldlt.solve(-gr);
      if (!d.allFinite()) {
        ok = false;
        break;
      }
      const double f0 = obj.value(A);
      double t = 1.0;
      Eigen::MatrixXd next = A;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        next = clamp_plane(sym_from(a + t * d, n));
        if (obj.value(next) <= f0) {
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      const double change = (next - A).norm();
      A = next;
      if (change < 1e-13) break;
    }
    if ((A - A_start).norm() < 1e-12) break;
  }
  cyl.plane = A;
  out.A = A;
  out.excess = ok ? cylindrical_excess(g, cyl) : INFINITY;
  out.converged = ok && out.excess <= out.seed_excess;
  if (!out.converged) {
    out.A = out.seed;
    out.excess = out.seed_excess;
  }
  return out;
}

BestPlane best_plane(const ScalarField& v, const HeisPoint& center, double r) {
  return best_plane(LegendrianGraph(v), center, r);
}

HeightOscillation height_oscillation(const LegendrianGraph& g, const CylinderSpec& c) {
  validate_cylinder(c, g.n());
  const ScalarField& v = g.field();
  const FieldDerivatives& d = g.derivatives();
  const int n = g.n();
  const Eigen::MatrixXd P = graph_plane_basis(c.plane);
  const Eigen::MatrixXd N = graph_plane_normal_basis(c.plane);
  const Eigen::VectorXd cp = pi_of(c.center);

  struct NodeData {
    double dist;
    Eigen::VectorXd q;
    HeisPoint point;
  };
  std::vector<NodeData> nodes;
  double best = INFINITY;
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.layer(i) < 1) continue;
    const Jet jet = d.node_jet(i);
    const SmallVec x = v.node(i);
    const Eigen::VectorXd w = rel_pi(x, jet, cp);
    const double dist = (P.transpose() * w).norm();
    if (dist > 0.5 * c.radius) continue;
    if (v.layer(i) == 1) throw ValidationError("height_oscillation: cylinder reaches the grid boundary");
    if (dist < best) {
      best = dist;
      nearest = nodes.size();
    }
    nodes.push_back({dist, N.transpose() * w, lift(x, jet)});
  }
  HeightOscillation out;
  if (nodes.empty()) return out;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) out.q_osc = std::max(out.q_osc, (nodes[a].q - nodes[b].q).norm());
  }
  // Left translation by eta with Pi(eta) = -N q(xi_0).
  const Eigen::VectorXd shift = -(N * (N.transpose() * pi_of(nodes[nearest].point)));
  const HeisPoint eta(shift.head(n), shift.tail(n), 0.0);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& nd : nodes) {
    if (nd.dist > 0.25 * c.radius) continue;
    const double phi = group_mul(eta, nd.point).phi;
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  if (hi >= lo) out.phi_osc = hi - lo;
  return out;
}

HeightOscillation height_oscillation(const ScalarField& v, const CylinderSpec& c) {
  return height_oscillation(LegendrianGraph(v), c);
}

bool operator==(const ExcessReport& a, const ExcessReport& b) {
  if (a.n != b.n || a.records.size() != b.records.size() || a.flat_exact != b.flat_exact) return false;
  const bool both_nan = std::isnan(a.fitted_exponent) && std::isnan(b.fitted_exponent);
  if (!both_nan && a.fitted_exponent != b.fitted_exponent) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.radius != y.radius || x.excess_pi0 != y.excess_pi0 || x.excess_best != y.excess_best || x.A != y.A ||
        x.q_osc != y.q_osc || x.phi_osc != y.phi_osc || x.best_converged != y.best_converged) {
      return false;
    }
  }
  return true;
}

ExcessReport decay_profile(const ScalarField& v_star, const std::vector<double>& radii) {
  if (radii.empty()) throw ValidationError("decay_profile: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw ValidationError("decay_profile: radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw ValidationError("decay_profile: radii must be strictly decreasing");
  }
  const LegendrianGraph g(v_star);
  const int n = g.n();
  const HeisPoint center = phi_map(g, v_star.center());
  ExcessReport rep;
  rep.n = n;
  rep.records.resize(radii.size());
  // Radii are independent; each record is computed in full by one task.
  parallel::for_chunks(radii.size(), 1, [&](std::size_t, std::size_t b, std::size_t) {
    ExcessRecord& rec = rep.records[b];
    rec.radius = radii[b];
    CylinderSpec c{center, radii[b], Eigen::MatrixXd::Zero(n, n), 1};
    rec.excess_pi0 = cylindrical_excess(g, c);
    const BestPlane bp = best_plane(g, center, radii[b]);
    rec.excess_best = bp.excess;
    rec.A = bp.A;
    rec.best_converged = bp.converged;
    const HeightOscillation ho = height_oscillation(g, c);
    rec.q_osc = ho.q_osc;
    rec.phi_osc = ho.phi_osc;
  });
  std::vector<double> r, e;
  bool flat = true;
  for (const auto& rec : rep.records) {
    r.push_back(rec.radius);
    e.push_back(rec.excess_best);
    if (std::abs(rec.excess_best) > 1e-14 || std::abs(rec.excess_pi0) > 1e-14) flat = false;
  }
  rep.flat_exact = flat;
  rep.fitted_exponent = flat ? NAN : loglog_slope(r, e);
  return rep;
}

EpsRegularityReport eps_regularity_certificate(const ScalarField& v, double R) {
  if (!(R > 0.0)) throw ValidationError("eps_regularity_certificate: R must be positive");
  const LegendrianGraph g(v);
  const FieldDerivatives& d = g.derivatives();
  const int n = g.n();
  const SmallVec c = v.center();
  const Jet jc = d.jet_at(c);
  const double h = v.spacing();

  struct NodeData {
    SmallVec x;
    Eigen::MatrixXd hess;
  };
  std::vector<NodeData> nodes;
  double sup_f = 0.0, sup_df = 0.0, sup_d2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.layer(i) < 1) continue;
    const SmallVec x = v.node(i);
    if ((x - c).norm() > 0.5 * R) continue;
    if (v.layer(i) == 1) throw ValidationError("eps_regularity_certificate: ball reaches the grid boundary");
    const Jet j = d.node_jet(i);
    const double f = j.value - jc.value - jc.grad.dot(x - c);
    sup_f = std::max(sup_f, std::abs(f));
    sup_df = std::max(sup_df, (j.grad - jc.grad).norm());
    const Eigen::MatrixXd H = symmetrize(Eigen::MatrixXd(j.hess));
    sup_d2 = std::max(sup_d2, op_norm(H));
    nodes.push_back({x, H});
  }
  const double lo = 2.0 * h - 1e-12;
  const double hi = 0.25 * R + 1e-12;
  std::vector<double> best(parallel::chunk_count(nodes.size(), 64), 0.0);
  parallel::for_chunks(nodes.size(), 64, [&](std::size_t ci, std::size_t b, std::size_t e) {
    double m = 0.0;
    for (std::size_t a = b; a < e; ++a) {
      for (std::size_t k = a + 1; k < nodes.size(); ++k) {
        const double s = (nodes[a].x - nodes[k].x).norm();
        if (s < lo || s > hi) continue;
        m = std::max(m, op_norm(nodes[a].hess - nodes[k].hess) / std::sqrt(s));
      }
    }
    best[ci] = m;
  });
  double holder = 0.0;
  for (double b : best) holder = std::max(holder, b);

  EpsRegularityReport rep;
  rep.R = R;
  rep.quantities[0] = sup_f / (R * R);
  rep.quantities[1] = sup_df / R;
  rep.quantities[2] = sup_d2;
  rep.quantities[3] = std::sqrt(R) * holder;
  const HeisPoint center = lift(c, jc);
  rep.excess = cylindrical_excess(g, CylinderSpec{center, R, Eigen::MatrixXd::Zero(n, n), 1});
  rep.rhs = std::sqrt(std::max(0.0, rep.excess));
  for (int k = 0; k < 4; ++k) {
    rep.ratios[k] = rep.quantities[k] == 0.0 ? 0.0 : (rep.rhs > 0.0 ? rep.quantities[k] / rep.rhs : INFINITY);
  }
  return rep;
}

}  // namespace heis

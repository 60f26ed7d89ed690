#include "heis/plate_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "heis/config.hpp"
#include "heis/errors.hpp"
#include "heis/legendrian_graph.hpp"
#include "heis/parallel.hpp"

namespace heis {
namespace {

// Orthonormal basis of Sym(n) for the Frobenius product, as vec'd n x n
// matrices (columns).
Eigen::MatrixXd sym_basis(int n) {
  const int m = n * (n + 1) / 2;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n * n, m);
  int c = 0;
  for (int i = 0; i < n; ++i) {
    B(i * n + i, c++) = 1.0;
  }
  const double s = std::sqrt(0.5);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      B(i * n + j, c) = s;
      B(j * n + i, c) = s;
      ++c;
    }
  }
  return B;
}

Eigen::MatrixXd element_matrix(const CoefficientTensor& c, const OctantStencil& st) {
  const Eigen::MatrixXd A = 0.5 * (c.a + c.a.transpose());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(st.local_size(), st.local_size());
  for (int o = 0; o < st.octants(); ++o) L += st.matrix(o).transpose() * A * st.matrix(o);
  return st.weight() * L;
}

void require_compatible(const CoefficientTensor& c, const ScalarField& u) {
  if (c.n != u.n()) throw ValidationError("coefficient tensor and field dimensions differ");
}

}  // namespace

double CoefficientTensor::form(const Eigen::MatrixXd& sigma) const {
  if (sigma.rows() != n || sigma.cols() != n) throw ValidationError("form: sigma has wrong shape");
  Eigen::VectorXd s(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s[i * n + j] = sigma(i, j);
  }
  return s.dot(a * s);
}

bool operator==(const CoefficientTensor& x, const CoefficientTensor& y) {
  return x.n == y.n && x.a == y.a && x.a_tilde == y.a_tilde && x.b == y.b && x.pi0_norm_h == y.pi0_norm_h;
}

CoefficientTensor compute_coefficients(const MetricForm& h) {
  const int n = h.n();
  CoefficientTensor c;
  c.n = n;
  const SimpleNVector pi0 = basis_pi0(n);
  const double pi0_sq = nvector_inner(h, pi0, pi0);
  c.pi0_norm_h = std::sqrt(pi0_sq);
  std::vector<SimpleNVector> pij;
  pij.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pij.push_back(basis_pij(n, i, j));
  }
  c.b.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) c.b(i, j) = nvector_inner(h, pi0, pij[static_cast<std::size_t>(i * n + j)]);
  }
  c.a_tilde.resize(n * n, n * n);
  c.a.resize(n * n, n * n);
  for (int p = 0; p < n * n; ++p) {
    for (int q = 0; q < n * n; ++q) {
      c.a_tilde(p, q) = nvector_inner(h, pij[static_cast<std::size_t>(p)], pij[static_cast<std::size_t>(q)]);
      c.a(p, q) = c.a_tilde(p, q) - c.b(p / n, p % n) * c.b(q / n, q % n) / pi0_sq;
    }
  }
  return c;
}

EllipticityReport ellipticity_report(const CoefficientTensor& c) {
  EllipticityReport r;
  const Eigen::MatrixXd B = sym_basis(c.n);
  const Eigen::MatrixXd A = 0.5 * (c.a + c.a.transpose());
  const Eigen::MatrixXd Q = B.transpose() * A * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  r.lambda0 = es.eigenvalues().minCoeff();
  r.Lambda0 = es.eigenvalues().maxCoeff();
  r.max_abs_a = c.a.cwiseAbs().maxCoeff();
  r.symmetry_defect = (c.a - c.a.transpose()).cwiseAbs().maxCoeff();
  return r;
}

double check_ellipticity(const CoefficientTensor& c) { return ellipticity_report(c).lambda0; }

double energy(const CoefficientTensor& c, const ScalarField& u) {
  require_compatible(c, u);
  const OctantStencil st(u);
  const Eigen::MatrixXd L = element_matrix(c, st);
  const auto& bases = st.bases();
  const auto vals = u.values();
  return parallel::deterministic_sum(bases.size(), [&](std::size_t k) {
    Eigen::VectorXd loc;
    st.gather(vals, bases[k], loc);
    return loc.dot(L * loc);
  });
}

Eigen::SparseMatrix<double> assemble_plate_operator(const CoefficientTensor& c, const ScalarField& grid) {
  require_compatible(c, grid);
  const OctantStencil st(grid);
  const Eigen::MatrixXd L = element_matrix(c, st);
  const ClampedIndex idx = clamped_index(grid);
  const auto& bases = st.bases();
  const int m = st.local_size();

  constexpr std::size_t kChunk = 1024;
  std::vector<std::vector<Eigen::Triplet<double>>> parts(parallel::chunk_count(bases.size(), kChunk));
  parallel::for_chunks(bases.size(), kChunk, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    auto& out = parts[ci];
    for (std::size_t k = begin; k < end; ++k) {
      const auto b = static_cast<std::ptrdiff_t>(bases[k]);
      for (int p = 0; p < m; ++p) {
        const std::ptrdiff_t sp = idx.slot[static_cast<std::size_t>(b + st.offset(p))];
        if (sp < 0) continue;
        for (int q = 0; q < m; ++q) {
          const std::ptrdiff_t sq = idx.slot[static_cast<std::size_t>(b + st.offset(q))];
          if (sq < 0 || L(p, q) == 0.0) continue;
          out.emplace_back(static_cast<int>(sp), static_cast<int>(sq), L(p, q));
        }
      }
    }
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  const auto nf = static_cast<Eigen::Index>(idx.free_nodes.size());
  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(all.begin(), all.end());
  return K;
}

ScalarField plate_gradient(const CoefficientTensor& c, const ScalarField& u) {
  require_compatible(c, u);
  const OctantStencil st(u);
  const Eigen::MatrixXd L = element_matrix(c, st);
  const auto vals = u.values();
  ScalarField g = u;
  std::fill(g.values().begin(), g.values().end(), 0.0);
  // Gather form: each free node collects the contributions of its base
  // neighbours in a fixed order, so the result is thread-count independent.
  const ClampedIndex idx = clamped_index(u);
  const int m = st.local_size();
  parallel::for_chunks(idx.free_nodes.size(), 512, [&](std::size_t, std::size_t begin, std::size_t end) {
    Eigen::VectorXd loc;
    for (std::size_t k = begin; k < end; ++k) {
      const auto node = static_cast<std::ptrdiff_t>(idx.free_nodes[k]);
      double acc = 0.0;
      for (int p = 0; p < m; ++p) {
        // Base b with b + offset(p) = node.
        const auto b = static_cast<std::size_t>(node - st.offset(p));
        st.gather(vals, b, loc);
        acc += L.row(p).dot(loc);
      }
      g[static_cast<std::size_t>(node)] = 2.0 * acc;
    }
  });
  return g;
}

PlateSolution solve_dirichlet(const PlateProblem& p, const PlateOptions& opts) {
  const CoefficientTensor& c = p.coeffs;
  const ScalarField& f = p.boundary_field;
  require_compatible(c, f);
  if (f.points() < 5) throw ValidationError("solve_dirichlet: grid needs at least 5 points per axis");
  for (double x : f.values()) {
    if (!std::isfinite(x)) throw ValidationError("solve_dirichlet: boundary field is not finite");
  }
  const double lambda0 = check_ellipticity(c);
  if (lambda0 < tol::kMinEllipticity) {
    throw NumericalError("ellipticity failure: lambda0 = " + std::to_string(lambda0));
  }
  const ClampedIndex idx = clamped_index(f);
  const Eigen::SparseMatrix<double> K = assemble_plate_operator(c, f);

  // Solve for the correction to the supplied field: K_ff d = -(K f)_f, i.e.
  // half the energy gradient at f. This keeps polynomial data exact up to
  // the rounding of the gradient itself.
  const ScalarField g0 = plate_gradient(c, f);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(idx.free_nodes.size()));
  for (std::size_t k = 0; k < idx.free_nodes.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = -0.5 * g0[idx.free_nodes[k]];

  PlateSolution sol;
  sol.unknowns = idx.free_nodes.size();
  Eigen::VectorXd d;
  if (sol.unknowns == 0) {
    d.resize(0);
    sol.method = "none";
  } else if (sol.unknowns <= opts.direct_limit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      throw NumericalError("solve_dirichlet: singular or indefinite system");
    }
    d = ldlt.solve(rhs);
    // Iterative refinement while it helps.
    double prev = (rhs - K * d).lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 4 && prev > 0.0; ++it) {
      const Eigen::VectorXd step = ldlt.solve(rhs - K * d);
      const Eigen::VectorXd next = d + step;
      const double r = (rhs - K * next).lpNorm<Eigen::Infinity>();
      if (!(r < prev)) break;
      d = next;
      prev = r;
    }
    sol.method = "sparse-ldlt";
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(opts.cg_tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(20 * sol.unknowns));
    cg.compute(K);
    if (cg.info() != Eigen::Success) throw NumericalError("solve_dirichlet: preconditioner failed");
    d = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw NumericalError("solve_dirichlet: conjugate gradient did not converge");
    sol.method = "pcg";
  }
  if (!d.allFinite()) throw NumericalError("solve_dirichlet: non-finite solution");

  sol.u = f;
  for (std::size_t k = 0; k < idx.free_nodes.size(); ++k) sol.u[idx.free_nodes[k]] += d[static_cast<Eigen::Index>(k)];
  const ScalarField g = plate_gradient(c, sol.u);
  for (std::size_t node : idx.free_nodes) sol.residual = std::max(sol.residual, std::abs(g[node]));
  sol.energy = energy(c, sol.u);
  return sol;
}

InteriorBoundReport interior_derivative_bound_check(const ScalarField& u, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw ValidationError("interior bound check needs 0 < r < R");
  const FieldDerivatives d(u);
  InteriorBoundReport rep;
  const SmallVec c = u.center();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.layer(i) < 1) continue;
    if ((u.node(i) - c).norm() > r) continue;
    rep.sup_hessian_sq = std::max(rep.sup_hessian_sq, d.node_jet(i).hess.squaredNorm());
  }
  const auto leaves = region_leaves(d, ball_region(Ball{c, R}));
  const double integral = integrate(leaves, [](const QuadratureLeaf& l) { return l.jet.hess.squaredNorm(); });
  rep.scaled_integral = integral / std::pow(R - r, u.n());
  rep.ratio = rep.scaled_integral > 0.0 ? rep.sup_hessian_sq / rep.scaled_integral : 0.0;
  return rep;
}

double agmon_ratio(const ScalarField& u) {
  const FieldDerivatives d(u);
  double inner = 0.0;
  double edge = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const int l = u.layer(i);
    if (l < 1) continue;
    const double g = d.node_jet(i).grad.norm();
    if (l == 1) {
      edge = std::max(edge, g);
    } else {
      inner = std::max(inner, g);
    }
  }
  if (edge == 0.0) return inner == 0.0 ? 0.0 : INFINITY;
  return inner / edge;
}

}  // namespace heis

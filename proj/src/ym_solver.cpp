#include "ym/ym_solver.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

#include "ym/reduce.hpp"

namespace ym {

SolveMethod parse_method(const std::string& name) {
  if (name == "gradient_descent") return SolveMethod::gradient_descent;
  if (name == "nonlinear_cg") return SolveMethod::nonlinear_cg;
  if (name == "newton") return SolveMethod::newton;
  throw std::invalid_argument("unknown solve method '" + name + "'");
}

std::string method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::gradient_descent: return "gradient_descent";
    case SolveMethod::nonlinear_cg: return "nonlinear_cg";
    case SolveMethod::newton: return "newton";
  }
  return "?";
}

namespace {

std::vector<int> free_edge_list(const LatticeComplex& cx) {
  std::vector<int> free;
  for (int e = 0; e < cx.edge_count(); ++e)
    if (cx.own_cell_class(1, e) != CellClass::boundary_tangential) free.push_back(e);
  return free;
}

// Cached sparse structure for one ball problem: gradient support, projections
// onto divergence-free directions, and the linearized (abelian-model) Hessian.
struct BallWorkspace {
  std::shared_ptr<const LatticeComplex> cx;
  std::vector<int> free_edges;
  std::vector<std::uint8_t> is_free;
  Eigen::SparseMatrix<double> Dn;        // gradients of constrained potentials
  Eigen::VectorXd w1;                    // edge measures
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> L0;   // Dn^T M1 Dn
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> CtC;  // Dn^T M1^2 Dn
  bool has_hessian = false;
  Eigen::SparseMatrix<double> H;  // h^4 D1^T D1 on free links

  explicit BallWorkspace(std::shared_ptr<const LatticeComplex> complex) : cx(std::move(complex)) {
    free_edges = free_edge_list(*cx);
    is_free.assign(cx->edge_count(), 0);
    for (int e : free_edges) is_free[e] = 1;
    w1 = cx->cell_weights(1);

    // potentials: vertices off the boundary surface; on closed complexes all
    // but one pinned vertex (constants are in the kernel of d anyway)
    std::vector<int> pots;
    for (int v = 0; v < cx->vertex_count(); ++v) {
      if (cx->closed() ? v != 0 : cx->own_cell_class(0, v) != CellClass::boundary_tangential)
        pots.push_back(v);
    }
    Eigen::SparseMatrix<double> P(static_cast<int>(pots.size()), cx->vertex_count());
    {
      std::vector<Eigen::Triplet<double>> t;
      for (int i = 0; i < static_cast<int>(pots.size()); ++i) t.emplace_back(i, pots[i], 1.0);
      P.setFromTriplets(t.begin(), t.end());
    }
    Dn = d_matrix(*cx, 0) * P.transpose();
    L0.compute(Eigen::SparseMatrix<double>(Dn.transpose() * w1.asDiagonal() * Dn));
    CtC.compute(
        Eigen::SparseMatrix<double>(Dn.transpose() * w1.cwiseProduct(w1).asDiagonal() * Dn));
    if (L0.info() != Eigen::Success || CtC.info() != Eigen::Success)
      throw SolverError("ball workspace: potential Laplacian factorization failed", 0.0);
  }

  void build_hessian() {
    if (has_hessian) return;
    const Eigen::SparseMatrix<double> D1 = d_matrix(*cx, 1);
    const double h4 = std::pow(cx->spacing(), 4);
    H = h4 * Eigen::SparseMatrix<double>(D1.transpose() * D1);
    has_hessian = true;
  }

  // measure-orthogonal removal of the exact (Dirichlet-potential) part
  Eigen::MatrixXd project_divfree(const Eigen::MatrixXd& g) const {
    return g - Dn * L0.solve(Dn.transpose() * (w1.asDiagonal() * g));
  }
  // plain-orthogonal projection onto {x : Dn^T M1 x = 0} (Newton constraint)
  Eigen::MatrixXd project_constraint(const Eigen::MatrixXd& g) const {
    return g - w1.asDiagonal() * (Dn * CtC.solve(Dn.transpose() * (w1.asDiagonal() * g)));
  }

  double residual_of(const Eigen::MatrixXd& grad) const {
    const Eigen::MatrixXd p = project_divfree(grad);
    double s = 0;
    for (int e : free_edges) s += p.row(e).squaredNorm();
    return std::sqrt(s);
  }
};

Eigen::MatrixXd gradient_matrix(const LinkField& U, const std::vector<std::uint8_t>& is_free) {
  const auto& cx = *U.complex;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(cx.edge_count(), algebra_dim(U.group));
  for (int f = 0; f < cx.face_count(); ++f) {
    const auto& loop = cx.face_loop(f);
    GroupElement pre[5];
    pre[0] = identity(U.group);
    GroupElement factors[4];
    for (int i = 0; i < 4; ++i) {
      const GroupElement& l = U.links[loop.edge[i]];
      factors[i] = loop.sign[i] > 0 ? l : inverse(l);
      pre[i + 1] = mul(pre[i], factors[i]);
    }
    AlgebraElement lp;
    try {
      lp = ym::log(pre[4]);
    } catch (const BranchCutError&) {
      throw BranchCutError("plaquette " + std::to_string(f) + " holonomy at the branch cut", f, 2);
    }
    GroupElement suf = identity(U.group);  // F_{i+1} ... F_4
    for (int i = 3; i >= 0; --i) {
      const int e = loop.edge[i];
      if (is_free[e]) {
        const AlgebraElement contrib = loop.sign[i] > 0
                                           ? conjugate(inverse(pre[i]), lp)
                                           : (-1.0 * conjugate(suf, lp));
        for (int k = 0; k < algebra_dim(U.group); ++k) g(e, k) += contrib.v[k];
      }
      suf = mul(factors[i], suf);
    }
  }
  return g;
}

}  // namespace

Cochain energy_gradient(const LinkField& U, const BallRegion& region) {
  const LinkField Us = U.complex == region.sub() ? U : extract_field(U, region);
  std::vector<std::uint8_t> is_free(Us.complex->edge_count(), 0);
  for (int e : free_edge_list(*Us.complex)) is_free[e] = 1;
  Cochain g = zero_cochain(Us.complex, Us.group, 1);
  g.values = gradient_matrix(Us, is_free);
  return g;
}

double ym_residual(const LinkField& U, const BallRegion& region) {
  const LinkField Us = U.complex == region.sub() ? U : extract_field(U, region);
  BallWorkspace ws(Us.complex);
  return ws.residual_of(gradient_matrix(Us, ws.is_free));
}

double ym_residual(const LinkField& U) {
  if (!U.complex->closed())
    throw std::invalid_argument("ym_residual: whole-complex form needs a closed complex");
  BallWorkspace ws(U.complex);
  return ws.residual_of(gradient_matrix(U, ws.is_free));
}

namespace {

// conjugate gradient for Pi Mf H Mf Pi x = Pi b on the free-link constraint
// space (Mf masks tangential links, Pi removes pure-gauge directions)
Eigen::VectorXd projected_cg(const BallWorkspace& ws, const Eigen::VectorXd& b, double tol,
                             int max_iter) {
  const auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd hx = ws.H * ws.project_constraint(x);
    for (int e = 0; e < hx.size(); ++e)
      if (!ws.is_free[e]) hx[e] = 0.0;
    return ws.project_constraint(hx);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = ws.project_constraint(b);
  const double b0 = r.norm();
  if (b0 == 0) return x;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd ap = apply(p);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    if (std::sqrt(rs_new) <= tol * b0) return ws.project_constraint(x);
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  throw SolverError("newton system: projected CG did not converge", std::sqrt(rs) / b0);
}

Cochain newton_correction(BallWorkspace& ws, const LinkField& U, const Eigen::MatrixXd& grad) {
  ws.build_hessian();
  const double h = U.complex->spacing();
  Cochain delta = zero_cochain(U.complex, U.group, 1);
  for (int col = 0; col < delta.values.cols(); ++col) {
    const Eigen::VectorXd ga = h * grad.col(col);  // gradient in connection-form coordinates
    delta.values.col(col) = projected_cg(ws, -ga, 1e-12, 10 * U.complex->edge_count() + 200);
  }
  // structural guarantee: the correction vanishes on tangential links
  for (int e = 0; e < U.complex->edge_count(); ++e)
    if (!ws.is_free[e]) delta.values.row(e).setZero();
  return delta;
}

double grad_norm(const Eigen::MatrixXd& g) { return std::sqrt(g.squaredNorm()); }

// directional derivative of the energy along U_e -> U_e exp(t h delta_e)
double right_directional(const LinkField& U, const Eigen::MatrixXd& grad, const Cochain& delta) {
  double m = 0;
  const double h = U.complex->spacing();
  for (int e = 0; e < U.complex->edge_count(); ++e) {
    AlgebraElement ge = zero_algebra(U.group);
    for (int k = 0; k < algebra_dim(U.group); ++k) ge.v[k] = grad(e, k);
    m += h * inner(conjugate(inverse(U.links[e]), ge), delta.at(e));
  }
  return m;
}

LinkField step_left(const LinkField& U, const Eigen::MatrixXd& dir, double t,
                    const std::vector<std::uint8_t>& is_free) {
  LinkField r = U;
  for (int e = 0; e < U.complex->edge_count(); ++e) {
    if (!is_free[e]) continue;
    AlgebraElement x = zero_algebra(U.group);
    for (int k = 0; k < algebra_dim(U.group); ++k) x.v[k] = t * dir(e, k);
    r.links[e] = mul(ym::exp(x), r.links[e]);
  }
  return r;
}

LinkField step_right_exp(const LinkField& U, const Cochain& delta, double t) {
  LinkField r = U;
  const double h = U.complex->spacing();
  for (int e = 0; e < U.complex->edge_count(); ++e)
    r.links[e] = mul(r.links[e], ym::exp((t * h) * delta.at(e)));
  return r;
}

}  // namespace

Cochain newton_step(const LinkField& U, const BallRegion& region) {
  const LinkField Us = U.complex == region.sub() ? U : extract_field(U, region);
  const auto [cres, cres_l2] = coulomb_residual(Us, BoundaryCondition::normal);
  (void)cres_l2;
  if (cres > 1e-6)
    throw std::invalid_argument("newton_step: field not in identity-boundary Coulomb gauge");
  BallWorkspace ws(Us.complex);
  return newton_correction(ws, Us, gradient_matrix(Us, ws.is_free));
}

std::pair<LinkField, SolveReport> solve_dirichlet_ym(const LinkField& U_init,
                                                     const BallRegion& region,
                                                     const LinkField& boundary,
                                                     const SolveOptions& opts) {
  if (opts.tol_residual <= 0 || opts.max_iter < 1)
    throw std::invalid_argument("solve_dirichlet_ym: invalid options");
  LinkField U = U_init.complex == region.sub() ? U_init : extract_field(U_init, region);
  if (boundary.complex != region.boundary())
    throw std::invalid_argument("solve_dirichlet_ym: boundary data must live on the boundary complex");

  // the prescribed trace is installed bit-exactly and never touched again
  {
    const LinkField trace = restrict_boundary(U, region);
    for (int e = 0; e < region.boundary()->edge_count(); ++e)
      if (max_abs_diff(trace.links[e], boundary.links[e]) > 1e-12)
        throw std::invalid_argument("solve_dirichlet_ym: init does not match the boundary data");
  }
  U = with_boundary(U, region, boundary);

  SolveReport rep;
  BallWorkspace ws(region.sub());
  const bool canonical = opts.method == SolveMethod::newton || opts.gauge_refix_every > 0;
  const double fix_tol = std::min(1e-8, opts.tol_residual);

  auto refix = [&](LinkField& V) {
    GaugeFixOptions go;
    go.tol = fix_tol;
    go.compute_norm_ratio = false;
    GaugeFixResult r = coulomb_fix_identity_boundary(V, go);
    if (!r.report.converged && rep.failure.empty()) rep.failure = "gauge refix did not converge";
    V = r.fixed;
  };

  try {
    bool fresh_gauge = false;
    if (opts.method == SolveMethod::newton) {
      refix(U);
      fresh_gauge = true;
    }
    double E = energy(U);
    Eigen::MatrixXd prev_grad, prev_dir;
    double t_prev = -1.0;  // warm start for the line searches
    for (int iter = 0;; ++iter) {
      const Eigen::MatrixXd grad = gradient_matrix(U, ws.is_free);
      const double res = ws.residual_of(grad);
      rep.energy_trace.push_back(E);
      rep.residual_trace.push_back(res);
      rep.final_residual = res;
      if (res <= opts.tol_residual) {
        if (canonical && !fresh_gauge) {
          refix(U);
          fresh_gauge = true;
          E = energy(U);
          continue;  // re-measure in the canonical gauge
        }
        rep.converged = true;
        break;
      }
      if (iter >= opts.max_iter) break;

      bool stepped = false;
      const double gn = grad_norm(grad);

      // Backtracking along `dir` (directional derivative m < 0). Once the
      // certified decrease falls below the energy's floating-point resolution
      // the search switches to the gradient norm, which any stable step still
      // reduces measurably.
      const auto line_search = [&](const Eigen::MatrixXd& dir, double m) -> bool {
        const double t0 = opts.step_init / std::max(grad_norm(dir), 1e-300);
        const double slack = 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, E);
        double t = t_prev > 0 ? std::min(t0, t_prev / opts.step_shrink) : t0;
        while (t > 1e-16 * t0) {
          LinkField trial = step_left(U, dir, t, ws.is_free);
          const double Et = energy(trial);
          bool accept;
          if (opts.armijo_c * t * (-m) >= slack) {
            accept = Et <= E + opts.armijo_c * t * m;  // certified decrease
          } else {
            accept = Et <= E + slack && grad_norm(gradient_matrix(trial, ws.is_free)) < gn;
          }
          if (accept) {
            U = std::move(trial);
            E = Et;
            t_prev = t;
            return true;
          }
          t *= opts.step_shrink;
        }
        return false;
      };

      if (opts.method == SolveMethod::newton) {
        try {
          const Cochain delta = newton_correction(ws, U, grad);
          const double m = right_directional(U, grad, delta);
          if (m < 0) {
            double t = 1.0;
            while (t > 1e-12) {
              LinkField trial = step_right_exp(U, delta, t);
              const double Et = energy(trial);
              if (Et <= E + opts.armijo_c * t * m) {
                U = std::move(trial);
                E = Et;
                stepped = true;
                rep.newton_steps++;
                break;
              }
              t *= opts.step_shrink;
            }
          }
        } catch (const SolverError&) {
          // fall back to a gradient step below
        }
      } else if (opts.method == SolveMethod::nonlinear_cg) {
        Eigen::MatrixXd dir = -grad;
        if (prev_grad.size() > 0) {
          const double denom = prev_grad.squaredNorm();
          const double beta =
              std::max(0.0, (grad.array() * (grad - prev_grad).array()).sum() / denom);
          dir = -grad + beta * prev_dir;
          if ((dir.array() * grad.array()).sum() >= 0) dir = -grad;  // restart
        }
        const double m = (dir.array() * grad.array()).sum();
        stepped = line_search(dir, m);
        if (stepped) {
          prev_grad = grad;
          prev_dir = dir;
        }
      }

      if (!stepped) {  // plain gradient descent step (also the newton fallback)
        stepped = line_search(-grad, -gn * gn);
      }
      if (!stepped) {
        rep.failure = "line search stalled";
        break;
      }
      fresh_gauge = false;
      rep.iterations = iter + 1;
      if (opts.gauge_refix_every > 0 && (iter + 1) % opts.gauge_refix_every == 0) {
        refix(U);
        fresh_gauge = true;
        E = energy(U);
      }
    }
  } catch (const BranchCutError& err) {
    rep.failure = err.what();
    rep.converged = false;
  }

  // boundary fidelity is structural; measure it anyway for the report
  {
    const LinkField trace = restrict_boundary(U, region);
    double fid = 0;
    for (int e = 0; e < region.boundary()->edge_count(); ++e)
      fid = std::max(fid, max_abs_diff(trace.links[e], boundary.links[e]));
    rep.boundary_fidelity = fid;
  }
  try {
    const Cochain a = connection_form(U);
    rep.norm_a_l4 = norm_l4(a);
    rep.norm_a_sobolev1 = norm_sobolev1(a, BoundaryCondition::tangential);
    rep.norm_f_l2 = std::sqrt(2.0 * energy(U));
    rep.norm_trace_half = norm_boundary_half(restrict_boundary(a, region), region);
  } catch (const BranchCutError&) {
    // leave the norms at zero; the failure note already names the cell
  }
  return {U, rep};
}

LinkField abelian_oracle_solve(const BallRegion& region, const LinkField& boundary) {
  if (boundary.group != GroupTag::U1)
    throw std::invalid_argument("abelian_oracle_solve: boundary data must be U(1)");
  if (boundary.complex != region.boundary())
    throw std::invalid_argument("abelian_oracle_solve: data must live on the boundary complex");
  const auto& sub = *region.sub();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(sub.edge_count());
  for (int e = 0; e < region.boundary()->edge_count(); ++e) {
    const GroupElement& g = boundary.links[e];
    if (near_branch_cut(g)) throw BranchCutError("abelian_oracle_solve: boundary phase at the cut", e, 1);
    theta[region.boundary_to_sub(1, e)] = std::atan2(g.q[1], g.q[0]);
  }

  const std::vector<int> free = free_edge_list(sub);
  Eigen::SparseMatrix<double> Pf(static_cast<int>(free.size()), sub.edge_count());
  {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < static_cast<int>(free.size()); ++i) t.emplace_back(i, free[i], 1.0);
    Pf.setFromTriplets(t.begin(), t.end());
  }
  const Eigen::SparseMatrix<double> D1 = d_matrix(sub, 1);
  const Eigen::SparseMatrix<double> L = D1.transpose() * D1;
  const Eigen::SparseMatrix<double> A = Pf * L * Pf.transpose();
  const Eigen::VectorXd rhs = -(Pf * (L * theta));

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * sub.edge_count() + 200);
  cg.compute(A);
  const Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success && cg.error() > 1e-10)
    throw SolverError("abelian_oracle_solve: CG stalled", cg.error());

  LinkField U = flat_field(region.sub(), GroupTag::U1);
  Eigen::VectorXd full = theta + Pf.transpose() * x;
  for (int e = 0; e < sub.edge_count(); ++e)
    U.links[e] = ym::exp(AlgebraElement{GroupTag::U1, {full[e], 0, 0}});
  return U;
}

}  // namespace ym

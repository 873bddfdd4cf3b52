#pragma once

#include <string>
#include <utility>

#include "ym/gauge.hpp"

namespace ym {

enum class SolveMethod { gradient_descent, nonlinear_cg, newton };
SolveMethod parse_method(const std::string& name);
std::string method_name(SolveMethod m);

struct SolveOptions {
  SolveMethod method = SolveMethod::newton;
  double tol_residual = 1e-8;
  int max_iter = 500;
  int gauge_refix_every = 25;  // 0 = never
  double step_init = 1.0;      // scaled by the inverse gradient norm
  double step_shrink = 0.5;
  double armijo_c = 1e-4;
};

struct SolveReport {
  int iterations = 0;
  int newton_steps = 0;
  std::vector<double> energy_trace;
  std::vector<double> residual_trace;
  double final_residual = 0.0;
  double boundary_fidelity = 0.0;  // max deviation of tangential links; 0 exactly
  bool converged = false;
  std::string failure;
  // measured hypothesis norms at the returned field
  double norm_a_l4 = 0.0;
  double norm_a_sobolev1 = 0.0;
  double norm_f_l2 = 0.0;
  double norm_trace_half = 0.0;
};

/// Exact derivative of the region-face plaquette energy under left-translated
/// perturbations U_e -> exp(tX) U_e, as a 1-cochain (group coordinates) on the
/// region's sub complex, supported on free (interior + normal) links.
Cochain energy_gradient(const LinkField& U, const BallRegion& region);

/// l2 over free links of the gradient with its exact part (Dirichlet
/// potentials) removed: zero iff first-order optimality holds against all
/// divergence-free, boundary-vanishing directions.
double ym_residual(const LinkField& U, const BallRegion& region);
double ym_residual(const LinkField& U);  // whole closed complex, all links free

/// Dirichlet Yang-Mills solve: tangential links held at `boundary` (bit-exact,
/// enforced structurally), energy descent over interior and boundary-normal
/// links. When the method is newton (or gauge refixes are enabled) the
/// returned representative is in identity-boundary Coulomb gauge.
std::pair<LinkField, SolveReport> solve_dirichlet_ym(const LinkField& U_init,
                                                     const BallRegion& region,
                                                     const LinkField& boundary,
                                                     const SolveOptions& opts);

/// Projected Newton correction from the linearized operator d*d at the current
/// Coulomb gauge: i*delta = 0 exactly, d*delta = 0 to solver tolerance.
/// Requires the field to be in identity-boundary Coulomb gauge (1e-6).
Cochain newton_step(const LinkField& U, const BallRegion& region);

/// For G = U(1) the Dirichlet problem is the sparse linear system for the
/// free-link phases; this solves it directly (global minimizer with the given
/// tangential trace). Independent oracle for the descent paths.
LinkField abelian_oracle_solve(const BallRegion& region, const LinkField& boundary);

}  // namespace ym

#pragma once

#include <utility>
#include <vector>

#include "ym/fields.hpp"

namespace ym {

/// One group element per vertex.
struct VertexGaugeField {
  std::shared_ptr<const LatticeComplex> complex;
  GroupTag group = GroupTag::SU2;
  std::vector<GroupElement> site;
};

VertexGaugeField identity_gauge(std::shared_ptr<const LatticeComplex> cx, GroupTag tag);
VertexGaugeField random_gauge(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, Rng& rng,
                              double scale);
/// Pointwise product (g h)(v) = g(v) h(v).
VertexGaugeField compose(const VertexGaugeField& g, const VertexGaugeField& h);
VertexGaugeField inverse(const VertexGaugeField& g);

/// U'_e = g(tail) U_e g(head)^-1.
LinkField apply_gauge(const LinkField& U, const VertexGaugeField& g);

struct GaugeFixReport {
  int iterations = 0;
  double functional = 0.0;  // sum_e w_e |log U'_e|^2, minimized by the relaxation
  std::vector<double> functional_trace;
  double coulomb_residual_max = 0.0;  // |d* a| at constrained vertices, from logs
  double coulomb_residual_l2 = 0.0;
  double boundary_residual_max = 0.0;  // Dirichlet variant: |d*_boundary i*a|
  double boundary_residual_l2 = 0.0;
  double norm_ratio = 0.0;  // |a|_{L2_1} / |F| (or the two-term bound)
  bool converged = false;
};

struct GaugeFixOptions {
  double tol = 1e-8;
  int max_iter = 10000;   // sweeps
  double overrelax = 1.7; // safeguarded down to plain relaxation
  bool compute_norm_ratio = true;  // trace-norm bound ratios cost an extra solve
};

struct GaugeFixResult {
  LinkField fixed;
  VertexGaugeField g;
  GaugeFixReport report;
};

/// Coulomb fix with free boundary vertices: first-order optimality encodes
/// d*a = 0 at every vertex, which on box complexes includes the Neumann trace.
GaugeFixResult coulomb_fix_neumann(const LinkField& U, const GaugeFixOptions& opts = {});

/// Boundary vertices frozen to the identity; tangential links bit-unchanged,
/// d*a = 0 at interior vertices. Box complexes only.
GaugeFixResult coulomb_fix_identity_boundary(const LinkField& U, const GaugeFixOptions& opts = {});

/// Coulomb fix on a closed complex (the boundary 3-complex of a ball).
GaugeFixResult coulomb_fix_boundary_closed(const LinkField& Ub, const GaugeFixOptions& opts = {});

/// Two-stage Dirichlet Coulomb fix: closed fix of the boundary trace, extended
/// by the identity inward, then the identity-boundary fix. Input on the
/// region's parent (extracted) or sub complex; result lives on the sub.
GaugeFixResult dirichlet_coulomb_fix(const LinkField& U, const BallRegion& region,
                                     const GaugeFixOptions& opts = {});

/// (max-vertex, weighted-l2) of the log-based divergence at constrained
/// vertices: all vertices for the tangential flavor, interior only for normal.
std::pair<double, double> coulomb_residual(const LinkField& U, BoundaryCondition bc);

struct UniquenessVerdict {
  bool equivalent_by_constant = false;
  GroupElement witness;
  double residual = 0.0;  // sqrt(sum_e |Ad_c a_e - b_e|^2) at the best constant
};

/// Best constant c minimizing sum_e |Ad_c a_e - b_e|^2 (closed form via SVD).
UniquenessVerdict constant_gauge_match(const LinkField& Ua, const LinkField& Ub, double tol);

/// Constant-gauge uniqueness for Dirichlet-Coulomb-fixed fields on a ball.
/// Throws if either input's residuals exceed `fixed_tol`.
UniquenessVerdict verify_gauge_uniqueness(const LinkField& Ua, const LinkField& Ub,
                                          const BallRegion& region, double tol,
                                          double fixed_tol = 1e-5);

}  // namespace ym

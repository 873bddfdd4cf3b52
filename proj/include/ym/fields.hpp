#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <vector>

#include "ym/grid.hpp"
#include "ym/group.hpp"

namespace ym {

/// Which trace vanishes on the boundary surface: normal means i*alpha = 0
/// (Dirichlet data), tangential means i*(*alpha) = 0 (Neumann data). The two
/// flavors coincide on closed complexes.
enum class BoundaryCondition { normal, tangential };

/// One structure-group element per edge: the canonical connection state.
struct LinkField {
  std::shared_ptr<const LatticeComplex> complex;
  GroupTag group = GroupTag::SU2;
  std::vector<GroupElement> links;
};

LinkField flat_field(std::shared_ptr<const LatticeComplex> cx, GroupTag tag);
LinkField random_field(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, Rng& rng,
                       double scale);

/// One Lie-algebra element per k-cell, stored as a (cells x algebra_dim) matrix
/// so the sparse cochain operators act column-wise.
struct Cochain {
  std::shared_ptr<const LatticeComplex> complex;
  GroupTag group = GroupTag::SU2;
  int degree = 0;
  Eigen::MatrixXd values;

  AlgebraElement at(int cell) const {
    AlgebraElement x = zero_algebra(group);
    for (int i = 0; i < algebra_dim(group); ++i) x.v[i] = values(cell, i);
    return x;
  }
  void set(int cell, const AlgebraElement& x) {
    for (int i = 0; i < algebra_dim(group); ++i) values(cell, i) = x.v[i];
  }
};

Cochain zero_cochain(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, int degree);

struct HodgeParts {
  Cochain exact;
  Cochain coexact;
  Cochain harmonic;
  BoundaryCondition bc;
};

// -- cochain calculus ---------------------------------------------------------

Cochain d(const Cochain& c);
Cochain codiff(const Cochain& c, BoundaryCondition bc);

/// Coboundary on k-cochain coordinate columns: B_{k+1}^T / h.
Eigen::SparseMatrix<double> d_matrix(const LatticeComplex& cx, int k);
/// Weighted adjoint of d_matrix(cx, k-1); rows at tangential (k-1)-cells are
/// zeroed for the normal flavor.
Eigen::SparseMatrix<double> codiff_matrix(const LatticeComplex& cx, int k, BoundaryCondition bc);

// -- connection geometry ------------------------------------------------------

/// a_e = log(U_e) / h. Throws BranchCutError naming the offending edge.
Cochain connection_form(const LinkField& U);
/// U_e = exp(h a_e); inverse of connection_form.
LinkField link_field(const Cochain& a);

GroupElement plaquette_holonomy(const LinkField& U, int face);
/// F_p = log(holonomy) / h^2 with the base-vertex-anchored ordered product.
Cochain plaquette_curvature(const LinkField& U);

double energy(const LinkField& U);
double energy(const LinkField& U, const BallRegion& region);  // non-exterior faces only

/// Sorted multiset of Re tr over all plaquette holonomies (gauge invariant).
std::vector<double> plaquette_trace_spectrum(const LinkField& U);

// -- inner products and norms -------------------------------------------------

double inner_l2(const Cochain& a, const Cochain& b);
double norm_l2(const Cochain& c);
double norm_l4(const Cochain& c);
/// Gaffney norm sqrt(|c|^2 + |dc|^2 + |d*c|^2); discrete stand-in for L^2_1.
double norm_sobolev1(const Cochain& c, BoundaryCondition bc);

double norm_l2(const Cochain& c, const BallRegion& region);
double norm_l4(const Cochain& c, const BallRegion& region);
double norm_sobolev1(const Cochain& c, const BallRegion& region, BoundaryCondition bc);

/// L^2_{1/2} trace norm: Gaffney norm of the minimizing extension of cb into
/// the region (one sparse SPD solve). cb lives on region.boundary().
double norm_boundary_half(const Cochain& cb, const BallRegion& region);

// -- Hodge decomposition ------------------------------------------------------

/// Exact / coexact / harmonic split on the cochain's own complex. With the
/// normal flavor the potentials are constrained to vanish on tangential cells
/// and the input's tangential trace is carried by the coexact part.
HodgeParts hodge_decompose(const Cochain& c, BoundaryCondition bc);

/// Just the d(potential) projection of c; the bc flavor constrains the
/// potential's trace. This is the abelian gauge-fixing oracle.
Cochain exact_part(const Cochain& c, BoundaryCondition bc);

// -- region plumbing ----------------------------------------------------------

LinkField extract_field(const LinkField& U, const BallRegion& region);
Cochain extract_cochain(const Cochain& c, const BallRegion& region);

/// Pullback to the tangential surface; accepts fields on the parent or on the
/// region's sub-complex.
LinkField restrict_boundary(const LinkField& U, const BallRegion& region);
Cochain restrict_boundary(const Cochain& c, const BallRegion& region);

/// Copy of U (on region.sub()) with tangential links overwritten by bdata.
LinkField with_boundary(const LinkField& U, const BallRegion& region, const LinkField& bdata);

/// Piecewise field: inner (on region.sub()) on interior and boundary-normal
/// links, outer elsewhere. Tangential traces must agree to 1e-12.
LinkField patch(const BallRegion& region, const LinkField& inner, const LinkField& outer);

}  // namespace ym

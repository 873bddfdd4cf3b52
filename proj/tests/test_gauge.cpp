#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "ym/gauge.hpp"

using namespace ym;

namespace {

double max_link_diff(const LinkField& a, const LinkField& b) {
  double m = 0;
  for (std::size_t e = 0; e < a.links.size(); ++e) m = std::max(m, max_abs_diff(a.links[e], b.links[e]));
  return m;
}

void check_monotone_trace(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1 + 1e-12) + 1e-14);
}

}  // namespace

TEST_CASE("gauge action: identity, constants, composition law") {
  auto torus = build_torus({3, 3, 3, 3}, 1.0);
  Rng rng(3);
  LinkField U = random_field(torus, GroupTag::SU2, rng, 0.4);

  CHECK(max_link_diff(apply_gauge(U, identity_gauge(torus, GroupTag::SU2)), U) == 0.0);

  // constant gauge conjugates the connection form edgewise
  const GroupElement c = random_group(rng, GroupTag::SU2, 2.0);
  VertexGaugeField cg = identity_gauge(torus, GroupTag::SU2);
  for (auto& s : cg.site) s = c;
  const Cochain a = connection_form(U);
  const Cochain ac = connection_form(apply_gauge(U, cg));
  for (int e = 0; e < torus->edge_count(); ++e)
    CHECK(norm(ac.at(e) - conjugate(c, a.at(e))) <= 1e-12);

  VertexGaugeField g = random_gauge(torus, GroupTag::SU2, rng, 1.0);
  VertexGaugeField h = random_gauge(torus, GroupTag::SU2, rng, 1.0);
  CHECK(max_link_diff(apply_gauge(U, compose(g, h)), apply_gauge(apply_gauge(U, h), g)) <= 1e-12);
}

TEST_CASE("curvature covariance and energy invariance under gauge") {
  auto torus = build_torus({3, 3, 3, 3}, 0.5);
  Rng rng(5);
  for (GroupTag tag : {GroupTag::U1, GroupTag::SU2}) {
    LinkField U = random_field(torus, tag, rng, 0.3);
    VertexGaugeField g = random_gauge(torus, tag, rng, 1.0);
    LinkField V = apply_gauge(U, g);
    const Cochain F = plaquette_curvature(U);
    const Cochain Fg = plaquette_curvature(V);
    for (int f = 0; f < torus->face_count(); ++f) {
      const int base = torus->face_loop(f).base_vertex;
      CHECK(norm(Fg.at(f) - conjugate(g.site[base], F.at(f))) <= 1e-12);
    }
    const double e0 = energy(U);
    CHECK(std::abs(energy(V) - e0) <= 1e-12 * std::max(1.0, e0));
  }
}

TEST_CASE("Neumann Coulomb fix: flat input, abelian Hodge oracle, SU2 convergence") {
  auto box = build_box({4, 4, 4, 4}, 1.0);
  GaugeFixOptions opts;
  opts.tol = 1e-10;

  GaugeFixResult flat = coulomb_fix_neumann(flat_field(box, GroupTag::SU2), opts);
  CHECK(flat.report.converged);
  CHECK(flat.report.coulomb_residual_max == 0.0);
  CHECK(flat.report.functional == 0.0);
  CHECK(max_link_diff(flat.fixed, flat_field(box, GroupTag::SU2)) == 0.0);

  Rng rng(7);
  LinkField u1 = random_field(box, GroupTag::U1, rng, 0.15);
  GaugeFixResult r = coulomb_fix_neumann(u1, opts);
  CHECK(r.report.converged);
  // abelian Coulomb fixing = removing the exact part with a free potential
  Cochain a = connection_form(u1);
  Cochain expected = a;
  expected.values -= exact_part(a, BoundaryCondition::tangential).values;
  CHECK((connection_form(r.fixed).values - expected.values).cwiseAbs().maxCoeff() <= 1e-8);
  check_monotone_trace(r.report.functional_trace);

  LinkField su2 = random_field(box, GroupTag::SU2, rng, 0.1);
  GaugeFixResult rs = coulomb_fix_neumann(su2, GaugeFixOptions{1e-8, 10000, 1.7, true});
  CHECK(rs.report.converged);
  CHECK(rs.report.coulomb_residual_max <= 1e-8);
  CHECK(std::isfinite(rs.report.norm_ratio));
  CHECK(rs.report.norm_ratio > 0.0);
  CHECK(std::abs(energy(rs.fixed) - energy(su2)) <= 1e-12 * std::max(1.0, energy(su2)));
  check_monotone_trace(rs.report.functional_trace);
}

TEST_CASE("identity-boundary fix: frozen tangential links, abelian oracle") {
  auto box = build_box({4, 4, 4, 4}, 0.5);
  GaugeFixOptions opts;
  opts.tol = 1e-10;

  GaugeFixResult flat = coulomb_fix_identity_boundary(flat_field(box, GroupTag::SU2), opts);
  for (const auto& s : flat.g.site) CHECK(max_abs_diff(s, identity(GroupTag::SU2)) == 0.0);

  Rng rng(11);
  LinkField su2 = random_field(box, GroupTag::SU2, rng, 0.1);
  GaugeFixResult r = coulomb_fix_identity_boundary(su2, opts);
  CHECK(r.report.converged);
  for (int e = 0; e < box->edge_count(); ++e)
    if (box->own_cell_class(1, e) == CellClass::boundary_tangential)
      CHECK(max_abs_diff(r.fixed.links[e], su2.links[e]) == 0.0);  // bit-identical

  LinkField u1 = random_field(box, GroupTag::U1, rng, 0.15);
  GaugeFixResult ru = coulomb_fix_identity_boundary(u1, opts);
  Cochain a = connection_form(u1);
  Cochain expected = a;
  expected.values -= exact_part(a, BoundaryCondition::normal).values;
  CHECK((connection_form(ru.fixed).values - expected.values).cwiseAbs().maxCoeff() <= 1e-8);

  auto torus = build_torus({3, 3, 3, 3}, 1.0);
  CHECK_THROWS_AS((void)coulomb_fix_identity_boundary(flat_field(torus, GroupTag::U1), opts),
                  std::invalid_argument);
}

TEST_CASE("closed boundary fix: abelian oracle and uniqueness up to constants") {
  auto box = build_box({4, 4, 4, 4}, 1.0);
  BallRegion region = build_ball(box, {0, 0, 0, 0}, {4, 4, 4, 4});
  Rng rng(13);

  GaugeFixOptions opts;
  opts.tol = 1e-12;
  LinkField u1b = restrict_boundary(random_field(box, GroupTag::U1, rng, 0.15), region);
  GaugeFixResult r = coulomb_fix_boundary_closed(u1b, opts);
  CHECK(r.report.converged);
  Cochain ab = connection_form(u1b);
  Cochain expected = ab;
  expected.values -= exact_part(ab, BoundaryCondition::tangential).values;
  CHECK((connection_form(r.fixed).values - expected.values).cwiseAbs().maxCoeff() <= 1e-8);

  // two runs from gauge-shifted starts agree up to a constant
  LinkField sb = restrict_boundary(random_field(box, GroupTag::SU2, rng, 0.1), region);
  GaugeFixResult r1 = coulomb_fix_boundary_closed(sb, opts);
  VertexGaugeField shift = random_gauge(region.boundary(), GroupTag::SU2, rng, 0.5);
  GaugeFixResult r2 = coulomb_fix_boundary_closed(apply_gauge(sb, shift), opts);
  CHECK(r1.report.converged);
  CHECK(r2.report.converged);
  UniquenessVerdict verdict = constant_gauge_match(r1.fixed, r2.fixed, 1e-6);
  CHECK(verdict.equivalent_by_constant);
  CHECK(verdict.residual <= 1e-6);
}

TEST_CASE("Dirichlet Coulomb fix: both residuals, independent linear oracle") {
  auto box = build_box({4, 4, 4, 4}, 1.0);
  BallRegion region = build_ball(box, {0, 0, 0, 0}, {4, 4, 4, 4});
  Rng rng(17);

  GaugeFixOptions opts;
  opts.tol = 1e-10;
  GaugeFixResult flat = dirichlet_coulomb_fix(flat_field(box, GroupTag::SU2), region, opts);
  CHECK(flat.report.converged);
  CHECK(max_link_diff(flat.fixed, flat_field(box, GroupTag::SU2)) == 0.0);

  LinkField u1 = random_field(box, GroupTag::U1, rng, 0.15);
  GaugeFixResult r = dirichlet_coulomb_fix(u1, region, opts);
  CHECK(r.report.converged);
  CHECK(r.report.coulomb_residual_max <= 1e-8);
  CHECK(r.report.boundary_residual_max <= 1e-8);
  CHECK(std::abs(energy(r.fixed) - energy(u1)) <= 1e-12);

  // oracle: one linear system for the gauge phase gamma pinned at a boundary
  // vertex; boundary rows give d*_b(i*(a - d gamma)) = 0, interior rows give
  // d*(a - d gamma) = 0
  const auto& bc = *region.boundary();
  const int V = box->vertex_count();
  const Eigen::MatrixXd D = Eigen::MatrixXd(d_matrix(*box, 1 - 1));
  const Eigen::MatrixXd Cn = Eigen::MatrixXd(codiff_matrix(*box, 1, BoundaryCondition::normal));
  const Eigen::MatrixXd Db = Eigen::MatrixXd(d_matrix(bc, 0));
  const Eigen::MatrixXd Cb = Eigen::MatrixXd(codiff_matrix(bc, 1, BoundaryCondition::tangential));
  const Cochain a = connection_form(u1);
  const Cochain ab = restrict_boundary(a, region);

  const int nb = bc.vertex_count();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb + V + 1, V);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb + V + 1);
  Eigen::MatrixXd Lb = Cb * Db;  // boundary Laplacian in boundary-vertex indexing
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) A(i, region.boundary_to_sub(0, j)) += Lb(i, j);
    rhs(i) = (Cb * ab.values.col(0))(i);
  }
  A.block(nb, 0, V, V) = Cn * D;
  rhs.segment(nb, V) = Cn * a.values.col(0);
  A(nb + V, region.boundary_to_sub(0, 0)) = 1.0;  // pin the gauge freedom
  const Eigen::VectorXd gamma = A.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd a_oracle = a.values.col(0) - D * gamma;

  CHECK((connection_form(r.fixed).values.col(0) - a_oracle).cwiseAbs().maxCoeff() <= 1e-8);

  // SU2: both residuals reached, ratio finite
  LinkField su2 = random_field(box, GroupTag::SU2, rng, 0.1);
  GaugeFixResult rs = dirichlet_coulomb_fix(su2, region, opts);
  CHECK(rs.report.converged);
  CHECK(rs.report.coulomb_residual_max <= 1e-8);
  CHECK(rs.report.boundary_residual_max <= 1e-8);
  CHECK(std::isfinite(rs.report.norm_ratio));
  CHECK(std::abs(energy(rs.fixed) - energy(su2)) <= 1e-12 * std::max(1.0, energy(su2)));
}

TEST_CASE("constant-gauge uniqueness verdicts") {
  auto box = build_box({4, 4, 4, 4}, 1.0);
  BallRegion region = build_ball(box, {0, 0, 0, 0}, {4, 4, 4, 4});
  Rng rng(19);
  LinkField U = random_field(box, GroupTag::SU2, rng, 0.2);

  // planted constant witness
  const GroupElement c = random_group(rng, GroupTag::SU2, 2.0);
  VertexGaugeField cg = identity_gauge(box, GroupTag::SU2);
  for (auto& s : cg.site) s = c;
  UniquenessVerdict v = constant_gauge_match(U, apply_gauge(U, cg), 1e-8);
  CHECK(v.equivalent_by_constant);
  CHECK(v.residual <= 1e-10);
  CHECK(std::abs(v.witness.q.dot(c.q)) >= 1.0 - 1e-10);  // +-c act identically

  UniquenessVerdict vid = constant_gauge_match(U, U, 1e-12);
  CHECK(vid.equivalent_by_constant);
  CHECK(std::abs(vid.witness.q[0]) >= 1.0 - 1e-10);

  LinkField W = random_field(box, GroupTag::SU2, rng, 0.2);
  UniquenessVerdict vno = constant_gauge_match(U, W, 1e-6);
  CHECK_FALSE(vno.equivalent_by_constant);
  CHECK(vno.residual > 1e-2);

  // verify_gauge_uniqueness demands Dirichlet-Coulomb-fixed inputs
  CHECK_THROWS_AS((void)verify_gauge_uniqueness(U, W, region, 1e-6), std::invalid_argument);
  GaugeFixOptions opts;
  opts.tol = 1e-10;
  GaugeFixResult f1 = dirichlet_coulomb_fix(U, region, opts);
  LinkField U2 = apply_gauge(U, cg);
  GaugeFixResult f2 = dirichlet_coulomb_fix(U2, region, opts);
  UniquenessVerdict vd = verify_gauge_uniqueness(f1.fixed, f2.fixed, region, 1e-6);
  CHECK(vd.equivalent_by_constant);
}

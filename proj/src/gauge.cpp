#include "ym/gauge.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "ym/reduce.hpp"

namespace ym {

VertexGaugeField identity_gauge(std::shared_ptr<const LatticeComplex> cx, GroupTag tag) {
  VertexGaugeField g;
  g.complex = std::move(cx);
  g.group = tag;
  g.site.assign(g.complex->vertex_count(), identity(tag));
  return g;
}

VertexGaugeField random_gauge(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, Rng& rng,
                              double scale) {
  VertexGaugeField g = identity_gauge(std::move(cx), tag);
  for (auto& s : g.site) s = random_group(rng, tag, scale);
  return g;
}

VertexGaugeField compose(const VertexGaugeField& g, const VertexGaugeField& h) {
  if (g.complex != h.complex) throw std::invalid_argument("compose: different complexes");
  VertexGaugeField r = g;
  for (std::size_t v = 0; v < r.site.size(); ++v) r.site[v] = mul(g.site[v], h.site[v]);
  return r;
}

VertexGaugeField inverse(const VertexGaugeField& g) {
  VertexGaugeField r = g;
  for (auto& s : r.site) s = inverse(s);
  return r;
}

LinkField apply_gauge(const LinkField& U, const VertexGaugeField& g) {
  if (U.complex != g.complex) throw std::invalid_argument("apply_gauge: different complexes");
  if (U.group != g.group) throw std::invalid_argument("apply_gauge: group mismatch");
  LinkField r = U;
  for (int e = 0; e < U.complex->edge_count(); ++e)
    r.links[e] = mul(g.site[U.complex->edge_tail(e)], mul(U.links[e], inverse(g.site[U.complex->edge_head(e)])));
  return r;
}

std::pair<double, double> coulomb_residual(const LinkField& U, BoundaryCondition bc) {
  const Cochain div = codiff(connection_form(U), bc);
  const auto& cx = *U.complex;
  double mx = 0.0;
  std::vector<double> terms;
  terms.reserve(cx.vertex_count());
  for (int v = 0; v < cx.vertex_count(); ++v) {
    if (bc == BoundaryCondition::normal && !cx.closed() &&
        cx.own_cell_class(0, v) == CellClass::boundary_tangential)
      continue;
    const double n = norm(div.at(v));
    mx = std::max(mx, n);
    terms.push_back(cx.cell_weights(0)[v] * n * n);
  }
  return {mx, std::sqrt(pairwise_sum(terms))};
}

namespace {

double link_functional(const LinkField& U) {
  const auto& w = U.complex->cell_weights(1);
  std::vector<double> terms(U.links.size());
  for (std::size_t e = 0; e < U.links.size(); ++e) {
    const double n = norm(ym::log(U.links[e]));
    terms[e] = w[static_cast<int>(e)] * n * n;
  }
  return pairwise_sum(terms);
}

// One checkerboard half-sweep of per-site minimizers of the local functional
// sum_e w_e |log U'_e|^2; stationarity at a site is the log-based divergence.
void half_sweep(LinkField& U, VertexGaugeField& g, const std::vector<std::uint8_t>& frozen,
                int color, double omega) {
  const auto& cx = *U.complex;
  const auto& w = cx.cell_weights(1);
  for (int v = 0; v < cx.vertex_count(); ++v) {
    if (frozen[v]) continue;
    const auto coords = cx.vertex_coords(v);
    if (((coords[0] + coords[1] + coords[2] + coords[3]) & 1) != color) continue;
    AlgebraElement r = zero_algebra(U.group);
    double wsum = 0.0;
    for (const auto& [e, s] : cx.vertex_edges(v)) {
      r = r + (s * w[e]) * ym::log(U.links[e]);
      wsum += w[e];
    }
    const GroupElement gv = ym::exp((-omega / wsum) * r);
    g.site[v] = mul(gv, g.site[v]);
    for (const auto& [e, s] : cx.vertex_edges(v)) {
      U.links[e] = s > 0 ? mul(gv, U.links[e]) : mul(U.links[e], inverse(gv));
    }
  }
}

// max-vertex |d* a| over unfrozen vertices, from the same local link sums the
// site updates use; the report values are recomputed through codiff at the end
double fast_residual_max(const LinkField& U, const std::vector<std::uint8_t>& frozen) {
  const auto& cx = *U.complex;
  const auto& w = cx.cell_weights(1);
  const auto& wv = cx.cell_weights(0);
  const double h2 = cx.spacing() * cx.spacing();
  double mx = 0.0;
  for (int v = 0; v < cx.vertex_count(); ++v) {
    if (frozen[v]) continue;
    AlgebraElement r = zero_algebra(U.group);
    for (const auto& [e, s] : cx.vertex_edges(v)) r = r + (s * w[e]) * ym::log(U.links[e]);
    mx = std::max(mx, norm(r) / (wv[v] * h2));
  }
  return mx;
}

GaugeFixResult relax(const LinkField& U0, const std::vector<std::uint8_t>& frozen,
                     BoundaryCondition residual_flavor, const GaugeFixOptions& opts) {
  if (opts.tol <= 0) throw std::invalid_argument("gauge fix: tol must be positive");
  GaugeFixResult res{U0, identity_gauge(U0.complex, U0.group), {}};
  double phi = link_functional(res.fixed);
  res.report.functional_trace.push_back(phi);

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    const LinkField snapshot = res.fixed;
    const VertexGaugeField gsnap = res.g;
    double omega = opts.overrelax;
    for (;;) {
      for (int color = 0; color < 2; ++color) half_sweep(res.fixed, res.g, frozen, color, omega);
      const double phi_new = link_functional(res.fixed);
      if (phi_new <= phi * (1 + 1e-14) + 1e-300) {
        phi = phi_new;
        break;
      }
      // functional went up: restore and retry with a safeguarded step
      res.fixed = snapshot;
      res.g = gsnap;
      if (omega <= 0.26) {  // relaxation exhausted; accept the tiny increase
        for (int color = 0; color < 2; ++color) half_sweep(res.fixed, res.g, frozen, color, omega);
        phi = link_functional(res.fixed);
        break;
      }
      omega = omega > 1.0 ? 1.0 : omega * 0.5;
    }
    res.report.functional_trace.push_back(phi);
    res.report.iterations = sweep + 1;

    if (fast_residual_max(res.fixed, frozen) <= opts.tol) {
      const auto [mx, l2] = coulomb_residual(res.fixed, residual_flavor);
      res.report.coulomb_residual_max = mx;
      res.report.coulomb_residual_l2 = l2;
      if (mx <= opts.tol) {
        res.report.converged = true;
        break;
      }
    }
  }
  res.report.functional = phi;
  if (!res.report.converged) {
    const auto [mx, l2] = coulomb_residual(res.fixed, residual_flavor);
    res.report.coulomb_residual_max = mx;
    res.report.coulomb_residual_l2 = l2;
  }
  return res;
}

double curvature_l2(const LinkField& U) { return std::sqrt(2.0 * energy(U)); }

void fill_norm_ratio(GaugeFixResult& res) {
  const Cochain a = connection_form(res.fixed);
  const double num = norm_sobolev1(a, BoundaryCondition::tangential);
  const double den = curvature_l2(res.fixed);
  res.report.norm_ratio = den > 0 ? num / den : 0.0;
}

}  // namespace

GaugeFixResult coulomb_fix_neumann(const LinkField& U, const GaugeFixOptions& opts) {
  std::vector<std::uint8_t> frozen(U.complex->vertex_count(), 0);
  GaugeFixResult res = relax(U, frozen, BoundaryCondition::tangential, opts);
  if (opts.compute_norm_ratio) fill_norm_ratio(res);
  return res;
}

GaugeFixResult coulomb_fix_boundary_closed(const LinkField& Ub, const GaugeFixOptions& opts) {
  if (!Ub.complex->closed())
    throw std::invalid_argument("coulomb_fix_boundary_closed: complex must be closed");
  return coulomb_fix_neumann(Ub, opts);
}

GaugeFixResult coulomb_fix_identity_boundary(const LinkField& U, const GaugeFixOptions& opts) {
  const auto& cx = *U.complex;
  if (cx.closed())
    throw std::invalid_argument("coulomb_fix_identity_boundary: complex has no boundary");
  std::vector<std::uint8_t> frozen(cx.vertex_count(), 0);
  int interior = 0;
  for (int v = 0; v < cx.vertex_count(); ++v) {
    frozen[v] = cx.own_cell_class(0, v) == CellClass::boundary_tangential;
    interior += !frozen[v];
  }
  if (interior == 0)
    throw std::invalid_argument("coulomb_fix_identity_boundary: region has empty interior");
  GaugeFixResult res = relax(U, frozen, BoundaryCondition::normal, opts);

  if (opts.compute_norm_ratio) {
    // two-term bound |a| <= C (|F| + |i*a|_{1/2}) needs the trace norm
    const Cochain a = connection_form(res.fixed);
    BallRegion whole(U.complex, {0, 0, 0, 0}, cx.dims());
    const double trace_half = norm_boundary_half(restrict_boundary(a, whole), whole);
    const double den = curvature_l2(res.fixed) + trace_half;
    res.report.norm_ratio = den > 0 ? norm_sobolev1(a, BoundaryCondition::tangential) / den : 0.0;
  }
  return res;
}

GaugeFixResult dirichlet_coulomb_fix(const LinkField& U, const BallRegion& region,
                                     const GaugeFixOptions& opts) {
  LinkField Usub = U.complex == region.sub() ? U : extract_field(U, region);

  GaugeFixResult stage1 = coulomb_fix_boundary_closed(restrict_boundary(Usub, region), opts);
  VertexGaugeField ext = identity_gauge(region.sub(), U.group);
  for (int v = 0; v < region.boundary()->vertex_count(); ++v)
    ext.site[region.boundary_to_sub(0, v)] = stage1.g.site[v];
  const LinkField U1 = apply_gauge(Usub, ext);

  GaugeFixResult stage2 = coulomb_fix_identity_boundary(U1, opts);

  GaugeFixResult res{stage2.fixed, compose(stage2.g, ext), stage2.report};
  res.report.iterations = stage1.report.iterations + stage2.report.iterations;
  res.report.converged = stage1.report.converged && stage2.report.converged;
  const auto [bmx, bl2] = coulomb_residual(restrict_boundary(res.fixed, region),
                                           BoundaryCondition::tangential);
  res.report.boundary_residual_max = bmx;
  res.report.boundary_residual_l2 = bl2;
  if (opts.compute_norm_ratio) fill_norm_ratio(res);
  return res;
}

namespace {

// c = conjugate of the unit quaternion extracted from the optimal rotation
// (Wahba's problem; Ad in this basis rotates by the inverse angle).
GroupElement su2_from_rotation(const Eigen::Matrix3d& R) {
  Eigen::Vector4d r;  // standard rotation quaternion (w, x, y, z)
  const double tr = R.trace();
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    r << 0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2;
    r << (R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2;
    r << (R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2;
    r << (R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s;
  }
  GroupElement c{GroupTag::SU2, {r[0], -r[1], -r[2], -r[3]}};
  return renormalized(c);
}

}  // namespace

UniquenessVerdict constant_gauge_match(const LinkField& Ua, const LinkField& Ub, double tol) {
  if (Ua.complex != Ub.complex || Ua.group != Ub.group)
    throw std::invalid_argument("constant_gauge_match: mismatched fields");
  const Cochain a = connection_form(Ua);
  const Cochain b = connection_form(Ub);

  UniquenessVerdict v;
  v.witness = identity(Ua.group);
  if (Ua.group == GroupTag::SU2) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int e = 0; e < a.values.rows(); ++e)
      m += b.values.row(e).transpose() * a.values.row(e);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0) {
      Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
      flip(2, 2) = -1;
      R = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    v.witness = su2_from_rotation(R);
  }
  std::vector<double> terms(a.values.rows());
  for (int e = 0; e < a.values.rows(); ++e)
    terms[e] = norm(conjugate(v.witness, a.at(e)) - b.at(e)) * norm(conjugate(v.witness, a.at(e)) - b.at(e));
  v.residual = std::sqrt(pairwise_sum(terms));
  v.equivalent_by_constant = v.residual <= tol;
  return v;
}

UniquenessVerdict verify_gauge_uniqueness(const LinkField& Ua, const LinkField& Ub,
                                          const BallRegion& region, double tol, double fixed_tol) {
  const LinkField a = Ua.complex == region.sub() ? Ua : extract_field(Ua, region);
  const LinkField b = Ub.complex == region.sub() ? Ub : extract_field(Ub, region);
  for (const LinkField* f : {&a, &b}) {
    const auto [cmx, cl2] = coulomb_residual(*f, BoundaryCondition::normal);
    const auto [bmx, bl2] = coulomb_residual(restrict_boundary(*f, region), BoundaryCondition::tangential);
    (void)cl2;
    (void)bl2;
    if (cmx > fixed_tol || bmx > fixed_tol)
      throw std::invalid_argument("verify_gauge_uniqueness: input not in Dirichlet Coulomb gauge");
  }
  return constant_gauge_match(a, b, tol);
}

}  // namespace ym

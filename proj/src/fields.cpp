#include "ym/fields.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>

#include "ym/reduce.hpp"

namespace ym {

LinkField flat_field(std::shared_ptr<const LatticeComplex> cx, GroupTag tag) {
  LinkField U;
  U.complex = std::move(cx);
  U.group = tag;
  U.links.assign(U.complex->edge_count(), identity(tag));
  return U;
}

LinkField random_field(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, Rng& rng,
                       double scale) {
  LinkField U = flat_field(std::move(cx), tag);
  for (auto& g : U.links) g = random_group(rng, tag, scale);
  return U;
}

Cochain zero_cochain(std::shared_ptr<const LatticeComplex> cx, GroupTag tag, int degree) {
  if (degree < 0 || degree > cx->dim())
    throw std::invalid_argument("cochain degree out of range for this complex");
  Cochain c;
  c.complex = std::move(cx);
  c.group = tag;
  c.degree = degree;
  c.values = Eigen::MatrixXd::Zero(c.complex->cell_count(degree), algebra_dim(tag));
  return c;
}

Eigen::SparseMatrix<double> d_matrix(const LatticeComplex& cx, int k) {
  if (k + 1 > cx.dim()) throw std::invalid_argument("d: degree overflow");
  Eigen::SparseMatrix<double> m = cx.boundary_matrix(k + 1).transpose();
  return m / cx.spacing();
}

Eigen::SparseMatrix<double> codiff_matrix(const LatticeComplex& cx, int k, BoundaryCondition bc) {
  if (k < 1) throw std::invalid_argument("codiff: degree underflow");
  const auto& wk = cx.cell_weights(k);
  const auto& wkm = cx.cell_weights(k - 1);
  Eigen::SparseMatrix<double> m = cx.boundary_matrix(k) * wk.asDiagonal();
  m = m / cx.spacing();
  Eigen::VectorXd row = wkm.cwiseInverse();
  if (bc == BoundaryCondition::normal && !cx.closed()) {
    for (int c = 0; c < cx.cell_count(k - 1); ++c)
      if (cx.own_cell_class(k - 1, c) == CellClass::boundary_tangential) row[c] = 0.0;
  }
  return row.asDiagonal() * m;
}

Cochain d(const Cochain& c) {
  if (c.degree > 2 || c.degree + 1 > c.complex->dim())
    throw std::invalid_argument("d: degree overflow");
  Cochain r = zero_cochain(c.complex, c.group, c.degree + 1);
  r.values = d_matrix(*c.complex, c.degree) * c.values;
  return r;
}

Cochain codiff(const Cochain& c, BoundaryCondition bc) {
  if (c.degree < 1) throw std::invalid_argument("codiff: degree underflow");
  Cochain r = zero_cochain(c.complex, c.group, c.degree - 1);
  r.values = codiff_matrix(*c.complex, c.degree, bc) * c.values;
  return r;
}

Cochain connection_form(const LinkField& U) {
  Cochain a = zero_cochain(U.complex, U.group, 1);
  const double invh = 1.0 / U.complex->spacing();
  for (int e = 0; e < U.complex->edge_count(); ++e) {
    try {
      a.set(e, invh * ym::log(U.links[e]));
    } catch (const BranchCutError&) {
      throw BranchCutError("connection_form: link " + std::to_string(e) + " at the branch cut", e, 1);
    }
  }
  return a;
}

LinkField link_field(const Cochain& a) {
  if (a.degree != 1) throw std::invalid_argument("link_field: expected a 1-cochain");
  LinkField U = flat_field(a.complex, a.group);
  const double h = a.complex->spacing();
  for (int e = 0; e < a.complex->edge_count(); ++e) U.links[e] = ym::exp(h * a.at(e));
  return U;
}

GroupElement plaquette_holonomy(const LinkField& U, int face) {
  const auto& loop = U.complex->face_loop(face);
  GroupElement p = identity(U.group);
  for (int i = 0; i < 4; ++i) {
    const GroupElement& g = U.links[loop.edge[i]];
    p = mul(p, loop.sign[i] > 0 ? g : inverse(g));
  }
  return p;
}

static AlgebraElement face_curvature(const LinkField& U, int f) {
  const double h = U.complex->spacing();
  try {
    return (1.0 / (h * h)) * ym::log(plaquette_holonomy(U, f));
  } catch (const BranchCutError&) {
    throw BranchCutError("plaquette " + std::to_string(f) + " holonomy at the branch cut", f, 2);
  }
}

Cochain plaquette_curvature(const LinkField& U) {
  Cochain F = zero_cochain(U.complex, U.group, 2);
  for (int f = 0; f < U.complex->face_count(); ++f) F.set(f, face_curvature(U, f));
  return F;
}

static double energy_over(const LinkField& U, const std::vector<int>& faces) {
  const auto& cx = *U.complex;
  const double scale = 0.5 * std::pow(cx.spacing(), cx.dim() - 4);
  std::vector<double> terms(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const AlgebraElement x = face_curvature(U, faces[i]);
    const double h2 = cx.spacing() * cx.spacing();
    const double l = norm(x) * h2;  // |log(holonomy)|
    terms[i] = l * l;
  }
  return scale * pairwise_sum(terms);
}

double energy(const LinkField& U) {
  std::vector<int> faces(U.complex->face_count());
  for (int f = 0; f < U.complex->face_count(); ++f) faces[f] = f;
  return energy_over(U, faces);
}

double energy(const LinkField& U, const BallRegion& region) {
  if (U.complex != region.parent())
    throw std::invalid_argument("energy: field does not live on the region's parent complex");
  std::vector<int> faces;
  faces.reserve(U.complex->face_count());
  for (int f = 0; f < U.complex->face_count(); ++f)
    if (region.cell_class(2, f) != CellClass::exterior) faces.push_back(f);
  return energy_over(U, faces);
}

std::vector<double> plaquette_trace_spectrum(const LinkField& U) {
  std::vector<double> s(U.complex->face_count());
  for (int f = 0; f < U.complex->face_count(); ++f) s[f] = re_trace(plaquette_holonomy(U, f));
  std::sort(s.begin(), s.end());
  return s;
}

double inner_l2(const Cochain& a, const Cochain& b) {
  if (a.complex != b.complex || a.degree != b.degree)
    throw std::invalid_argument("inner_l2: mismatched cochains");
  const auto& w = a.complex->cell_weights(a.degree);
  std::vector<double> terms(a.values.rows());
  for (int c = 0; c < a.values.rows(); ++c) terms[c] = w[c] * a.values.row(c).dot(b.values.row(c));
  return pairwise_sum(terms);
}

double norm_l2(const Cochain& c) { return std::sqrt(inner_l2(c, c)); }

double norm_l4(const Cochain& c) {
  const auto& w = c.complex->cell_weights(c.degree);
  std::vector<double> terms(c.values.rows());
  for (int i = 0; i < c.values.rows(); ++i) {
    const double n2 = c.values.row(i).squaredNorm();
    terms[i] = w[i] * n2 * n2;
  }
  return std::pow(pairwise_sum(terms), 0.25);
}

double norm_sobolev1(const Cochain& c, BoundaryCondition bc) {
  if (c.degree < 1 || c.degree + 1 > c.complex->dim())
    throw std::invalid_argument("norm_sobolev1: need a degree with both d and d* defined");
  const double a = norm_l2(c), b = norm_l2(d(c)), e = norm_l2(codiff(c, bc));
  return std::sqrt(a * a + b * b + e * e);
}

double norm_l2(const Cochain& c, const BallRegion& region) { return norm_l2(extract_cochain(c, region)); }

double norm_l4(const Cochain& c, const BallRegion& region) { return norm_l4(extract_cochain(c, region)); }

double norm_sobolev1(const Cochain& c, const BallRegion& region, BoundaryCondition bc) {
  return norm_sobolev1(extract_cochain(c, region), bc);
}

// -- sparse solves -------------------------------------------------------------

static Eigen::VectorXd cg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                double tol, int max_iter, const char* what) {
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iter);
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success && cg.error() > 10 * tol)
    throw SolverError(std::string(what) + ": conjugate gradient stalled, residual " +
                          std::to_string(cg.error()),
                      cg.error());
  return x;
}

namespace {

// Selection of the cells a bc-constrained potential may live on.
std::vector<int> allowed_cells(const LatticeComplex& cx, int k, BoundaryCondition bc) {
  std::vector<int> keep;
  keep.reserve(cx.cell_count(k));
  for (int c = 0; c < cx.cell_count(k); ++c) {
    if (bc == BoundaryCondition::normal && !cx.closed() &&
        cx.own_cell_class(k, c) == CellClass::boundary_tangential)
      continue;
    keep.push_back(c);
  }
  return keep;
}

Eigen::SparseMatrix<double> selection(const std::vector<int>& keep, int n) {
  Eigen::SparseMatrix<double> p(static_cast<int>(keep.size()), n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(keep.size());
  for (int i = 0; i < static_cast<int>(keep.size()); ++i) trips.emplace_back(i, keep[i], 1.0);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

}  // namespace

Cochain exact_part(const Cochain& c, BoundaryCondition bc) {
  const auto& cx = *c.complex;
  const int k = c.degree;
  Cochain ex = zero_cochain(c.complex, c.group, k);
  if (k == 0) return ex;

  const auto keep = allowed_cells(cx, k - 1, bc);
  if (keep.empty()) return ex;
  const auto P = selection(keep, cx.cell_count(k - 1));
  const Eigen::SparseMatrix<double> D = d_matrix(cx, k - 1) * P.transpose();
  const auto& w = cx.cell_weights(k);
  const Eigen::SparseMatrix<double> A = D.transpose() * w.asDiagonal() * D;
  const int max_iter = 10 * cx.cell_count(k - 1) + 100;

  Cochain masked = c;
  if (bc == BoundaryCondition::normal && !cx.closed()) {
    for (int cell = 0; cell < cx.cell_count(k); ++cell)
      if (cx.own_cell_class(k, cell) == CellClass::boundary_tangential)
        masked.values.row(cell).setZero();
  }
  for (int col = 0; col < c.values.cols(); ++col) {
    const Eigen::VectorXd rhs = D.transpose() * (w.asDiagonal() * masked.values.col(col));
    ex.values.col(col) = D * cg_solve(A, rhs, 1e-12, max_iter, "hodge exact part");
  }
  return ex;
}

HodgeParts hodge_decompose(const Cochain& c, BoundaryCondition bc) {
  const auto& cx = *c.complex;
  const int k = c.degree;
  const bool constrain = bc == BoundaryCondition::normal && !cx.closed();

  // tangential trace of the input; rides with the coexact part under the
  // normal flavor (the relative complex only decomposes the rest)
  Cochain trace = zero_cochain(c.complex, c.group, k);
  Cochain core = c;
  if (constrain) {
    for (int cell = 0; cell < cx.cell_count(k); ++cell)
      if (cx.own_cell_class(k, cell) == CellClass::boundary_tangential) {
        trace.values.row(cell) = c.values.row(cell);
        core.values.row(cell).setZero();
      }
  }

  HodgeParts parts{exact_part(c, bc), zero_cochain(c.complex, c.group, k),
                   zero_cochain(c.complex, c.group, k), bc};
  Cochain rem = core;
  rem.values -= parts.exact.values;

  if (k < cx.dim()) {
    const auto keep = allowed_cells(cx, k + 1, bc);
    if (!keep.empty()) {
      const auto P = selection(keep, cx.cell_count(k + 1));
      const Eigen::SparseMatrix<double> Dk = P * d_matrix(cx, k);
      Eigen::VectorXd winv_masked = cx.cell_weights(k).cwiseInverse();
      if (constrain) {
        for (int cell = 0; cell < cx.cell_count(k); ++cell)
          if (cx.own_cell_class(k, cell) == CellClass::boundary_tangential) winv_masked[cell] = 0.0;
      }
      const Eigen::SparseMatrix<double> S = Dk * winv_masked.asDiagonal() * Dk.transpose();
      const int max_iter = 10 * cx.cell_count(k + 1) + 100;
      for (int col = 0; col < c.values.cols(); ++col) {
        const Eigen::VectorXd rhs = Dk * rem.values.col(col);
        const Eigen::VectorXd u = cg_solve(S, rhs, 1e-12, max_iter, "hodge coexact part");
        parts.coexact.values.col(col) = winv_masked.asDiagonal() * (Dk.transpose() * u);
      }
    }
  }

  parts.harmonic.values = rem.values - parts.coexact.values;
  parts.coexact.values += trace.values;
  return parts;
}

// -- region plumbing ------------------------------------------------------------

LinkField extract_field(const LinkField& U, const BallRegion& region) {
  if (U.complex != region.parent())
    throw std::invalid_argument("extract_field: field does not live on the region's parent");
  LinkField r = flat_field(region.sub(), U.group);
  for (int e = 0; e < region.sub()->edge_count(); ++e) r.links[e] = U.links[region.sub_to_parent(1, e)];
  return r;
}

Cochain extract_cochain(const Cochain& c, const BallRegion& region) {
  if (c.complex == region.sub()) return c;
  if (c.complex != region.parent())
    throw std::invalid_argument("extract_cochain: cochain does not live on the region's parent");
  Cochain r = zero_cochain(region.sub(), c.group, c.degree);
  for (int i = 0; i < region.sub()->cell_count(c.degree); ++i)
    r.values.row(i) = c.values.row(region.sub_to_parent(c.degree, i));
  return r;
}

LinkField restrict_boundary(const LinkField& U, const BallRegion& region) {
  const bool on_sub = U.complex == region.sub();
  if (!on_sub && U.complex != region.parent())
    throw std::invalid_argument("restrict_boundary: field on neither parent nor sub complex");
  LinkField r = flat_field(region.boundary(), U.group);
  for (int e = 0; e < region.boundary()->edge_count(); ++e)
    r.links[e] = U.links[on_sub ? region.boundary_to_sub(1, e) : region.boundary_to_parent(1, e)];
  return r;
}

Cochain restrict_boundary(const Cochain& c, const BallRegion& region) {
  const bool on_sub = c.complex == region.sub();
  if (!on_sub && c.complex != region.parent())
    throw std::invalid_argument("restrict_boundary: cochain on neither parent nor sub complex");
  Cochain r = zero_cochain(region.boundary(), c.group, c.degree);
  for (int i = 0; i < region.boundary()->cell_count(c.degree); ++i)
    r.values.row(i) =
        c.values.row(on_sub ? region.boundary_to_sub(c.degree, i) : region.boundary_to_parent(c.degree, i));
  return r;
}

LinkField with_boundary(const LinkField& U, const BallRegion& region, const LinkField& bdata) {
  if (U.complex != region.sub())
    throw std::invalid_argument("with_boundary: field must live on the region's sub complex");
  if (bdata.complex != region.boundary())
    throw std::invalid_argument("with_boundary: boundary data must live on the boundary complex");
  LinkField r = U;
  for (int e = 0; e < region.boundary()->edge_count(); ++e)
    r.links[region.boundary_to_sub(1, e)] = bdata.links[e];
  return r;
}

LinkField patch(const BallRegion& region, const LinkField& inner, const LinkField& outer) {
  if (inner.complex != region.sub())
    throw std::invalid_argument("patch: inner field must live on the region's sub complex");
  if (outer.complex != region.parent())
    throw std::invalid_argument("patch: outer field must live on the region's parent complex");
  for (int e = 0; e < region.boundary()->edge_count(); ++e) {
    const double diff = max_abs_diff(inner.links[region.boundary_to_sub(1, e)],
                                     outer.links[region.boundary_to_parent(1, e)]);
    if (diff > 1e-12)
      throw std::invalid_argument("patch: tangential links disagree by " + std::to_string(diff) +
                                  " (i*beta = i*gamma violated)");
  }
  LinkField r = outer;
  for (int e = 0; e < region.sub()->edge_count(); ++e) {
    const int pe = region.sub_to_parent(1, e);
    const CellClass cls = region.cell_class(1, pe);
    if (cls == CellClass::interior || cls == CellClass::boundary_normal) r.links[pe] = inner.links[e];
  }
  return r;
}

double norm_boundary_half(const Cochain& cb, const BallRegion& region) {
  if (cb.complex != region.boundary())
    throw std::invalid_argument("norm_boundary_half: data must live on the boundary complex");
  if (cb.degree != 1) throw std::invalid_argument("norm_boundary_half: expected a 1-cochain");
  const auto& sub = *region.sub();

  // Gaffney quadratic form Q = M + D^T M D + S^T M S on sub-complex 1-cochains
  const Eigen::SparseMatrix<double> D = d_matrix(sub, 1);
  const Eigen::SparseMatrix<double> S = codiff_matrix(sub, 1, BoundaryCondition::tangential);
  Eigen::SparseMatrix<double> Q(sub.edge_count(), sub.edge_count());
  {
    const auto& w1 = sub.cell_weights(1);
    const auto& w2 = sub.cell_weights(2);
    const auto& w0 = sub.cell_weights(0);
    Eigen::SparseMatrix<double> M1(sub.edge_count(), sub.edge_count());
    std::vector<Eigen::Triplet<double>> trips;
    for (int e = 0; e < sub.edge_count(); ++e) trips.emplace_back(e, e, w1[e]);
    M1.setFromTriplets(trips.begin(), trips.end());
    Q = M1 + Eigen::SparseMatrix<double>(D.transpose() * w2.asDiagonal() * D) +
        Eigen::SparseMatrix<double>(S.transpose() * w0.asDiagonal() * S);
  }

  std::vector<int> free_edges, tang_edges;
  for (int e = 0; e < sub.edge_count(); ++e)
    (sub.own_cell_class(1, e) == CellClass::boundary_tangential ? tang_edges : free_edges).push_back(e);

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(sub.edge_count(), cb.values.cols());
  for (int i = 0; i < region.boundary()->edge_count(); ++i)
    full.row(region.boundary_to_sub(1, i)) = cb.values.row(i);

  const auto Pf = selection(free_edges, sub.edge_count());
  const Eigen::SparseMatrix<double> Qff = Pf * Q * Pf.transpose();
  double total = 0.0;
  for (int col = 0; col < cb.values.cols(); ++col) {
    const Eigen::VectorXd qc = Q * full.col(col);
    const Eigen::VectorXd rhs = -(Pf * qc);
    const Eigen::VectorXd x =
        cg_solve(Qff, rhs, 1e-12, 10 * sub.edge_count() + 100, "boundary trace extension");
    Eigen::VectorXd ext = full.col(col) + Pf.transpose() * x;
    total += ext.dot(Q * ext);
  }
  return std::sqrt(std::max(0.0, total));
}

}  // namespace ym

#include "ym/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ym {

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::periodic: return "periodic";
    case Topology::box: return "box";
    case Topology::boundary: return "boundary";
  }
  return "?";
}

const std::vector<std::vector<int>>& LatticeComplex::direction_combinations(int dim, int k) {
  static const auto tables = [] {
    std::array<std::array<std::vector<std::vector<int>>, 5>, 5> t{};
    for (int d = 0; d <= 4; ++d) {
      for (int k2 = 0; k2 <= d; ++k2) {
        std::vector<std::vector<int>> combs;
        std::vector<int> cur;
        // lexicographic k2-subsets of {0..d-1}
        auto rec = [&](auto&& self, int start) -> void {
          if (static_cast<int>(cur.size()) == k2) {
            combs.push_back(cur);
            return;
          }
          for (int a = start; a < d; ++a) {
            cur.push_back(a);
            self(self, a + 1);
            cur.pop_back();
          }
        };
        rec(rec, 0);
        t[d][k2] = std::move(combs);
      }
    }
    return t;
  }();
  return tables[dim][k];
}

std::array<int, 4> LatticeComplex::vertex_coords(int v) const {
  if (topo_ == Topology::boundary) {
    // boundary complexes store their parents' coordinates explicitly
    return bvcoords_[v];
  }
  std::array<int, 4> c{};
  for (int a = 0; a < 4; ++a) {
    c[a] = v % dims_[a];
    v /= dims_[a];
  }
  return c;
}

int LatticeComplex::vertex_id(std::array<int, 4> c) const {
  for (int a = 0; a < 4; ++a) {
    if (topo_ == Topology::periodic) {
      c[a] = ((c[a] % dims_[a]) + dims_[a]) % dims_[a];
    } else if (c[a] < 0 || c[a] >= dims_[a]) {
      throw std::out_of_range("vertex coordinate out of range on non-periodic complex");
    }
  }
  return c[0] + dims_[0] * (c[1] + dims_[1] * (c[2] + dims_[2] * c[3]));
}

bool LatticeComplex::vertex_in_range(const std::array<int, 4>& c) const {
  if (topo_ == Topology::periodic) return true;
  for (int a = 0; a < 4; ++a)
    if (c[a] < 0 || c[a] >= dims_[a]) return false;
  return true;
}

int LatticeComplex::find_cell(int k, int comb, int base) const {
  const auto& lut = lookup_[k];
  if (lut.empty()) return -1;
  return lut[static_cast<std::size_t>(comb) * vertex_count() + base];
}

CellClass LatticeComplex::own_cell_class(int k, int c) const {
  if (closed()) return CellClass::interior;
  return lattice_cell_class(k, c);
}

CellClass LatticeComplex::lattice_cell_class(int k, int c) const {
  const auto& comb = direction_combinations(dim_, k)[comb_[k][c]];
  const auto coords = vertex_coords(base_[k][c]);
  bool spanned = false;
  for (int a = 0; a < 4; ++a) {
    const bool in_span = std::find(comb.begin(), comb.end(), a) != comb.end();
    if (in_span) {
      if (coords[a] == 0 || coords[a] == dims_[a] - 2) spanned = true;
    } else {
      if (coords[a] == 0 || coords[a] == dims_[a] - 1) return CellClass::boundary_tangential;
    }
  }
  return spanned ? CellClass::boundary_normal : CellClass::interior;
}

int LatticeComplex::own_class_count(int k, CellClass cls) const {
  int n = 0;
  for (int c = 0; c < cell_count(k); ++c)
    if (own_cell_class(k, c) == cls) ++n;
  return n;
}

std::string LatticeComplex::descriptor() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "dims=%d,%d,%d,%d;spacing=%.17g;topology=%s", dims_[0], dims_[1],
                dims_[2], dims_[3], h_, topology_name(topo_).c_str());
  return buf;
}

std::shared_ptr<const LatticeComplex> LatticeComplex::make_lattice(std::array<int, 4> dims, double h,
                                                                   Topology topo) {
  for (int a = 0; a < 4; ++a)
    if (dims[a] < 2) throw std::invalid_argument("lattice dimension < 2 (degenerate plaquettes)");
  if (h <= 0) throw std::invalid_argument("lattice spacing must be positive");
  const long long v = 1LL * dims[0] * dims[1] * dims[2] * dims[3];
  if (6 * v > (1LL << 31)) throw std::overflow_error("cell count overflow");

  auto cx = std::shared_ptr<LatticeComplex>(new LatticeComplex());
  cx->dim_ = 4;
  cx->topo_ = topo;
  cx->dims_ = dims;
  cx->h_ = h;
  cx->build_lattice_tables();
  return cx;
}

void LatticeComplex::build_lattice_tables() {
  const int V = dims_[0] * dims_[1] * dims_[2] * dims_[3];
  const bool periodic = (topo_ == Topology::periodic);

  // cell tables, densely enumerated: combination-major, base-vertex ascending
  for (int k = 0; k <= 4; ++k) {
    const auto& combs = direction_combinations(4, k);
    lookup_[k].assign(combs.size() * static_cast<std::size_t>(V), -1);
    for (int ci = 0; ci < static_cast<int>(combs.size()); ++ci) {
      for (int v = 0; v < V; ++v) {
        bool exists = true;
        if (!periodic) {
          const auto c = vertex_coords(v);
          for (int a : combs[ci])
            if (c[a] + 1 >= dims_[a]) exists = false;
        }
        if (!exists) continue;
        lookup_[k][static_cast<std::size_t>(ci) * V + v] = static_cast<int>(base_[k].size());
        base_[k].push_back(v);
        comb_[k].push_back(static_cast<std::int16_t>(ci));
      }
    }
  }

  // signed boundary maps; the k = 1 case doubles as the edge (tail, head) table
  for (int k = 1; k <= 4; ++k) {
    const auto& combs = direction_combinations(4, k);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(base_[k].size() * 2 * k);
    for (int cell = 0; cell < cell_count(k); ++cell) {
      const auto& comb = combs[comb_[k][cell]];
      const int v = base_[k][cell];
      const auto coords = vertex_coords(v);
      for (int i = 0; i < k; ++i) {
        const int mu = comb[i];
        std::vector<int> sub;
        for (int j = 0; j < k; ++j)
          if (j != i) sub.push_back(comb[j]);
        const auto& subs = direction_combinations(4, k - 1);
        const int sci = static_cast<int>(std::find(subs.begin(), subs.end(), sub) - subs.begin());
        auto shifted = coords;
        shifted[mu] += 1;
        const int vs = vertex_id(shifted);
        const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
        trips.emplace_back(find_cell(k - 1, sci, vs), cell, sgn);
        trips.emplace_back(find_cell(k - 1, sci, v), cell, -sgn);
      }
    }
    bnd_[k].resize(cell_count(k - 1), cell_count(k));
    bnd_[k].setFromTriplets(trips.begin(), trips.end());
  }

  tail_.resize(edge_count());
  head_.resize(edge_count());
  vertex_edges_.assign(V, {});
  for (int e = 0; e < edge_count(); ++e) {
    const int mu = direction_combinations(4, 1)[comb_[1][e]][0];
    const int v = base_[1][e];
    auto c = vertex_coords(v);
    c[mu] += 1;
    tail_[e] = v;
    head_[e] = vertex_id(c);
    vertex_edges_[tail_[e]].emplace_back(e, +1);
    vertex_edges_[head_[e]].emplace_back(e, -1);
  }

  face_loops_.resize(face_count());
  for (int f = 0; f < face_count(); ++f) {
    const auto& comb = direction_combinations(4, 2)[comb_[2][f]];
    const int mu = comb[0], nu = comb[1];
    const int v = base_[2][f];
    auto cmu = vertex_coords(v);
    cmu[mu] += 1;
    auto cnu = vertex_coords(v);
    cnu[nu] += 1;
    FaceLoop& loop = face_loops_[f];
    loop.base_vertex = v;
    loop.edge = {find_cell(1, mu, v), find_cell(1, nu, vertex_id(cmu)),
                 find_cell(1, mu, vertex_id(cnu)), find_cell(1, nu, v)};
    loop.sign = {+1, +1, -1, -1};
  }

  // trapezoidal measures: h^4, halved per box-boundary axis the cell lies in
  for (int k = 0; k <= 4; ++k) {
    weights_[k].resize(cell_count(k));
    const double w0 = std::pow(h_, 4);
    for (int c = 0; c < cell_count(k); ++c) {
      double w = w0;
      if (topo_ == Topology::box) {
        const auto& comb = direction_combinations(4, k)[comb_[k][c]];
        const auto coords = vertex_coords(base_[k][c]);
        for (int a = 0; a < 4; ++a) {
          if (std::find(comb.begin(), comb.end(), a) != comb.end()) continue;
          if (coords[a] == 0 || coords[a] == dims_[a] - 1) w *= 0.5;
        }
      }
      weights_[k][c] = w;
    }
  }
}

std::shared_ptr<const LatticeComplex> build_torus(std::array<int, 4> dims, double h) {
  return LatticeComplex::make_lattice(dims, h, Topology::periodic);
}

std::shared_ptr<const LatticeComplex> build_box(std::array<int, 4> dims, double h) {
  return LatticeComplex::make_lattice(dims, h, Topology::box);
}

BallRegion::BallRegion(std::shared_ptr<const LatticeComplex> parent, std::array<int, 4> lo,
                       std::array<int, 4> hi)
    : parent_(std::move(parent)) {
  const auto& px = *parent_;
  if (px.dim() != 4) throw std::invalid_argument("build_ball: parent must be a 4D complex");
  const bool periodic = px.topology() == Topology::periodic;
  for (int a = 0; a < 4; ++a) {
    const int n = px.dims()[a];
    const int len = hi[a] - lo[a];
    if (periodic) {
      if (len >= n)
        throw std::invalid_argument("build_ball: interval covers a full periodic axis (self-wrap)");
      lo_[a] = ((lo[a] % n) + n) % n;
    } else {
      if (lo[a] < 0 || hi[a] > n)
        throw std::invalid_argument("build_ball: bounds exceed parent box dims");
      lo_[a] = lo[a];
    }
    if (len < 3)
      throw std::invalid_argument("build_ball: interval length " + std::to_string(len) +
                                  " leaves no interior vertices (need length >= 3)");
    len_[a] = len;
  }

  // classification of every parent cell
  auto rel = [&](const std::array<int, 4>& c, int a) {
    int r = c[a] - lo_[a];
    if (periodic) r = ((r % px.dims()[a]) + px.dims()[a]) % px.dims()[a];
    return r;
  };
  for (int k = 0; k <= 4; ++k) {
    cls_[k].resize(px.cell_count(k));
    for (int c = 0; c < px.cell_count(k); ++c) {
      const auto& comb = LatticeComplex::direction_combinations(4, k)[px.cell_comb(k, c)];
      const auto coords = px.vertex_coords(px.cell_base(k, c));
      CellClass cls = CellClass::interior;
      bool outside = false, frozen = false, touching = false;
      for (int a = 0; a < 4; ++a) {
        const int r = rel(coords, a);
        const bool in_span = std::find(comb.begin(), comb.end(), a) != comb.end();
        if (in_span) {
          if (r < 0 || r > len_[a] - 2) outside = true;
          if (r == 0 || r == len_[a] - 2) touching = true;
        } else {
          if (r < 0 || r > len_[a] - 1) outside = true;
          if (r == 0 || r == len_[a] - 1) frozen = true;
        }
      }
      if (outside)
        cls = CellClass::exterior;
      else if (frozen)
        cls = CellClass::boundary_tangential;
      else if (touching)
        cls = CellClass::boundary_normal;
      cls_[k][c] = cls;
      counts_[k][static_cast<int>(cls)]++;
    }
  }

  // closed region as its own box complex
  const bool whole = !periodic && lo_ == std::array<int, 4>{0, 0, 0, 0} && len_ == px.dims();
  sub_ = whole ? parent_ : LatticeComplex::make_lattice(len_, px.spacing(), Topology::box);
  for (int k = 0; k <= 4; ++k) {
    sub_to_parent_[k].resize(sub_->cell_count(k));
    parent_to_sub_[k].assign(px.cell_count(k), -1);
    for (int c = 0; c < sub_->cell_count(k); ++c) {
      auto coords = sub_->vertex_coords(sub_->cell_base(k, c));
      for (int a = 0; a < 4; ++a) coords[a] += lo_[a];
      const int pc = px.find_cell(k, sub_->cell_comb(k, c), px.vertex_id(coords));
      sub_to_parent_[k][c] = pc;
      parent_to_sub_[k][pc] = c;
    }
  }

  // tangential surface as a closed 3-complex
  auto bc = std::shared_ptr<LatticeComplex>(new LatticeComplex());
  bc->dim_ = 3;
  bc->topo_ = Topology::boundary;
  bc->dims_ = len_;
  bc->h_ = px.spacing();
  std::array<std::vector<int>, 4> local_of;  // parent cell id -> local id
  for (int k = 0; k <= 3; ++k) {
    local_of[k].assign(px.cell_count(k), -1);
    for (int c = 0; c < px.cell_count(k); ++c) {
      if (cls_[k][c] != CellClass::boundary_tangential) continue;
      local_of[k][c] = static_cast<int>(bdry_to_parent_[k].size());
      bdry_to_parent_[k].push_back(c);
    }
    bc->base_[k].resize(bdry_to_parent_[k].size());
    bc->comb_[k].resize(bdry_to_parent_[k].size());
    bc->weights_[k] = Eigen::VectorXd::Constant(static_cast<int>(bdry_to_parent_[k].size()),
                                                std::pow(px.spacing(), 3));
  }
  for (int k = 0; k <= 3; ++k) {
    for (std::size_t c = 0; c < bdry_to_parent_[k].size(); ++c) {
      const int pc = bdry_to_parent_[k][c];
      bc->base_[k][c] = local_of[0][px.cell_base(k, pc)];
      bc->comb_[k][c] = static_cast<std::int16_t>(px.cell_comb(k, pc));
    }
  }
  bc->bvcoords_.resize(bdry_to_parent_[0].size());
  for (std::size_t v = 0; v < bdry_to_parent_[0].size(); ++v)
    bc->bvcoords_[v] = px.vertex_coords(bdry_to_parent_[0][v]);
  for (int k = 1; k <= 3; ++k) {
    std::vector<Eigen::Triplet<double>> trips;
    const auto& pb = px.boundary_matrix(k);
    for (std::size_t c = 0; c < bdry_to_parent_[k].size(); ++c) {
      const int pc = bdry_to_parent_[k][c];
      for (Eigen::SparseMatrix<double>::InnerIterator it(pb, pc); it; ++it) {
        const int lr = local_of[k - 1][static_cast<int>(it.row())];
        if (lr < 0)
          throw std::logic_error("boundary complex: tangential cell with non-tangential face");
        trips.emplace_back(lr, static_cast<int>(c), it.value());
      }
    }
    bc->bnd_[k].resize(static_cast<int>(bdry_to_parent_[k - 1].size()),
                       static_cast<int>(bdry_to_parent_[k].size()));
    bc->bnd_[k].setFromTriplets(trips.begin(), trips.end());
  }
  bc->tail_.resize(bdry_to_parent_[1].size());
  bc->head_.resize(bdry_to_parent_[1].size());
  bc->vertex_edges_.assign(bdry_to_parent_[0].size(), {});
  for (std::size_t e = 0; e < bdry_to_parent_[1].size(); ++e) {
    const int pe = bdry_to_parent_[1][e];
    bc->tail_[e] = local_of[0][px.edge_tail(pe)];
    bc->head_[e] = local_of[0][px.edge_head(pe)];
    bc->vertex_edges_[bc->tail_[e]].emplace_back(static_cast<int>(e), +1);
    bc->vertex_edges_[bc->head_[e]].emplace_back(static_cast<int>(e), -1);
  }
  bc->face_loops_.resize(bdry_to_parent_[2].size());
  for (std::size_t f = 0; f < bdry_to_parent_[2].size(); ++f) {
    const auto& pl = px.face_loop(bdry_to_parent_[2][f]);
    LatticeComplex::FaceLoop& loop = bc->face_loops_[f];
    loop.base_vertex = local_of[0][pl.base_vertex];
    loop.sign = pl.sign;
    for (int i = 0; i < 4; ++i) loop.edge[i] = local_of[1][pl.edge[i]];
  }
  boundary_ = bc;

  for (int k = 0; k <= 3; ++k) {
    bdry_to_sub_[k].resize(bdry_to_parent_[k].size());
    for (std::size_t c = 0; c < bdry_to_parent_[k].size(); ++c)
      bdry_to_sub_[k][c] = parent_to_sub_[k][bdry_to_parent_[k][c]];
  }
}

BallRegion build_ball(std::shared_ptr<const LatticeComplex> parent, std::array<int, 4> lo,
                      std::array<int, 4> hi) {
  return BallRegion(std::move(parent), lo, hi);
}

}  // namespace ym

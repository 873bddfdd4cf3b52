#include <doctest.h>

#include <Eigen/Dense>

#include "ym/grid.hpp"

using namespace ym;

namespace {

double max_abs(const Eigen::SparseMatrix<double>& m) {
  double r = 0;
  for (int c = 0; c < m.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it)
      r = std::max(r, std::abs(it.value()));
  return r;
}

int dense_rank(const Eigen::SparseMatrix<double>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::MatrixXd d = Eigen::MatrixXd(m);
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(d).rank());
}

// Betti numbers of a complex from the ranks of its boundary maps.
std::vector<int> betti(const LatticeComplex& cx) {
  std::vector<int> b(cx.dim() + 1);
  for (int k = 0; k <= cx.dim(); ++k) {
    const int rk = k >= 1 ? dense_rank(cx.boundary_matrix(k)) : 0;
    const int rk1 = k + 1 <= cx.dim() ? dense_rank(cx.boundary_matrix(k + 1)) : 0;
    b[k] = cx.cell_count(k) - rk - rk1;
  }
  return b;
}

}  // namespace

TEST_CASE("torus cell counts and preconditions") {
  auto t2 = build_torus({2, 2, 2, 2}, 1.0);
  CHECK(t2->vertex_count() == 16);
  CHECK(t2->edge_count() == 64);
  CHECK(t2->face_count() == 96);

  auto t4 = build_torus({4, 4, 4, 4}, 0.5);
  CHECK(t4->vertex_count() == 256);
  CHECK(t4->edge_count() == 1024);
  CHECK(t4->face_count() == 1536);

  CHECK_THROWS_AS(build_torus({1, 4, 4, 4}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_torus({4, 4, 4, 4}, 0.0), std::invalid_argument);
}

TEST_CASE("boundary of boundary vanishes exactly") {
  for (auto cx : {build_torus({3, 3, 3, 3}, 1.0), build_box({4, 3, 3, 4}, 0.5)}) {
    for (int k = 2; k <= 4; ++k) {
      Eigen::SparseMatrix<double> dd = cx->boundary_matrix(k - 1) * cx->boundary_matrix(k);
      CHECK(max_abs(dd) == 0.0);
    }
  }
}

TEST_CASE("enumeration is a pure function of (dims, topology)") {
  auto a = build_box({4, 5, 3, 4}, 0.25);
  auto b = build_box({4, 5, 3, 4}, 0.25);
  CHECK(a->descriptor() == b->descriptor());
  for (int k = 0; k <= 4; ++k) {
    REQUIRE(a->cell_count(k) == b->cell_count(k));
    for (int c = 0; c < a->cell_count(k); ++c) {
      CHECK(a->cell_base(k, c) == b->cell_base(k, c));
      CHECK(a->cell_comb(k, c) == b->cell_comb(k, c));
    }
  }
}

TEST_CASE("edge and face incidence structure") {
  auto cx = build_torus({3, 3, 3, 3}, 1.0);
  for (int e = 0; e < cx->edge_count(); ++e) {
    CHECK(cx->edge_tail(e) != cx->edge_head(e));
  }
  // every face loop is closed: tail of each step matches head of the previous
  for (int f = 0; f < cx->face_count(); ++f) {
    const auto& loop = cx->face_loop(f);
    int at = loop.base_vertex;
    for (int i = 0; i < 4; ++i) {
      const int e = loop.edge[i];
      if (loop.sign[i] > 0) {
        CHECK(cx->edge_tail(e) == at);
        at = cx->edge_head(e);
      } else {
        CHECK(cx->edge_head(e) == at);
        at = cx->edge_tail(e);
      }
    }
    CHECK(at == loop.base_vertex);
  }
  // periodic: every vertex has exactly 8 incident edges
  for (int v = 0; v < cx->vertex_count(); ++v) CHECK(cx->vertex_edges(v).size() == 8);
}

TEST_CASE("ball classification against direct enumeration") {
  auto torus = build_torus({8, 8, 8, 8}, 1.0);
  BallRegion ball = build_ball(torus, {2, 2, 2, 2}, {6, 6, 6, 6});

  // oracle: direct corner enumeration per vertex
  int interior = 0, tangential = 0, in_region = 0;
  for (int v = 0; v < torus->vertex_count(); ++v) {
    const auto c = torus->vertex_coords(v);
    bool in = true, strict = true;
    for (int a = 0; a < 4; ++a) {
      if (c[a] < 2 || c[a] > 5) in = false;
      if (c[a] < 3 || c[a] > 4) strict = false;
    }
    in_region += in;
    interior += strict;
    tangential += in && !strict;
    CHECK((ball.cell_class(0, v) == CellClass::exterior) == !in);
    if (in) CHECK((ball.cell_class(0, v) == CellClass::interior) == strict);
  }
  CHECK(interior == 16);
  CHECK(ball.class_count(0, CellClass::interior) == 16);
  CHECK(ball.class_count(0, CellClass::boundary_tangential) == tangential);
  CHECK(tangential == 4 * 4 * 4 * 4 - 16);

  // classification is total
  for (int k = 0; k <= 4; ++k) {
    int sum = 0;
    for (int i = 0; i < 4; ++i) sum += ball.class_count(k, static_cast<CellClass>(i));
    CHECK(sum == torus->cell_count(k));
  }

  // normal edges have one endpoint tangential, one interior
  for (int e = 0; e < torus->edge_count(); ++e) {
    if (ball.cell_class(1, e) != CellClass::boundary_normal) continue;
    const CellClass a = ball.cell_class(0, torus->edge_tail(e));
    const CellClass b = ball.cell_class(0, torus->edge_head(e));
    const bool ok = (a == CellClass::boundary_tangential && b == CellClass::interior) ||
                    (b == CellClass::boundary_tangential && a == CellClass::interior);
    CHECK(ok);
  }

  // region faces are exactly the faces whose links all lie in the closed region;
  // no exterior face touches an interior or normal edge
  for (int f = 0; f < torus->face_count(); ++f) {
    if (ball.cell_class(2, f) != CellClass::exterior) continue;
    const auto& loop = torus->face_loop(f);
    for (int i = 0; i < 4; ++i) {
      const CellClass ec = ball.cell_class(1, loop.edge[i]);
      CHECK(ec != CellClass::interior);
      CHECK(ec != CellClass::boundary_normal);
    }
  }
}

TEST_CASE("ball preconditions") {
  auto torus = build_torus({8, 8, 8, 8}, 1.0);
  CHECK_THROWS_AS(build_ball(torus, {0, 0, 0, 0}, {8, 4, 4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(build_ball(torus, {0, 0, 0, 0}, {2, 4, 4, 4}), std::invalid_argument);
  auto box = build_box({4, 4, 4, 4}, 1.0);
  CHECK_THROWS_AS(build_ball(box, {0, 0, 0, 0}, {2, 2, 2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(build_ball(box, {1, 0, 0, 0}, {5, 4, 4, 4}), std::invalid_argument);
  CHECK_NOTHROW(build_ball(box, {0, 0, 0, 0}, {4, 4, 4, 4}));
  // seam-crossing placement is allowed on the torus
  CHECK_NOTHROW(build_ball(torus, {6, 6, 6, 6}, {10, 10, 10, 10}));
}

TEST_CASE("boundary complex is a closed 3-sphere-like complex") {
  auto torus = build_torus({6, 6, 6, 6}, 1.0);
  BallRegion ball = build_ball(torus, {1, 1, 1, 1}, {5, 5, 5, 5});
  const auto& bc = *ball.boundary();

  REQUIRE(bc.dim() == 3);
  CHECK(bc.vertex_count() == ball.class_count(0, CellClass::boundary_tangential));

  // closed: every 2-cell bounds exactly two 3-cells
  std::vector<int> use(bc.cell_count(2), 0);
  const auto& b3 = bc.boundary_matrix(3);
  for (int c = 0; c < b3.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(b3, c); it; ++it) use[it.row()]++;
  for (int f = 0; f < bc.cell_count(2); ++f) CHECK(use[f] == 2);

  for (int k = 2; k <= 3; ++k) CHECK(max_abs(bc.boundary_matrix(k - 1) * bc.boundary_matrix(k)) == 0.0);

  // Betti numbers of the 3-sphere analog, via dense ranks
  const auto b = betti(bc);
  CHECK(b[0] == 1);
  CHECK(b[1] == 0);
  CHECK(b[2] == 0);
  CHECK(b[3] == 1);
  int chi = 0;
  for (int k = 0; k <= 3; ++k) chi += (k % 2 ? -1 : 1) * bc.cell_count(k);
  CHECK(chi == 0);
}

TEST_CASE("minimal ball still yields a closed shell; construction is deterministic") {
  auto box = build_box({5, 5, 5, 5}, 1.0);
  BallRegion a = build_ball(box, {1, 1, 1, 1}, {4, 4, 4, 4});
  CHECK(a.class_count(0, CellClass::interior) == 1);
  const auto& bc = *a.boundary();
  std::vector<int> use(bc.cell_count(2), 0);
  for (int c = 0; c < bc.boundary_matrix(3).outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(bc.boundary_matrix(3), c); it; ++it)
      use[it.row()]++;
  for (int f = 0; f < bc.cell_count(2); ++f) CHECK(use[f] == 2);

  BallRegion b = build_ball(box, {1, 1, 1, 1}, {4, 4, 4, 4});
  for (int k = 0; k <= 3; ++k) {
    REQUIRE(a.boundary()->cell_count(k) == b.boundary()->cell_count(k));
    for (int c = 0; c < a.boundary()->cell_count(k); ++c)
      CHECK(a.boundary_to_parent(k, c) == b.boundary_to_parent(k, c));
  }
}

TEST_CASE("sub-complex maps are consistent") {
  auto torus = build_torus({8, 6, 6, 6}, 0.5);
  BallRegion ball = build_ball(torus, {5, 0, 1, 2}, {9, 4, 5, 6});  // crosses the seam on axis 0
  const auto& sub = *ball.sub();
  CHECK(sub.topology() == Topology::box);
  CHECK(sub.dims() == std::array<int, 4>{4, 4, 4, 4});
  for (int k = 0; k <= 4; ++k) {
    for (int c = 0; c < sub.cell_count(k); ++c) {
      const int pc = ball.sub_to_parent(k, c);
      REQUIRE(pc >= 0);
      CHECK(ball.parent_to_sub(k, pc) == c);
      CHECK(ball.cell_class(k, pc) != CellClass::exterior);
      // class agrees with the sub-box's own classification
      CHECK(static_cast<int>(ball.cell_class(k, pc)) == static_cast<int>(sub.own_cell_class(k, c)));
    }
  }
  // every non-exterior parent cell is reached
  for (int k = 0; k <= 4; ++k) {
    int n = 0;
    for (int c = 0; c < torus->cell_count(k); ++c) n += ball.parent_to_sub(k, c) >= 0;
    CHECK(n == sub.cell_count(k));
  }
}

TEST_CASE("box weights follow the trapezoidal convention") {
  auto box = build_box({4, 4, 4, 4}, 2.0);
  const double h4 = 16.0;
  // corner vertex: all four axes on the boundary
  CHECK(box->cell_weights(0)[box->vertex_id({0, 0, 0, 0})] == h4 / 16.0);
  // interior vertex
  CHECK(box->cell_weights(0)[box->vertex_id({1, 1, 1, 1})] == h4);
  auto torus = build_torus({4, 4, 4, 4}, 2.0);
  for (int k = 0; k <= 4; ++k) CHECK(torus->cell_weights(k).minCoeff() == h4);
}

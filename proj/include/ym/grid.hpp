#pragma once

#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ym {

enum class Topology { periodic, box, boundary };
enum class CellClass : std::uint8_t { interior, boundary_tangential, boundary_normal, exterior };

std::string topology_name(Topology t);

/// A hypercubic cell complex: the 4-torus, a 4D box, or the closed 3-complex
/// induced on the surface of a ball region. Cells of every degree 0..dim are
/// enumerated densely and deterministically; instances are immutable after
/// construction and safe to share across threads.
class LatticeComplex {
 public:
  int dim() const { return dim_; }
  Topology topology() const { return topo_; }
  bool closed() const { return topo_ != Topology::box; }
  const std::array<int, 4>& dims() const { return dims_; }
  double spacing() const { return h_; }

  int cell_count(int k) const { return static_cast<int>(base_[k].size()); }
  int vertex_count() const { return cell_count(0); }
  int edge_count() const { return cell_count(1); }
  int face_count() const { return cell_count(2); }

  int edge_tail(int e) const { return tail_[e]; }
  int edge_head(int e) const { return head_[e]; }
  /// (edge id, +1) when v is the tail, (edge id, -1) when v is the head.
  const std::vector<std::pair<int, int>>& vertex_edges(int v) const { return vertex_edges_[v]; }

  struct FaceLoop {
    std::array<int, 4> edge;
    std::array<int, 4> sign;  // +1 traversed forward, -1 reversed
    int base_vertex;
  };
  const FaceLoop& face_loop(int f) const { return face_loops_[f]; }

  /// Signed incidence of k-cells on (k-1)-cells, k = 1..dim; entries are +-1.
  const Eigen::SparseMatrix<double>& boundary_matrix(int k) const { return bnd_[k]; }

  /// Diagonal L2 cell measures: h^dim, halved once per box-boundary axis the
  /// cell lies in (trapezoidal convention). Uniform on closed complexes.
  const Eigen::VectorXd& cell_weights(int k) const { return weights_[k]; }

  int cell_base(int k, int c) const { return base_[k][c]; }
  int cell_comb(int k, int c) const { return comb_[k][c]; }
  int find_cell(int k, int comb, int base) const;
  static const std::vector<std::vector<int>>& direction_combinations(int dim, int k);

  std::array<int, 4> vertex_coords(int v) const;
  int vertex_id(std::array<int, 4> c) const;  // wraps on periodic axes
  bool vertex_in_range(const std::array<int, 4>& c) const;

  /// Class of a cell relative to this complex's own boundary surface.
  /// Closed complexes report every cell interior.
  CellClass own_cell_class(int k, int c) const;
  int own_class_count(int k, CellClass cls) const;

  /// Structured text header embedded in field files.
  std::string descriptor() const;

  static std::shared_ptr<const LatticeComplex> make_lattice(std::array<int, 4> dims, double h,
                                                            Topology topo);

 private:
  friend class BallRegion;
  LatticeComplex() = default;
  void build_lattice_tables();
  CellClass lattice_cell_class(int k, int c) const;

  int dim_ = 4;
  Topology topo_ = Topology::periodic;
  std::array<int, 4> dims_{};
  double h_ = 1.0;

  std::array<std::vector<int>, 5> base_;          // base vertex per cell
  std::array<std::vector<std::int16_t>, 5> comb_; // direction combination per cell
  std::array<std::vector<int>, 5> lookup_;        // (comb, base) -> dense id; empty on boundary complexes
  std::array<Eigen::SparseMatrix<double>, 5> bnd_;
  std::array<Eigen::VectorXd, 5> weights_;
  std::vector<int> tail_, head_;
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;
  std::vector<FaceLoop> face_loops_;
  std::vector<std::array<int, 4>> bvcoords_;  // parent coordinates (boundary complexes)
};

std::shared_ptr<const LatticeComplex> build_torus(std::array<int, 4> dims, double h);
std::shared_ptr<const LatticeComplex> build_box(std::array<int, 4> dims, double h);

/// A sub-box of a 4D complex with every parent cell classified
/// interior / boundary_tangential / boundary_normal / exterior. Carries the
/// closed region as its own box complex (`sub`) and the tangential surface as
/// a closed 3-complex (`boundary`), with index maps between the three.
class BallRegion {
 public:
  BallRegion(std::shared_ptr<const LatticeComplex> parent, std::array<int, 4> lo,
             std::array<int, 4> hi);

  const std::shared_ptr<const LatticeComplex>& parent() const { return parent_; }
  const std::array<int, 4>& lo() const { return lo_; }
  const std::array<int, 4>& len() const { return len_; }

  CellClass cell_class(int k, int c) const { return cls_[k][c]; }
  int class_count(int k, CellClass cls) const { return counts_[k][static_cast<int>(cls)]; }

  const std::shared_ptr<const LatticeComplex>& sub() const { return sub_; }
  const std::shared_ptr<const LatticeComplex>& boundary() const { return boundary_; }

  int sub_to_parent(int k, int c) const { return sub_to_parent_[k][c]; }
  int parent_to_sub(int k, int c) const { return parent_to_sub_[k][c]; }
  int boundary_to_parent(int k, int c) const { return bdry_to_parent_[k][c]; }
  int boundary_to_sub(int k, int c) const { return bdry_to_sub_[k][c]; }

  bool whole_parent() const { return sub_ == parent_; }

 private:
  std::shared_ptr<const LatticeComplex> parent_;
  std::array<int, 4> lo_{}, len_{};
  std::array<std::vector<CellClass>, 5> cls_;
  std::array<std::array<int, 4>, 5> counts_{};
  std::shared_ptr<const LatticeComplex> sub_;
  std::shared_ptr<const LatticeComplex> boundary_;
  std::array<std::vector<int>, 5> sub_to_parent_;
  std::array<std::vector<int>, 5> parent_to_sub_;
  std::array<std::vector<int>, 4> bdry_to_parent_;
  std::array<std::vector<int>, 4> bdry_to_sub_;
};

BallRegion build_ball(std::shared_ptr<const LatticeComplex> parent, std::array<int, 4> lo,
                      std::array<int, 4> hi);

/// The closed 3-complex of tangential cells with index maps to the parent.
inline const std::shared_ptr<const LatticeComplex>& boundary_complex(const BallRegion& region) {
  return region.boundary();
}

}  // namespace ym

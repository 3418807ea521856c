#pragma once

#include "cutflow/common.hpp"

#include <array>
#include <vector>

namespace cutflow {

enum class BoundaryTag { inflow, wall, outflow };

/// Boundary tag per side of the rectangular pipe. Defaults follow the
/// positional convention x=x_min inflow, x=x_max outflow, walls top/bottom;
/// scenarios may override (e.g. Dirichlet data on all sides).
struct BoundaryTags {
  BoundaryTag left = BoundaryTag::inflow;
  BoundaryTag right = BoundaryTag::outflow;
  BoundaryTag bottom = BoundaryTag::wall;
  BoundaryTag top = BoundaryTag::wall;
};

struct Face {
  // axis: 0 = vertical face (normal in x), 1 = horizontal face (normal in y).
  int axis = 0;
  // Adjacent cell indices; cell_minus on the lower-coordinate side.
  // Boundary faces have exactly one of them set to -1.
  int cell_minus = -1;
  int cell_plus = -1;
  BoundaryTag tag = BoundaryTag::wall;  // meaningful for boundary faces only
  Vec2 start;                           // lower endpoint
  Vec2 end;                             // upper endpoint

  bool is_boundary() const { return cell_minus < 0 || cell_plus < 0; }
  double length() const { return (end - start).norm(); }
  int inner_cell() const { return cell_minus >= 0 ? cell_minus : cell_plus; }
  /// Unit normal pointing out of the domain (boundary faces only).
  Vec2 outward_normal() const {
    if (axis == 0) return {cell_plus < 0 ? 1.0 : -1.0, 0.0};
    return {0.0, cell_plus < 0 ? 1.0 : -1.0};
  }
};

/// Fixed structured quadrilateral background mesh of the rectangular pipe.
/// Cells are congruent and axis-aligned; indexing is x-major (i fastest).
class BackgroundMesh {
 public:
  BackgroundMesh(const Rect& extent, int n_cells_x, int n_cells_y,
                 const BoundaryTags& tags = {});

  const Rect& extent() const { return extent_; }
  int n_cells_x() const { return nx_; }
  int n_cells_y() const { return ny_; }
  int n_cells() const { return nx_ * ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Mesh size h used in the Nitsche and ghost-penalty scalings.
  double h() const { return std::max(hx_, hy_); }

  int cell_index(int i, int j) const { return j * nx_ + i; }
  std::array<int, 2> cell_ij(int c) const { return {c % nx_, c / nx_}; }
  Rect cell_rect(int c) const;
  /// Cell containing p, boundary ties resolved toward the lower cell.
  int locate_cell(const Vec2& p) const;
  /// Reference coordinates of p in cell c (may lie outside [0,1]^2).
  Vec2 to_reference(int c, const Vec2& p) const;
  Vec2 from_reference(int c, const Vec2& ref) const;

  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<int>& interior_faces() const { return interior_faces_; }
  const std::vector<int>& boundary_faces() const { return boundary_faces_; }
  /// Face indices of the four sides of cell c: {left, right, bottom, top}.
  std::array<int, 4> cell_faces(int c) const;

 private:
  Rect extent_;
  int nx_ = 0;
  int ny_ = 0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<Face> faces_;
  std::vector<int> interior_faces_;
  std::vector<int> boundary_faces_;
};

BackgroundMesh build_mesh(const Rect& extent, int n_cells_x, int n_cells_y,
                          const BoundaryTags& tags = {});

/// Local-to-global index map of a scalar continuous Q_r space on the
/// structured grid. Global nodes are numbered lexicographically, x-major.
class DofMap {
 public:
  DofMap(const BackgroundMesh& mesh, int degree);

  int degree() const { return degree_; }
  int n_dofs() const { return n_nodes_x_ * n_nodes_y_; }
  int n_local() const { return (degree_ + 1) * (degree_ + 1); }

  /// Global indices of the cell's local nodes, lexicographic (x fastest).
  void cell_dofs(int cell, int* out) const;
  Vec2 node_position(int global_dof) const;

 private:
  int degree_;
  int nx_, ny_;
  int n_nodes_x_, n_nodes_y_;
  double x0_, y0_, dx_, dy_;
};

/// Q_r / Q_{r-1} velocity-pressure pair. Global DoF vector layout is
/// [velocity-x | velocity-y | pressure].
struct TaylorHoodSpace {
  TaylorHoodSpace(const BackgroundMesh& mesh, int degree);

  DofMap velocity;   // scalar Q_r, used for both components
  DofMap pressure;   // scalar Q_{r-1}
  int n_scalar_velocity;
  int n_pressure;
  int n_total;

  int vx(int node) const { return node; }
  int vy(int node) const { return n_scalar_velocity + node; }
  int p(int node) const { return 2 * n_scalar_velocity + node; }
};

TaylorHoodSpace build_taylor_hood(const BackgroundMesh& mesh, int degree);

}  // namespace cutflow

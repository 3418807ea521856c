#include "cutflow/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace cutflow {

BackgroundMesh::BackgroundMesh(const Rect& extent, int n_cells_x, int n_cells_y,
                               const BoundaryTags& tags)
    : extent_(extent), nx_(n_cells_x), ny_(n_cells_y) {
  if (extent.degenerate())
    throw ConfigError("build_mesh: degenerate domain extent");
  if (nx_ < 1 || ny_ < 1)
    throw ConfigError("build_mesh: cell counts must be positive");
  hx_ = extent.width() / nx_;
  hy_ = extent.height() / ny_;

  // Vertical faces first (normal x), then horizontal (normal y).
  faces_.reserve((nx_ + 1) * ny_ + nx_ * (ny_ + 1));
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      Face f;
      f.axis = 0;
      f.cell_minus = (i > 0) ? cell_index(i - 1, j) : -1;
      f.cell_plus = (i < nx_) ? cell_index(i, j) : -1;
      const double x = extent_.x_min + i * hx_;
      f.start = {x, extent_.y_min + j * hy_};
      f.end = {x, extent_.y_min + (j + 1) * hy_};
      if (i == 0) f.tag = tags.left;
      if (i == nx_) f.tag = tags.right;
      faces_.push_back(f);
    }
  }
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      Face f;
      f.axis = 1;
      f.cell_minus = (j > 0) ? cell_index(i, j - 1) : -1;
      f.cell_plus = (j < ny_) ? cell_index(i, j) : -1;
      const double y = extent_.y_min + j * hy_;
      f.start = {extent_.x_min + i * hx_, y};
      f.end = {extent_.x_min + (i + 1) * hx_, y};
      if (j == 0) f.tag = tags.bottom;
      if (j == ny_) f.tag = tags.top;
      faces_.push_back(f);
    }
  }
  for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
    if (faces_[f].is_boundary())
      boundary_faces_.push_back(f);
    else
      interior_faces_.push_back(f);
  }
}

Rect BackgroundMesh::cell_rect(int c) const {
  const auto [i, j] = cell_ij(c);
  Rect r;
  r.x_min = extent_.x_min + i * hx_;
  r.x_max = extent_.x_min + (i + 1) * hx_;
  r.y_min = extent_.y_min + j * hy_;
  r.y_max = extent_.y_min + (j + 1) * hy_;
  return r;
}

int BackgroundMesh::locate_cell(const Vec2& p) const {
  int i = static_cast<int>(std::floor((p.x() - extent_.x_min) / hx_));
  int j = static_cast<int>(std::floor((p.y() - extent_.y_min) / hy_));
  i = std::clamp(i, 0, nx_ - 1);
  j = std::clamp(j, 0, ny_ - 1);
  return cell_index(i, j);
}

Vec2 BackgroundMesh::to_reference(int c, const Vec2& p) const {
  const Rect r = cell_rect(c);
  return {(p.x() - r.x_min) / hx_, (p.y() - r.y_min) / hy_};
}

Vec2 BackgroundMesh::from_reference(int c, const Vec2& ref) const {
  const Rect r = cell_rect(c);
  return {r.x_min + ref.x() * hx_, r.y_min + ref.y() * hy_};
}

std::array<int, 4> BackgroundMesh::cell_faces(int c) const {
  const auto [i, j] = cell_ij(c);
  const int v0 = j * (nx_ + 1) + i;        // left
  const int v1 = v0 + 1;                   // right
  const int h_base = (nx_ + 1) * ny_;
  const int h0 = h_base + j * nx_ + i;     // bottom
  const int h1 = h_base + (j + 1) * nx_ + i;  // top
  return {v0, v1, h0, h1};
}

BackgroundMesh build_mesh(const Rect& extent, int n_cells_x, int n_cells_y,
                          const BoundaryTags& tags) {
  return BackgroundMesh(extent, n_cells_x, n_cells_y, tags);
}

DofMap::DofMap(const BackgroundMesh& mesh, int degree)
    : degree_(degree), nx_(mesh.n_cells_x()), ny_(mesh.n_cells_y()) {
  if (degree_ < 1) throw ConfigError("DofMap: degree must be >= 1");
  n_nodes_x_ = degree_ * nx_ + 1;
  n_nodes_y_ = degree_ * ny_ + 1;
  x0_ = mesh.extent().x_min;
  y0_ = mesh.extent().y_min;
  dx_ = mesh.hx() / degree_;
  dy_ = mesh.hy() / degree_;
}

void DofMap::cell_dofs(int cell, int* out) const {
  const int i = cell % nx_;
  const int j = cell / nx_;
  int k = 0;
  for (int b = 0; b <= degree_; ++b) {
    const int row = (degree_ * j + b) * n_nodes_x_;
    for (int a = 0; a <= degree_; ++a) out[k++] = row + degree_ * i + a;
  }
}

Vec2 DofMap::node_position(int g) const {
  const int i = g % n_nodes_x_;
  const int j = g / n_nodes_x_;
  return {x0_ + i * dx_, y0_ + j * dy_};
}

TaylorHoodSpace::TaylorHoodSpace(const BackgroundMesh& mesh, int degree)
    : velocity(mesh, degree), pressure(mesh, degree - 1),
      n_scalar_velocity(velocity.n_dofs()), n_pressure(pressure.n_dofs()),
      n_total(2 * velocity.n_dofs() + pressure.n_dofs()) {}

TaylorHoodSpace build_taylor_hood(const BackgroundMesh& mesh, int degree) {
  if (degree < 2)
    throw ConfigError(
        "build_taylor_hood: degree must be >= 2 (Q1/Q0 is not inf-sup stable)");
  return TaylorHoodSpace(mesh, degree);
}

}  // namespace cutflow

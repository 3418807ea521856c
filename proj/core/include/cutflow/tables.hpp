#pragma once

#include "cutflow/geometry.hpp"
#include "cutflow/mesh.hpp"
#include "cutflow/quadrature.hpp"

#include <memory>
#include <vector>

namespace cutflow {

/// Quadrature orders per integral type, derived from the velocity degree r.
/// Cut volumes and embedded arcs run one order above full cells to absorb
/// the curved-limit error.
struct QuadOrders {
  int volume = 3;     // full cells, tensor Gauss
  int cut = 4;        // cut-cell iterated rule (both directions)
  int boundary = 4;   // embedded boundary arcs
  int face = 3;       // fitted boundary faces

  static QuadOrders for_degree(int r) {
    return {r + 1, r + 2, r + 2, r + 1};
  }
};

struct CutCellData {
  CutCellGeometry topo;
  Rule2D volume;
  Rule2D boundary;                 // embedded arc, arc-length weights
  std::vector<Vec2> boundary_normals;  // fluid outward normal per arc point
};

/// Fitted Dirichlet boundary face (fluid part only).
struct BoundaryFaceData {
  int face = -1;
  int cell = -1;
  BoundaryTag tag = BoundaryTag::wall;
  Vec2 normal;
  Rule2D rule;
};

/// All geometric quadrature data for one time instant. Built once, then
/// read-only; instances for different times are independent.
struct GeometryTables {
  double time = 0.0;
  CellClassification cls;
  std::vector<CutCellData> cut;          // aligned with cls.cut_cells
  std::vector<BoundaryFaceData> dirichlet_faces;

  const CutCellData* cut_data(int cell) const;

 private:
  friend GeometryTables build_geometry_tables(const BackgroundMesh&,
                                              const LevelSet*, double,
                                              const QuadOrders&);
  std::vector<int> cut_index_;  // per cell, -1 if not cut
};

/// Builds classification and quadrature tables at time t. A null level set
/// means no body: every cell is fluid.
GeometryTables build_geometry_tables(const BackgroundMesh& mesh,
                                     const LevelSet* geom, double t,
                                     const QuadOrders& orders);

}  // namespace cutflow

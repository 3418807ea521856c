#pragma once

#include "cutflow/common.hpp"
#include "cutflow/geometry.hpp"
#include "cutflow/mesh.hpp"

#include <vector>

namespace cutflow {

/// 1D rule; Gauss/Radau rules live on the reference interval [0,1].
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
  double total_weight() const;
};

/// 2D rule in physical coordinates; weights carry area (or arc length).
struct Rule2D {
  std::vector<Vec2> points;
  std::vector<double> weights;
  double total_weight() const;
};

/// M-point Gauss-Legendre rule on [0,1]; exact for degree <= 2M-1.
Rule1D gauss_1d(int m);

/// s-point right Gauss-Radau rule on [0,1]; the last node is exactly 1 and
/// the rule is exact for degree <= 2s-2.
Rule1D gauss_radau_right_1d(int s);

/// Tensor Gauss rule on a cell; exact for Q_{2M-1}.
Rule2D full_cell_quadrature(const Rect& cell, int m);

/// Iterated quadrature over the fluid portion of a cut cell. The outer
/// direction follows the longest straight fluid edge of the cell; the outer
/// interval is split at the cut vertices (and at circle extremal abscissae)
/// so the inner-limit function stays smooth per strip.
Rule2D cut_cell_quadrature(const BackgroundMesh& mesh,
                           const CutCellGeometry& geo, const LevelSet& geom,
                           int m1, int m2);

/// Line rule on the embedded boundary portion inside one cut cell, with
/// arc-length weights. Exact angular parametrization for circles; generic
/// level sets fall back to a projected-chord parametrization.
Rule2D embedded_boundary_quadrature(const BackgroundMesh& mesh,
                                    const CutCellGeometry& geo,
                                    const LevelSet& geom, int m);

/// 1D Gauss rule mapped to the segment [a,b] in physical space.
Rule2D segment_quadrature(const Vec2& a, const Vec2& b, int m);

}  // namespace cutflow

#include "cutflow/tables.hpp"

#include <cmath>

namespace cutflow {

const CutCellData* GeometryTables::cut_data(int cell) const {
  const int idx = cut_index_.empty() ? -1 : cut_index_[cell];
  return idx >= 0 ? &cut[idx] : nullptr;
}

namespace {

/// Fluid (theta > 0) sub-segments of a straight boundary face. Bodies keep a
/// positive clearance from the pipe boundary in all shipped scenarios, so
/// this generic path is exercised only by synthetic level sets in tests.
std::vector<std::pair<Vec2, Vec2>> fluid_face_segments(const Face& face,
                                                       const LevelSet& geom,
                                                       double t) {
  const int n = 16;
  std::vector<double> breaks;
  double prev = 0.0;
  double f_prev = geom.value(face.start, t);
  for (int i = 1; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double f = geom.value(face.start + s * (face.end - face.start), t);
    if ((f < 0.0) != (f_prev < 0.0)) {
      double a = prev, b = s, fa = f_prev;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const double fm =
            geom.value(face.start + m * (face.end - face.start), t);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      breaks.push_back(0.5 * (a + b));
    }
    prev = s;
    f_prev = f;
  }
  std::vector<std::pair<Vec2, Vec2>> segments;
  double start = 0.0;
  bool in_fluid = geom.value(face.start + 1e-12 * (face.end - face.start), t) > 0.0;
  auto at = [&](double s) { return Vec2(face.start + s * (face.end - face.start)); };
  for (double brk : breaks) {
    if (in_fluid && brk > start) segments.emplace_back(at(start), at(brk));
    start = brk;
    in_fluid = !in_fluid;
  }
  if (in_fluid && start < 1.0) segments.emplace_back(at(start), at(1.0));
  return segments;
}

}  // namespace

GeometryTables build_geometry_tables(const BackgroundMesh& mesh,
                                     const LevelSet* geom, double t,
                                     const QuadOrders& orders) {
  GeometryTables tables;
  tables.time = t;

  if (geom == nullptr) {
    tables.cls.time = t;
    tables.cls.kind.assign(mesh.n_cells(), CellKind::fluid);
    tables.cls.fluid_cells.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) tables.cls.fluid_cells[c] = c;
  } else {
    tables.cls = classify_cells(mesh, *geom, t);
  }

  tables.cut_index_.assign(mesh.n_cells(), -1);
  tables.cut.reserve(tables.cls.cut_cells.size());
  for (int c : tables.cls.cut_cells) {
    CutCellData data;
    data.topo = cut_topology(mesh, c, *geom, t);
    data.volume = cut_cell_quadrature(mesh, data.topo, *geom, orders.cut,
                                      orders.cut);
    data.boundary =
        embedded_boundary_quadrature(mesh, data.topo, *geom, orders.boundary);
    data.boundary_normals.reserve(data.boundary.points.size());
    for (const Vec2& p : data.boundary.points)
      data.boundary_normals.push_back(fluid_normal(*geom, p, t));
    tables.cut_index_[c] = static_cast<int>(tables.cut.size());
    tables.cut.push_back(std::move(data));
  }

  for (int fi : mesh.boundary_faces()) {
    const Face& face = mesh.faces()[fi];
    if (face.tag == BoundaryTag::outflow) continue;  // do-nothing boundary
    const int cell = face.inner_cell();
    const CellKind kind = tables.cls.kind[cell];
    if (kind == CellKind::rigid) continue;
    BoundaryFaceData data;
    data.face = fi;
    data.cell = cell;
    data.tag = face.tag;
    data.normal = face.outward_normal();
    if (kind == CellKind::fluid) {
      data.rule = segment_quadrature(face.start, face.end, orders.face);
    } else {
      for (const auto& [a, b] : fluid_face_segments(face, *geom, t)) {
        Rule2D part = segment_quadrature(a, b, orders.face);
        data.rule.points.insert(data.rule.points.end(), part.points.begin(),
                                part.points.end());
        data.rule.weights.insert(data.rule.weights.end(), part.weights.begin(),
                                 part.weights.end());
      }
      if (data.rule.points.empty()) continue;
    }
    tables.dirichlet_faces.push_back(std::move(data));
  }
  return tables;
}

}  // namespace cutflow

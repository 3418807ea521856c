#include "cutflow/geometry.hpp"

#include <cmath>
#include <string>

namespace cutflow {

RigidMotion RigidMotion::harmonic_x(const Vec2& center0, double amplitude,
                                    double omega, double radius) {
  auto center = [center0, amplitude, omega](double t) {
    return Vec2(center0.x() + amplitude * std::sin(omega * t), center0.y());
  };
  auto velocity = [amplitude, omega](double t) {
    return Vec2(amplitude * omega * std::cos(omega * t), 0.0);
  };
  return RigidMotion(center, velocity, radius);
}

RigidMotion RigidMotion::stationary(const Vec2& center, double radius) {
  return RigidMotion([center](double) { return center; },
                     [](double) { return Vec2(0.0, 0.0); }, radius);
}

namespace {

enum class Side : unsigned char { rigid, zero, fluid };

Side side_of(double theta, double eps) {
  if (theta < -eps) return Side::rigid;
  if (theta > eps) return Side::fluid;
  return Side::zero;
}

// Corner order follows Rect::corner: 0:(lo,lo) 1:(hi,lo) 2:(lo,hi) 3:(hi,hi).
// Edge order: 0 bottom, 1 right, 2 top, 3 left.
constexpr int kEdgeCornerA[4] = {0, 1, 3, 2};
constexpr int kEdgeCornerB[4] = {1, 3, 2, 0};

}  // namespace

CellClassification classify_cells(const BackgroundMesh& mesh,
                                  const LevelSet& geom, double t) {
  const double eps = classification_tolerance(mesh);
  CellClassification cls;
  cls.time = t;
  cls.kind.resize(mesh.n_cells());

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Rect r = mesh.cell_rect(c);
    Side corner[4];
    bool any_rigid = false, any_fluid = false;
    for (int k = 0; k < 4; ++k) {
      corner[k] = side_of(geom.value(r.corner(k), t), eps);
      any_rigid |= corner[k] == Side::rigid;
      any_fluid |= corner[k] == Side::fluid;
    }
    const Side center = side_of(geom.value(r.center(), t), eps);
    any_rigid |= center == Side::rigid;
    any_fluid |= center == Side::fluid;

    // Edge midpoints: catch a boundary passing through an edge without
    // changing the corner signs (double cut of a single face).
    Side mid[4];
    for (int e = 0; e < 4; ++e) {
      const Vec2 m = 0.5 * (r.corner(kEdgeCornerA[e]) + r.corner(kEdgeCornerB[e]));
      mid[e] = side_of(geom.value(m, t), eps);
      any_rigid |= mid[e] == Side::rigid;
      any_fluid |= mid[e] == Side::fluid;
    }

    CellKind kind;
    if (!any_rigid)
      kind = CellKind::fluid;  // includes grazing contact from outside
    else if (!any_fluid)
      kind = CellKind::rigid;  // includes a face lying exactly on the boundary
    else
      kind = CellKind::cut;

    if (kind == CellKind::cut) {
      int crossings = 0;
      for (int e = 0; e < 4; ++e) {
        const Side a = corner[kEdgeCornerA[e]];
        const Side b = corner[kEdgeCornerB[e]];
        const bool corner_cross =
            (a == Side::rigid) != (b == Side::rigid) &&
            a != Side::zero && b != Side::zero;
        const bool corner_touch =
            (a == Side::rigid && b == Side::zero) ||
            (a == Side::zero && b == Side::rigid);
        if (corner_cross || corner_touch) {
          ++crossings;
        } else if (a == b && mid[e] != a && mid[e] != Side::zero) {
          throw GeometryError(
              "geometry under-resolved: cell " + std::to_string(c) + " at t=" +
              std::to_string(t) +
              " has a face crossed twice by the boundary; refine the mesh");
        }
      }
      if (crossings != 2)
        throw GeometryError(
            "geometry under-resolved: cell " + std::to_string(c) + " at t=" +
            std::to_string(t) + " has " + std::to_string(crossings) +
            " edge crossings (expected 2); refine the mesh");
    }

    cls.kind[c] = kind;
    switch (kind) {
      case CellKind::fluid: cls.fluid_cells.push_back(c); break;
      case CellKind::rigid: cls.rigid_cells.push_back(c); break;
      case CellKind::cut: cls.cut_cells.push_back(c); break;
    }
  }

  for (int f : mesh.interior_faces()) {
    const Face& face = mesh.faces()[f];
    const bool m_stab = cls.kind[face.cell_minus] != CellKind::fluid;
    const bool p_stab = cls.kind[face.cell_plus] != CellKind::fluid;
    if (m_stab && p_stab) cls.stab_faces.push_back(f);
  }
  return cls;
}

namespace {

/// Root of theta along the segment a->b, assuming a sign change. Bisection
/// narrows the bracket, one Newton polish sharpens the root.
Vec2 edge_root(const LevelSet& geom, double t, Vec2 a, Vec2 b, double fa,
               double fb, double tol) {
  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;
  for (int it = 0; it < 80; ++it) {
    const Vec2 m = 0.5 * (a + b);
    const double fm = geom.value(m, t);
    if (std::abs(fm) <= tol || (b - a).norm() <= tol) {
      a = m;
      fa = fm;
      break;
    }
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  // Newton polish restricted to the edge direction.
  Vec2 x = 0.5 * (a + b);
  const Vec2 dir = (b - a).normalized();
  for (int it = 0; it < 3; ++it) {
    const double f = geom.value(x, t);
    const double df = geom.gradient(x, t).dot(dir);
    if (std::abs(df) < 1e-14) break;
    x -= (f / df) * dir;
  }
  return x;
}

}  // namespace

CutCellGeometry cut_topology(const BackgroundMesh& mesh, int cell,
                             const LevelSet& geom, double t) {
  const double eps = classification_tolerance(mesh);
  const double root_tol = 1e-12 * mesh.h();
  const Rect r = mesh.cell_rect(cell);

  CutCellGeometry geo;
  geo.cell = cell;
  geo.time = t;

  double theta[4];
  Side side[4];
  geo.n_fluid_corners = 0;
  for (int k = 0; k < 4; ++k) {
    theta[k] = geom.value(r.corner(k), t);
    side[k] = side_of(theta[k], eps);
    geo.fluid_corner[k] = side[k] != Side::rigid;
    if (geo.fluid_corner[k]) ++geo.n_fluid_corners;
  }

  int found = 0;
  for (int e = 0; e < 4; ++e) {
    const int ka = kEdgeCornerA[e];
    const int kb = kEdgeCornerB[e];
    const bool a_r = side[ka] == Side::rigid;
    const bool b_r = side[kb] == Side::rigid;
    if (a_r == b_r) continue;
    if (found >= 2)
      throw GeometryError("cut_topology: more than two cut edges in cell " +
                          std::to_string(cell));
    const Vec2 pa = r.corner(ka);
    const Vec2 pb = r.corner(kb);
    Vec2 p;
    if (side[ka] == Side::zero)
      p = pa;
    else if (side[kb] == Side::zero)
      p = pb;
    else
      p = edge_root(geom, t, pa, pb, theta[ka], theta[kb], root_tol);
    geo.points[found] = p;
    geo.edges[found] = e;
    ++found;
  }
  if (found != 2)
    throw GeometryError(
        "cut_topology: cell " + std::to_string(cell) +
        " classified cut but has " + std::to_string(found) +
        " edge sign changes (geometry under-resolved or inconsistent)");

  switch (geo.n_fluid_corners) {
    case 1: geo.archetype = CutArchetype::triangle; break;
    case 2: geo.archetype = CutArchetype::quadrilateral; break;
    case 3: geo.archetype = CutArchetype::pentagon; break;
    default:
      throw GeometryError("cut_topology: cell " + std::to_string(cell) +
                          " has " + std::to_string(geo.n_fluid_corners) +
                          " fluid corners, inconsistent with a single cut");
  }
  return geo;
}

Vec2 fluid_normal(const LevelSet& geom, const Vec2& x, double t) {
  const Vec2 g = geom.gradient(x, t);
  const double n = g.norm();
  if (n < 1e-12)
    throw GeometryError("fluid_normal: level set gradient degenerate");
  return -g / n;
}

}  // namespace cutflow

#pragma once

#include "cutflow/common.hpp"
#include "cutflow/mesh.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace cutflow {

struct Circle {
  Vec2 center;
  double radius;
};

/// Prescribed rigid-body motion. The velocity must be the exact time
/// derivative of the center trajectory; the Nitsche datum on the body
/// depends on it directly.
class RigidMotion {
 public:
  RigidMotion(std::function<Vec2(double)> center,
              std::function<Vec2(double)> velocity, double radius)
      : center_(std::move(center)), velocity_(std::move(velocity)),
        radius_(radius) {}

  /// Center c(t) = c0 + (A sin(w t), 0), as prescribed in the scenarios.
  static RigidMotion harmonic_x(const Vec2& center0, double amplitude,
                                double omega, double radius);
  static RigidMotion stationary(const Vec2& center, double radius);

  Vec2 center_at(double t) const { return center_(t); }
  Vec2 velocity_at(double t) const { return velocity_(t); }
  double radius() const { return radius_; }

 private:
  std::function<Vec2(double)> center_;
  std::function<Vec2(double)> velocity_;
  double radius_;
};

/// Signed level set of the rigid domain: negative inside the body, zero on
/// its boundary, positive in the fluid.
class LevelSet {
 public:
  virtual ~LevelSet() = default;
  virtual double value(const Vec2& x, double t) const = 0;
  virtual Vec2 gradient(const Vec2& x, double t) const = 0;
  /// Analytic circle at time t, when the body is a circle (fast paths in
  /// the cut-cell quadrature). Returns nullopt for generic level sets.
  virtual std::optional<Circle> circle_at(double /*t*/) const { return {}; }
  /// True when the geometry does not change in time (classification and
  /// quadrature tables can then be shared between all time points).
  virtual bool is_stationary() const { return false; }
};

/// Signed distance to a moving circle.
class CircleLevelSet : public LevelSet {
 public:
  CircleLevelSet(RigidMotion motion, bool stationary = false)
      : motion_(std::move(motion)), stationary_(stationary) {}

  double value(const Vec2& x, double t) const override {
    return (x - motion_.center_at(t)).norm() - motion_.radius();
  }
  Vec2 gradient(const Vec2& x, double t) const override {
    const Vec2 d = x - motion_.center_at(t);
    const double n = d.norm();
    return n > 0.0 ? Vec2(d / n) : Vec2(0.0, 0.0);
  }
  std::optional<Circle> circle_at(double t) const override {
    return Circle{motion_.center_at(t), motion_.radius()};
  }
  bool is_stationary() const override { return stationary_; }
  const RigidMotion& motion() const { return motion_; }

 private:
  RigidMotion motion_;
  bool stationary_;
};

/// Arbitrary time-independent level set (tests, quad-dump tool).
class AnalyticLevelSet : public LevelSet {
 public:
  AnalyticLevelSet(std::function<double(const Vec2&)> value,
                   std::function<Vec2(const Vec2&)> gradient)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  double value(const Vec2& x, double) const override { return value_(x); }
  Vec2 gradient(const Vec2& x, double) const override { return gradient_(x); }
  bool is_stationary() const override { return true; }

 private:
  std::function<double(const Vec2&)> value_;
  std::function<Vec2(const Vec2&)> gradient_;
};

enum class CellKind : unsigned char { fluid, rigid, cut };

/// Per-time decomposition of the background mesh into fluid, rigid and cut
/// cells, plus the ghost-penalty face set F_h (interior faces whose two
/// neighbors both lie in the stabilized set T_{h,s} = rigid + cut).
struct CellClassification {
  double time = 0.0;
  std::vector<CellKind> kind;
  std::vector<int> fluid_cells;
  std::vector<int> rigid_cells;
  std::vector<int> cut_cells;
  std::vector<int> stab_faces;

  int n_stab_cells() const {
    return static_cast<int>(rigid_cells.size() + cut_cells.size());
  }
};

CellClassification classify_cells(const BackgroundMesh& mesh,
                                  const LevelSet& geom, double t);

enum class CutArchetype { triangle, quadrilateral, pentagon };

/// Cut topology of one cell: the two edge-intersection points, the
/// fluid-side corners and the resulting archetype.
struct CutCellGeometry {
  int cell = -1;
  double time = 0.0;
  // Intersection points ordered by local edge index {left,right,bottom,top}.
  std::array<Vec2, 2> points;
  std::array<int, 2> edges;   // local edge index carrying each point
  std::array<bool, 4> fluid_corner;  // corner order as Rect::corner
  int n_fluid_corners = 0;
  CutArchetype archetype = CutArchetype::quadrilateral;
};

CutCellGeometry cut_topology(const BackgroundMesh& mesh, int cell,
                             const LevelSet& geom, double t);

/// Outward unit normal of the fluid domain on the embedded boundary,
/// -grad(theta)/|grad(theta)| (points into the rigid body).
Vec2 fluid_normal(const LevelSet& geom, const Vec2& x, double t);

/// Classification tolerance: corners with |theta| <= eps count as
/// fluid-side, so grazing contact does not create zero-measure cuts.
inline double classification_tolerance(const BackgroundMesh& mesh) {
  return 1e-10 * mesh.h();
}

}  // namespace cutflow

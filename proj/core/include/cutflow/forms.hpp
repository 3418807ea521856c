#pragma once

#include "cutflow/fe_space.hpp"
#include "cutflow/mesh.hpp"
#include "cutflow/problem.hpp"
#include "cutflow/tables.hpp"

#include <functional>
#include <memory>
#include <mutex>

namespace cutflow {

using SpaceTimeField = std::function<Vec2(const Vec2&, double)>;

struct FluidParameters {
  double nu = 1.0;
  SpaceTimeField body_force;  // null means zero
};

struct NitscheConfig {
  double gamma1 = 35.0;
  double gamma2 = 35.0;
  bool operator==(const NitscheConfig&) const = default;
};

struct GhostPenaltyConfig {
  double gamma_v = 1e-2;
  double gamma_p = 1e-2;
  // h exponents of the two penalty terms; the defaults follow the scheme
  // definition (h^-2 on velocity, no h power on pressure).
  double velocity_h_exponent = -2.0;
  double pressure_h_exponent = 0.0;
  bool operator==(const GhostPenaltyConfig&) const = default;
};

/// Dirichlet datum, assembled piecewise: zero on walls, g_i on the inflow,
/// the body velocity g_r on the embedded boundary. Null members mean zero.
struct BoundaryData {
  SpaceTimeField inflow;
  SpaceTimeField wall;
  SpaceTimeField body;

  Vec2 on_tag(BoundaryTag tag, const Vec2& x, double t) const;
  Vec2 on_body(const Vec2& x, double t) const;
};

/// Spatially discrete Navier-Stokes operator on the background mesh:
/// residual and Jacobian of the stabilized form A_h^s - L_h at a fixed time,
/// plus the fluid-domain velocity mass matrix. Implements the SpatialProblem
/// interface consumed by the dG slab assembly.
class SpatialOperator : public SpatialProblem {
 public:
  SpatialOperator(const BackgroundMesh& mesh, const TaylorHoodSpace& space,
                  std::shared_ptr<const LevelSet> levelset,
                  FluidParameters params, NitscheConfig nitsche,
                  GhostPenaltyConfig ghost, BoundaryData boundary,
                  int n_threads = 1);

  struct Context;

  int n_dofs() const override;
  Ctx prepare(double t) const override;
  void assemble_mass(const Ctx& ctx, SparseMat& m) const override;
  Vector residual(const Ctx& ctx, const Vector& u) const override;
  void assemble_jacobian(const Ctx& ctx, const Vector& u,
                         SparseMat& k) const override;
  std::vector<int> pinned_dofs() const override;

  /// Pin one pressure DoF per temporal block (pure-Dirichlet gauge). The
  /// discrete mean is still subtracted after each solve.
  void set_pin_pressure_gauge(bool pin) { pin_pressure_ = pin; }

  // Individual residual pieces (bulk semilinear form, Nitsche boundary terms
  // including the data side, ghost penalty, body-force functional). The full
  // residual is volume + nitsche + ghost_penalty - force.
  Vector residual_volume(const Ctx& ctx, const Vector& u) const;
  Vector residual_nitsche(const Ctx& ctx, const Vector& u) const;
  Vector residual_ghost_penalty(const Ctx& ctx, const Vector& u) const;
  Vector force_vector(const Ctx& ctx) const;

  // Point evaluation of the discrete fields (bulk polynomials, so also
  // valid in cut and rigid cells via the extension).
  Vec2 velocity_at(const Vector& u, const Vec2& x) const;
  Mat2 velocity_gradient_at(const Vector& u, const Vec2& x) const;
  double pressure_at(const Vector& u, const Vec2& x) const;
  // Evaluation of a specific cell's polynomial (fluid-side values on cut
  // cells regardless of which side of a face x sits on).
  Vec2 velocity_in_cell(const Vector& u, int cell, const Vec2& x) const;
  Mat2 velocity_gradient_in_cell(const Vector& u, int cell, const Vec2& x) const;
  double pressure_in_cell(const Vector& u, int cell, const Vec2& x) const;

  // Squared L2 errors over the fluid domain at the context's geometry.
  double integrate_velocity_error_sq(const Ctx& ctx, const Vector& u,
                                     const SpaceTimeField& exact,
                                     double t) const;
  double integrate_pressure_error_sq(
      const Ctx& ctx, const Vector& u,
      const std::function<double(const Vec2&, double)>& exact, double t) const;

  double fluid_area(const Ctx& ctx) const;
  double pressure_mean(const Ctx& ctx, const Vector& u) const;
  /// Subtracts the discrete fluid-domain pressure mean in place.
  void normalize_pressure(const Ctx& ctx, Vector& u) const;

  static const Context& context(const Ctx& ctx);
  /// Geometry tables behind a context (classification, cut rules, arcs).
  static const GeometryTables& tables(const Ctx& ctx);
  const BackgroundMesh& mesh() const { return mesh_; }
  const TaylorHoodSpace& space() const { return space_; }
  const LevelSet* level_set() const { return levelset_.get(); }
  const FluidParameters& params() const { return params_; }
  const QuadOrders& orders() const { return orders_; }
  const QkBasis& velocity_basis() const { return vel_basis_; }
  const QkBasis& pressure_basis() const { return pres_basis_; }

 private:
  struct GeomData;
  struct PatternPart;

  std::shared_ptr<const GeomData> geometry_data(double t) const;
  std::shared_ptr<const PatternPart> pattern_for(
      const CellClassification& cls) const;

  enum Parts : unsigned {
    kVolume = 1,
    kNitsche = 2,
    kGhost = 4,
    kForce = 8,
    kAll = kVolume | kNitsche | kGhost | kForce
  };
  Vector assemble_residual(const Ctx& ctx, const Vector& u, unsigned parts) const;

  const BackgroundMesh& mesh_;
  const TaylorHoodSpace& space_;
  std::shared_ptr<const LevelSet> levelset_;
  FluidParameters params_;
  NitscheConfig nitsche_;
  GhostPenaltyConfig ghost_;
  BoundaryData boundary_;
  QuadOrders orders_;
  QkBasis vel_basis_;
  QkBasis pres_basis_;
  int n_threads_;
  bool pin_pressure_ = false;

  // Reference-cell tables shared by all full cells (congruent cells).
  struct ReferenceTables;
  std::shared_ptr<const ReferenceTables> ref_;

  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const GeomData> cached_geom_;
  mutable std::shared_ptr<const PatternPart> cached_pattern_;
};

}  // namespace cutflow

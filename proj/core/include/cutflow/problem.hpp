#pragma once

#include "cutflow/common.hpp"

#include <memory>
#include <vector>

namespace cutflow {

/// Spatial side of the abstract evolution problem d/dt u + A(u) = f, as seen
/// by the dG time-slab assembly. The Navier-Stokes operator implements this;
/// tests drive the slab machinery with scalar surrogates through the same
/// interface.
class SpatialProblem {
 public:
  virtual ~SpatialProblem() = default;

  /// Opaque per-time-instant data (cell classification, quadrature tables,
  /// coupling pattern). Contexts are immutable once built and independent
  /// between time instants.
  using Ctx = std::shared_ptr<const void>;

  virtual int n_dofs() const = 0;
  virtual Ctx prepare(double t) const = 0;

  /// Mass matrix of the time-derivative term at the context's time
  /// (velocity mass over the fluid domain for the flow problem).
  virtual void assemble_mass(const Ctx& ctx, SparseMat& m) const = 0;

  /// Spatial residual A(u) - f at the context's time.
  virtual Vector residual(const Ctx& ctx, const Vector& u) const = 0;

  /// Jacobian of residual(). On the first call K is empty and receives the
  /// coupling pattern; later calls refresh the values in place.
  virtual void assemble_jacobian(const Ctx& ctx, const Vector& u,
                                 SparseMat& k) const = 0;

  /// DoFs whose rows are replaced by identity equations u[d] = 0 in each
  /// temporal block (pressure gauge for pure-Dirichlet problems).
  virtual std::vector<int> pinned_dofs() const { return {}; }
};

}  // namespace cutflow

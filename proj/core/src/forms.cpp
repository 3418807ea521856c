#include "cutflow/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cutflow {

Vec2 BoundaryData::on_tag(BoundaryTag tag, const Vec2& x, double t) const {
  switch (tag) {
    case BoundaryTag::inflow: return inflow ? inflow(x, t) : Vec2(0.0, 0.0);
    case BoundaryTag::wall: return wall ? wall(x, t) : Vec2(0.0, 0.0);
    case BoundaryTag::outflow: break;
  }
  return Vec2(0.0, 0.0);
}

Vec2 BoundaryData::on_body(const Vec2& x, double t) const {
  return body ? body(x, t) : Vec2(0.0, 0.0);
}

// ---------------------------------------------------------------------------
// Precomputed tables
// ---------------------------------------------------------------------------

namespace {

/// Basis values and physical gradients at a list of quadrature points.
struct QuadCache {
  std::vector<double> vel_vals;   // [q * nv + i]
  std::vector<Vec2> vel_grads;    // [q * nv + i]
  std::vector<double> pres_vals;  // [q * np + k]
};

void fill_cache(const QkBasis& vel, const QkBasis& pres, double inv_hx,
                double inv_hy, const std::vector<Vec2>& ref_points,
                QuadCache& cache) {
  const int nv = vel.n_funcs();
  const int np = pres.n_funcs();
  const int nq = static_cast<int>(ref_points.size());
  cache.vel_vals.resize(nq * nv);
  cache.vel_grads.resize(nq * nv);
  cache.pres_vals.resize(nq * np);
  std::vector<Vec2> grads(nv);
  for (int q = 0; q < nq; ++q) {
    vel.eval_all(ref_points[q], &cache.vel_vals[q * nv], grads.data());
    for (int i = 0; i < nv; ++i)
      cache.vel_grads[q * nv + i] = {grads[i].x() * inv_hx,
                                     grads[i].y() * inv_hy};
    pres.eval_all(ref_points[q], &cache.pres_vals[q * np], nullptr);
  }
}

}  // namespace

struct SpatialOperator::ReferenceTables {
  // Shared full-cell volume rule (reference points, physical weights).
  std::vector<Vec2> vol_ref_points;
  std::vector<double> vol_weights;
  QuadCache vol;
  Eigen::MatrixXd vel_mass_local;  // nv x nv, full-cell velocity mass

  // Ghost-penalty patch matrices per face orientation (0: vertical face,
  // neighbor at +x; 1: horizontal face, neighbor at +y). Unscaled; congruent
  // cells make them identical for every patch of an orientation.
  Eigen::MatrixXd gp_vel[2];   // (2 nv) x (2 nv)
  Eigen::MatrixXd gp_pres[2];  // (2 np) x (2 np)
};

namespace {

Eigen::MatrixXd gp_patch_matrix(const QkBasis& basis, int axis, double hx,
                                double hy, int order) {
  const int n = basis.n_funcs();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Rule1D g = gauss_1d(order);
  const double cell_area = hx * hy;
  std::vector<double> v1(n), v2(n);
  Eigen::VectorXd a(2 * n);
  const Vec2 offset = axis == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
  for (int side = 0; side < 2; ++side) {
    for (int qj = 0; qj < order; ++qj) {
      for (int qi = 0; qi < order; ++qi) {
        // Reference point in the frame of the cell that owns this point.
        const Vec2 own(g.points[qi], g.points[qj]);
        const Vec2 ref1 = side == 0 ? own : Vec2(own + offset);
        const Vec2 ref2 = ref1 - offset;
        basis.eval_all(ref1, v1.data(), nullptr);
        basis.eval_all(ref2, v2.data(), nullptr);
        for (int i = 0; i < n; ++i) {
          a(i) = v1[i];
          a(n + i) = -v2[i];
        }
        const double w = g.weights[qi] * g.weights[qj] * cell_area;
        s.noalias() += w * a * a.transpose();
      }
    }
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pattern and per-time geometry data
// ---------------------------------------------------------------------------

struct SpatialOperator::PatternPart {
  std::vector<CellKind> kinds;  // classification this pattern was built for
  SparseMat pattern;            // zero values, coupling structure only
  int n_local = 0;
  std::vector<int> cell_slots;  // [cell * n_local^2 + i * n_local + j]
  struct PatchScatter {
    int face = -1;
    int axis = 0;
    std::vector<int> vx_dofs, vy_dofs, p_dofs;  // global, K1 then K2
    std::vector<int> vx_slots, vy_slots, p_slots;
  };
  std::vector<PatchScatter> patches;
};

struct SpatialOperator::GeomData {
  GeometryTables tables;
  std::vector<QuadCache> cut_vol;   // aligned with tables.cut
  std::vector<QuadCache> cut_arc;   // aligned with tables.cut
  std::vector<QuadCache> faces;     // aligned with tables.dirichlet_faces
  std::shared_ptr<const PatternPart> pat;
};

struct SpatialOperator::Context {
  double time = 0.0;
  std::shared_ptr<const GeomData> geom;
};

const SpatialOperator::Context& SpatialOperator::context(const Ctx& ctx) {
  return *static_cast<const Context*>(ctx.get());
}

const GeometryTables& SpatialOperator::tables(const Ctx& ctx) {
  return context(ctx).geom->tables;
}

SpatialOperator::SpatialOperator(const BackgroundMesh& mesh,
                                 const TaylorHoodSpace& space,
                                 std::shared_ptr<const LevelSet> levelset,
                                 FluidParameters params, NitscheConfig nitsche,
                                 GhostPenaltyConfig ghost, BoundaryData boundary,
                                 int n_threads)
    : mesh_(mesh), space_(space), levelset_(std::move(levelset)),
      params_(std::move(params)), nitsche_(nitsche), ghost_(ghost),
      boundary_(std::move(boundary)),
      orders_(QuadOrders::for_degree(space.velocity.degree())),
      vel_basis_(space.velocity.degree()), pres_basis_(space.pressure.degree()),
      n_threads_(std::max(1, n_threads)) {
  if (params_.nu <= 0.0) throw ConfigError("fluid viscosity must be positive");

  auto ref = std::make_shared<ReferenceTables>();
  const Rule1D g = gauss_1d(orders_.volume);
  const double cell_area = mesh_.hx() * mesh_.hy();
  for (int j = 0; j < orders_.volume; ++j)
    for (int i = 0; i < orders_.volume; ++i) {
      ref->vol_ref_points.emplace_back(g.points[i], g.points[j]);
      ref->vol_weights.push_back(g.weights[i] * g.weights[j] * cell_area);
    }
  fill_cache(vel_basis_, pres_basis_, 1.0 / mesh_.hx(), 1.0 / mesh_.hy(),
             ref->vol_ref_points, ref->vol);

  const int nv = vel_basis_.n_funcs();
  ref->vel_mass_local = Eigen::MatrixXd::Zero(nv, nv);
  for (size_t q = 0; q < ref->vol_ref_points.size(); ++q) {
    const double w = ref->vol_weights[q];
    const double* phi = &ref->vol.vel_vals[q * nv];
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        ref->vel_mass_local(i, j) += w * phi[i] * phi[j];
  }

  for (int axis = 0; axis < 2; ++axis) {
    ref->gp_vel[axis] = gp_patch_matrix(vel_basis_, axis, mesh_.hx(),
                                        mesh_.hy(), orders_.volume);
    ref->gp_pres[axis] = gp_patch_matrix(pres_basis_, axis, mesh_.hx(),
                                         mesh_.hy(), orders_.volume);
  }
  ref_ = std::move(ref);
}

int SpatialOperator::n_dofs() const { return space_.n_total; }

std::vector<int> SpatialOperator::pinned_dofs() const {
  if (!pin_pressure_) return {};
  return {space_.p(0)};
}

std::shared_ptr<const SpatialOperator::PatternPart> SpatialOperator::pattern_for(
    const CellClassification& cls) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cached_pattern_ && cached_pattern_->kinds == cls.kind)
      return cached_pattern_;
  }

  auto pat = std::make_shared<PatternPart>();
  pat->kinds = cls.kind;
  const int nv = vel_basis_.n_funcs();
  const int np = pres_basis_.n_funcs();
  const int n_local = 2 * nv + np;
  pat->n_local = n_local;

  std::vector<int> vel_dofs(nv), pres_dofs(np), dofs(n_local);
  auto gather_dofs = [&](int cell, std::vector<int>& out) {
    space_.velocity.cell_dofs(cell, vel_dofs.data());
    space_.pressure.cell_dofs(cell, pres_dofs.data());
    for (int i = 0; i < nv; ++i) {
      out[i] = space_.vx(vel_dofs[i]);
      out[nv + i] = space_.vy(vel_dofs[i]);
    }
    for (int k = 0; k < np; ++k) out[2 * nv + k] = space_.p(pres_dofs[k]);
  };

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh_.n_cells()) * n_local * n_local +
                cls.stab_faces.size() * (8u * nv * nv + 4u * np * np));
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    gather_dofs(c, dofs);
    for (int a = 0; a < n_local; ++a)
      for (int b = 0; b < n_local; ++b)
        trips.emplace_back(dofs[a], dofs[b], 0.0);
  }

  pat->patches.reserve(cls.stab_faces.size());
  for (int f : cls.stab_faces) {
    const Face& face = mesh_.faces()[f];
    PatternPart::PatchScatter ps;
    ps.face = f;
    ps.axis = face.axis;
    ps.vx_dofs.resize(2 * nv);
    ps.vy_dofs.resize(2 * nv);
    ps.p_dofs.resize(2 * np);
    const int cells[2] = {face.cell_minus, face.cell_plus};
    for (int s = 0; s < 2; ++s) {
      space_.velocity.cell_dofs(cells[s], vel_dofs.data());
      space_.pressure.cell_dofs(cells[s], pres_dofs.data());
      for (int i = 0; i < nv; ++i) {
        ps.vx_dofs[s * nv + i] = space_.vx(vel_dofs[i]);
        ps.vy_dofs[s * nv + i] = space_.vy(vel_dofs[i]);
      }
      for (int k = 0; k < np; ++k) ps.p_dofs[s * np + k] = space_.p(pres_dofs[k]);
    }
    for (const auto* list : {&ps.vx_dofs, &ps.vy_dofs, &ps.p_dofs})
      for (int a : *list)
        for (int b : *list) trips.emplace_back(a, b, 0.0);
    pat->patches.push_back(std::move(ps));
  }

  pat->pattern.resize(space_.n_total, space_.n_total);
  pat->pattern.setFromTriplets(trips.begin(), trips.end());
  pat->pattern.makeCompressed();

  // Slot maps: nnz offsets of every local coupling.
  const SparseMat& p = pat->pattern;
  auto slot_of = [&p](int row, int col) {
    const int* begin = p.innerIndexPtr() + p.outerIndexPtr()[col];
    const int* end = p.innerIndexPtr() + p.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return static_cast<int>(it - p.innerIndexPtr());
  };
  pat->cell_slots.resize(static_cast<size_t>(mesh_.n_cells()) * n_local * n_local);
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    gather_dofs(c, dofs);
    int* slots = &pat->cell_slots[static_cast<size_t>(c) * n_local * n_local];
    for (int a = 0; a < n_local; ++a)
      for (int b = 0; b < n_local; ++b)
        slots[a * n_local + b] = slot_of(dofs[a], dofs[b]);
  }
  for (auto& ps : pat->patches) {
    auto fill = [&](const std::vector<int>& list, std::vector<int>& out) {
      const int n = static_cast<int>(list.size());
      out.resize(static_cast<size_t>(n) * n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out[a * n + b] = slot_of(list[a], list[b]);
    };
    fill(ps.vx_dofs, ps.vx_slots);
    fill(ps.vy_dofs, ps.vy_slots);
    fill(ps.p_dofs, ps.p_slots);
  }

  std::lock_guard<std::mutex> lock(cache_mutex_);
  cached_pattern_ = pat;
  return pat;
}

std::shared_ptr<const SpatialOperator::GeomData> SpatialOperator::geometry_data(
    double t) const {
  const bool stationary = !levelset_ || levelset_->is_stationary();
  if (stationary) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cached_geom_) return cached_geom_;
  }

  auto geom = std::make_shared<GeomData>();
  geom->tables = build_geometry_tables(mesh_, levelset_.get(), t, orders_);
  geom->pat = pattern_for(geom->tables.cls);

  const double inv_hx = 1.0 / mesh_.hx();
  const double inv_hy = 1.0 / mesh_.hy();
  std::vector<Vec2> ref_points;
  auto cache_at = [&](int cell, const Rule2D& rule, QuadCache& cache) {
    ref_points.resize(rule.points.size());
    for (size_t q = 0; q < rule.points.size(); ++q)
      ref_points[q] = mesh_.to_reference(cell, rule.points[q]);
    fill_cache(vel_basis_, pres_basis_, inv_hx, inv_hy, ref_points, cache);
  };

  geom->cut_vol.resize(geom->tables.cut.size());
  geom->cut_arc.resize(geom->tables.cut.size());
  for (size_t i = 0; i < geom->tables.cut.size(); ++i) {
    const CutCellData& data = geom->tables.cut[i];
    cache_at(data.topo.cell, data.volume, geom->cut_vol[i]);
    cache_at(data.topo.cell, data.boundary, geom->cut_arc[i]);
  }
  geom->faces.resize(geom->tables.dirichlet_faces.size());
  for (size_t i = 0; i < geom->tables.dirichlet_faces.size(); ++i) {
    const BoundaryFaceData& data = geom->tables.dirichlet_faces[i];
    cache_at(data.cell, data.rule, geom->faces[i]);
  }

  if (stationary) {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cached_geom_ = geom;
  }
  return geom;
}

SpatialProblem::Ctx SpatialOperator::prepare(double t) const {
  auto ctx = std::make_shared<Context>();
  ctx->time = t;
  ctx->geom = geometry_data(t);
  return ctx;
}

// ---------------------------------------------------------------------------
// Assembly kernels
// ---------------------------------------------------------------------------

namespace {

struct LocalState {
  // Gathered local coefficients.
  Eigen::VectorXd vx, vy, p;
};

void gather_local(const TaylorHoodSpace& space, const Vector& u, int cell,
                  std::vector<int>& vel_dofs, std::vector<int>& pres_dofs,
                  LocalState& loc) {
  const int nv = static_cast<int>(vel_dofs.size());
  const int np = static_cast<int>(pres_dofs.size());
  space.velocity.cell_dofs(cell, vel_dofs.data());
  space.pressure.cell_dofs(cell, pres_dofs.data());
  loc.vx.resize(nv);
  loc.vy.resize(nv);
  loc.p.resize(np);
  for (int i = 0; i < nv; ++i) {
    loc.vx(i) = u[space.vx(vel_dofs[i])];
    loc.vy(i) = u[space.vy(vel_dofs[i])];
  }
  for (int k = 0; k < np; ++k) loc.p(k) = u[space.p(pres_dofs[k])];
}

struct PointState {
  Vec2 v;
  Mat2 g;  // g(c, d) = d v_c / d x_d
  double press;
};

PointState eval_point(const QuadCache& cache, int q, int nv, int np,
                      const LocalState& loc) {
  PointState s;
  s.v.setZero();
  s.g.setZero();
  s.press = 0.0;
  const double* phi = &cache.vel_vals[q * nv];
  const Vec2* dphi = &cache.vel_grads[q * nv];
  for (int i = 0; i < nv; ++i) {
    s.v.x() += loc.vx(i) * phi[i];
    s.v.y() += loc.vy(i) * phi[i];
    s.g(0, 0) += loc.vx(i) * dphi[i].x();
    s.g(0, 1) += loc.vx(i) * dphi[i].y();
    s.g(1, 0) += loc.vy(i) * dphi[i].x();
    s.g(1, 1) += loc.vy(i) * dphi[i].y();
  }
  const double* q_vals = &cache.pres_vals[q * np];
  for (int k = 0; k < np; ++k) s.press += loc.p(k) * q_vals[k];
  return s;
}

}  // namespace

Vector SpatialOperator::assemble_residual(const Ctx& ctx_in, const Vector& u,
                                          unsigned parts) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const double t = ctx.time;
  const double nu = params_.nu;
  const double h = mesh_.h();
  const int nv = vel_basis_.n_funcs();
  const int np = pres_basis_.n_funcs();

  Vector res = Vector::Zero(space_.n_total);
  std::vector<int> vel_dofs(nv), pres_dofs(np);
  LocalState loc;
  Eigen::VectorXd rx(nv), ry(nv), rp(np);

  auto scatter = [&]() {
    for (int i = 0; i < nv; ++i) {
      res[space_.vx(vel_dofs[i])] += rx(i);
      res[space_.vy(vel_dofs[i])] += ry(i);
    }
    for (int k = 0; k < np; ++k) res[space_.p(pres_dofs[k])] += rp(k);
  };

  auto volume_kernel = [&](int cell, const QuadCache& cache,
                           const std::vector<Vec2>& points,
                           const std::vector<double>& weights,
                           bool physical_points) {
    gather_local(space_, u, cell, vel_dofs, pres_dofs, loc);
    rx.setZero();
    ry.setZero();
    rp.setZero();
    const int nq = static_cast<int>(weights.size());
    for (int q = 0; q < nq; ++q) {
      const double w = weights[q];
      const PointState s = eval_point(cache, q, nv, np, loc);
      const double* phi = &cache.vel_vals[q * nv];
      const Vec2* dphi = &cache.vel_grads[q * nv];
      const double* qv = &cache.pres_vals[q * np];
      Vec2 f(0.0, 0.0);
      if ((parts & kForce) && params_.body_force) {
        const Vec2 x = physical_points
                           ? points[q]
                           : mesh_.from_reference(cell, points[q]);
        f = params_.body_force(x, t);
      }
      if (parts & kVolume) {
        const Vec2 conv(s.v.x() * s.g(0, 0) + s.v.y() * s.g(0, 1),
                        s.v.x() * s.g(1, 0) + s.v.y() * s.g(1, 1));
        const double div = s.g(0, 0) + s.g(1, 1);
        for (int i = 0; i < nv; ++i) {
          rx(i) += w * (conv.x() * phi[i] +
                        nu * (s.g(0, 0) * dphi[i].x() + s.g(0, 1) * dphi[i].y()) -
                        s.press * dphi[i].x());
          ry(i) += w * (conv.y() * phi[i] +
                        nu * (s.g(1, 0) * dphi[i].x() + s.g(1, 1) * dphi[i].y()) -
                        s.press * dphi[i].y());
        }
        for (int k = 0; k < np; ++k) rp(k) += w * div * qv[k];
      }
      if ((parts & kForce) && params_.body_force) {
        for (int i = 0; i < nv; ++i) {
          rx(i) -= w * f.x() * phi[i];
          ry(i) -= w * f.y() * phi[i];
        }
      }
    }
    scatter();
  };

  if (parts & (kVolume | kForce)) {
    for (int cell : geom.tables.cls.fluid_cells)
      volume_kernel(cell, ref_->vol, ref_->vol_ref_points, ref_->vol_weights,
                    false);
    for (size_t i = 0; i < geom.tables.cut.size(); ++i) {
      const CutCellData& data = geom.tables.cut[i];
      volume_kernel(data.topo.cell, geom.cut_vol[i], data.volume.points,
                    data.volume.weights, true);
    }
  }

  if (parts & kNitsche) {
    auto nitsche_kernel = [&](int cell, const QuadCache& cache,
                              const std::vector<Vec2>& points,
                              const std::vector<double>& weights,
                              const Vec2* normals, const Vec2* fixed_normal,
                              BoundaryTag tag, bool embedded) {
      gather_local(space_, u, cell, vel_dofs, pres_dofs, loc);
      rx.setZero();
      ry.setZero();
      rp.setZero();
      const int nq = static_cast<int>(weights.size());
      for (int q = 0; q < nq; ++q) {
        const double w = weights[q];
        const Vec2 n = fixed_normal ? *fixed_normal : normals[q];
        const PointState s = eval_point(cache, q, nv, np, loc);
        const Vec2 g = embedded ? boundary_.on_body(points[q], t)
                                : boundary_.on_tag(tag, points[q], t);
        const Vec2 dv = s.v - g;
        const Vec2 grad_n(s.g(0, 0) * n.x() + s.g(0, 1) * n.y(),
                          s.g(1, 0) * n.x() + s.g(1, 1) * n.y());
        const double dv_n = dv.dot(n);
        const double* phi = &cache.vel_vals[q * nv];
        const Vec2* dphi = &cache.vel_grads[q * nv];
        const double* qv = &cache.pres_vals[q * np];
        for (int i = 0; i < nv; ++i) {
          const double dn_phi = dphi[i].x() * n.x() + dphi[i].y() * n.y();
          const double pen = nitsche_.gamma1 * nu / h * phi[i];
          const double pen_n = nitsche_.gamma2 / h * dv_n * phi[i];
          rx(i) += w * ((-nu * grad_n.x() + s.press * n.x()) * phi[i] -
                        dv.x() * nu * dn_phi + pen * dv.x() + pen_n * n.x());
          ry(i) += w * ((-nu * grad_n.y() + s.press * n.y()) * phi[i] -
                        dv.y() * nu * dn_phi + pen * dv.y() + pen_n * n.y());
        }
        for (int k = 0; k < np; ++k) rp(k) -= w * dv_n * qv[k];
      }
      scatter();
    };

    for (size_t i = 0; i < geom.tables.dirichlet_faces.size(); ++i) {
      const BoundaryFaceData& data = geom.tables.dirichlet_faces[i];
      nitsche_kernel(data.cell, geom.faces[i], data.rule.points,
                     data.rule.weights, nullptr, &data.normal, data.tag, false);
    }
    for (size_t i = 0; i < geom.tables.cut.size(); ++i) {
      const CutCellData& data = geom.tables.cut[i];
      nitsche_kernel(data.topo.cell, geom.cut_arc[i], data.boundary.points,
                     data.boundary.weights, data.boundary_normals.data(),
                     nullptr, BoundaryTag::wall, true);
    }
  }

  if (parts & kGhost) {
    const double scale_v = ghost_.gamma_v * (1.0 / nu + nu) *
                           std::pow(h, ghost_.velocity_h_exponent);
    const double scale_p =
        ghost_.gamma_p / nu * std::pow(h, ghost_.pressure_h_exponent);
    Eigen::VectorXd up, rv;
    for (const auto& ps : geom.pat->patches) {
      const Eigen::MatrixXd& sv = ref_->gp_vel[ps.axis];
      const Eigen::MatrixXd& sp = ref_->gp_pres[ps.axis];
      auto apply = [&](const std::vector<int>& dofs, const Eigen::MatrixXd& s,
                       double scale) {
        const int n = static_cast<int>(dofs.size());
        up.resize(n);
        for (int i = 0; i < n; ++i) up(i) = u[dofs[i]];
        rv.noalias() = scale * (s * up);
        for (int i = 0; i < n; ++i) res[dofs[i]] += rv(i);
      };
      apply(ps.vx_dofs, sv, scale_v);
      apply(ps.vy_dofs, sv, scale_v);
      apply(ps.p_dofs, sp, scale_p);
    }
  }

  return res;
}

Vector SpatialOperator::residual(const Ctx& ctx, const Vector& u) const {
  return assemble_residual(ctx, u, kAll);
}

Vector SpatialOperator::residual_volume(const Ctx& ctx, const Vector& u) const {
  return assemble_residual(ctx, u, kVolume);
}

Vector SpatialOperator::residual_nitsche(const Ctx& ctx, const Vector& u) const {
  return assemble_residual(ctx, u, kNitsche);
}

Vector SpatialOperator::residual_ghost_penalty(const Ctx& ctx,
                                               const Vector& u) const {
  return assemble_residual(ctx, u, kGhost);
}

Vector SpatialOperator::force_vector(const Ctx& ctx) const {
  const Vector u = Vector::Zero(space_.n_total);
  return -assemble_residual(ctx, u, kForce);
}

void SpatialOperator::assemble_jacobian(const Ctx& ctx_in, const Vector& u,
                                        SparseMat& k) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const PatternPart& pat = *geom.pat;
  const double nu = params_.nu;
  const double h = mesh_.h();
  const int nv = vel_basis_.n_funcs();
  const int np = pres_basis_.n_funcs();
  const int n_local = pat.n_local;

  if (k.nonZeros() != pat.pattern.nonZeros() ||
      k.rows() != pat.pattern.rows()) {
    k = pat.pattern;
  }
  std::memset(k.valuePtr(), 0, sizeof(double) * k.nonZeros());
  double* vals = k.valuePtr();

  std::vector<int> vel_dofs(nv), pres_dofs(np);
  LocalState loc;
  Eigen::MatrixXd local(n_local, n_local);

  // Local index helpers: vx block [0, nv), vy block [nv, 2nv), p [2nv, ...).
  auto scatter_local = [&](int cell) {
    const int* slots = &pat.cell_slots[static_cast<size_t>(cell) * n_local * n_local];
    for (int a = 0; a < n_local; ++a)
      for (int b = 0; b < n_local; ++b)
        vals[slots[a * n_local + b]] += local(a, b);
  };

  auto volume_kernel = [&](int cell, const QuadCache& cache,
                           const std::vector<double>& weights) {
    gather_local(space_, u, cell, vel_dofs, pres_dofs, loc);
    local.setZero();
    const int nq = static_cast<int>(weights.size());
    for (int q = 0; q < nq; ++q) {
      const double w = weights[q];
      const PointState s = eval_point(cache, q, nv, np, loc);
      const double* phi = &cache.vel_vals[q * nv];
      const Vec2* dphi = &cache.vel_grads[q * nv];
      const double* qv = &cache.pres_vals[q * np];
      for (int i = 0; i < nv; ++i) {
        const double wphi = w * phi[i];
        for (int j = 0; j < nv; ++j) {
          const double visc =
              w * nu * (dphi[j].x() * dphi[i].x() + dphi[j].y() * dphi[i].y());
          const double conv_dv =
              wphi * (s.v.x() * dphi[j].x() + s.v.y() * dphi[j].y());
          const double common = visc + conv_dv;
          local(i, j) += common + wphi * phi[j] * s.g(0, 0);
          local(i, nv + j) += wphi * phi[j] * s.g(0, 1);
          local(nv + i, j) += wphi * phi[j] * s.g(1, 0);
          local(nv + i, nv + j) += common + wphi * phi[j] * s.g(1, 1);
        }
        for (int kk = 0; kk < np; ++kk) {
          local(i, 2 * nv + kk) -= w * qv[kk] * dphi[i].x();
          local(nv + i, 2 * nv + kk) -= w * qv[kk] * dphi[i].y();
          local(2 * nv + kk, i) += w * qv[kk] * dphi[i].x();
          local(2 * nv + kk, nv + i) += w * qv[kk] * dphi[i].y();
        }
      }
    }
    scatter_local(cell);
  };

  for (int cell : geom.tables.cls.fluid_cells)
    volume_kernel(cell, ref_->vol, ref_->vol_weights);
  for (size_t i = 0; i < geom.tables.cut.size(); ++i)
    volume_kernel(geom.tables.cut[i].topo.cell, geom.cut_vol[i],
                  geom.tables.cut[i].volume.weights);

  auto nitsche_kernel = [&](int cell, const QuadCache& cache,
                            const std::vector<double>& weights,
                            const Vec2* normals, const Vec2* fixed_normal) {
    gather_local(space_, u, cell, vel_dofs, pres_dofs, loc);
    local.setZero();
    const int nq = static_cast<int>(weights.size());
    for (int q = 0; q < nq; ++q) {
      const double w = weights[q];
      const Vec2 n = fixed_normal ? *fixed_normal : normals[q];
      const double* phi = &cache.vel_vals[q * nv];
      const Vec2* dphi = &cache.vel_grads[q * nv];
      const double* qv = &cache.pres_vals[q * np];
      for (int i = 0; i < nv; ++i) {
        const double dn_i = dphi[i].x() * n.x() + dphi[i].y() * n.y();
        for (int j = 0; j < nv; ++j) {
          const double dn_j = dphi[j].x() * n.x() + dphi[j].y() * n.y();
          const double sym = w * (-nu) * (dn_j * phi[i] + dn_i * phi[j]);
          const double pen = w * nitsche_.gamma1 * nu / h * phi[i] * phi[j];
          const double pen_n = w * nitsche_.gamma2 / h * phi[i] * phi[j];
          local(i, j) += sym + pen + pen_n * n.x() * n.x();
          local(i, nv + j) += pen_n * n.x() * n.y();
          local(nv + i, j) += pen_n * n.y() * n.x();
          local(nv + i, nv + j) += sym + pen + pen_n * n.y() * n.y();
        }
        for (int kk = 0; kk < np; ++kk) {
          local(i, 2 * nv + kk) += w * qv[kk] * n.x() * phi[i];
          local(nv + i, 2 * nv + kk) += w * qv[kk] * n.y() * phi[i];
          local(2 * nv + kk, i) -= w * qv[kk] * n.x() * phi[i];
          local(2 * nv + kk, nv + i) -= w * qv[kk] * n.y() * phi[i];
        }
      }
    }
    scatter_local(cell);
  };

  for (size_t i = 0; i < geom.tables.dirichlet_faces.size(); ++i) {
    const BoundaryFaceData& data = geom.tables.dirichlet_faces[i];
    nitsche_kernel(data.cell, geom.faces[i], data.rule.weights, nullptr,
                   &data.normal);
  }
  for (size_t i = 0; i < geom.tables.cut.size(); ++i) {
    const CutCellData& data = geom.tables.cut[i];
    nitsche_kernel(data.topo.cell, geom.cut_arc[i], data.boundary.weights,
                   data.boundary_normals.data(), nullptr);
  }

  const double scale_v = ghost_.gamma_v * (1.0 / nu + nu) *
                         std::pow(h, ghost_.velocity_h_exponent);
  const double scale_p =
      ghost_.gamma_p / nu * std::pow(h, ghost_.pressure_h_exponent);
  for (const auto& ps : pat.patches) {
    const Eigen::MatrixXd& sv = ref_->gp_vel[ps.axis];
    const Eigen::MatrixXd& sp = ref_->gp_pres[ps.axis];
    auto apply = [&](const std::vector<int>& slots, const Eigen::MatrixXd& s,
                     double scale) {
      const int n = s.rows();
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) vals[slots[a * n + b]] += scale * s(a, b);
    };
    apply(ps.vx_slots, sv, scale_v);
    apply(ps.vy_slots, sv, scale_v);
    apply(ps.p_slots, sp, scale_p);
  }
}

void SpatialOperator::assemble_mass(const Ctx& ctx_in, SparseMat& m) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const int nv = vel_basis_.n_funcs();
  std::vector<int> vel_dofs(nv);
  std::vector<Triplet> trips;
  trips.reserve((geom.tables.cls.fluid_cells.size() + geom.tables.cut.size()) *
                nv * nv * 2);

  auto add_local = [&](int cell, const Eigen::MatrixXd& m_loc) {
    space_.velocity.cell_dofs(cell, vel_dofs.data());
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) {
        const double v = m_loc(i, j);
        if (v == 0.0) continue;
        trips.emplace_back(space_.vx(vel_dofs[i]), space_.vx(vel_dofs[j]), v);
        trips.emplace_back(space_.vy(vel_dofs[i]), space_.vy(vel_dofs[j]), v);
      }
  };

  for (int cell : geom.tables.cls.fluid_cells)
    add_local(cell, ref_->vel_mass_local);

  Eigen::MatrixXd m_loc(nv, nv);
  for (size_t i = 0; i < geom.tables.cut.size(); ++i) {
    const CutCellData& data = geom.tables.cut[i];
    const QuadCache& cache = geom.cut_vol[i];
    m_loc.setZero();
    for (size_t q = 0; q < data.volume.weights.size(); ++q) {
      const double w = data.volume.weights[q];
      const double* phi = &cache.vel_vals[q * nv];
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) m_loc(a, b) += w * phi[a] * phi[b];
    }
    add_local(data.topo.cell, m_loc);
  }

  m.resize(space_.n_total, space_.n_total);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
}

// ---------------------------------------------------------------------------
// Point evaluation and pressure gauge
// ---------------------------------------------------------------------------

Vec2 SpatialOperator::velocity_at(const Vector& u, const Vec2& x) const {
  return velocity_in_cell(u, mesh_.locate_cell(x), x);
}

Mat2 SpatialOperator::velocity_gradient_at(const Vector& u, const Vec2& x) const {
  return velocity_gradient_in_cell(u, mesh_.locate_cell(x), x);
}

double SpatialOperator::pressure_at(const Vector& u, const Vec2& x) const {
  return pressure_in_cell(u, mesh_.locate_cell(x), x);
}

Vec2 SpatialOperator::velocity_in_cell(const Vector& u, int cell,
                                       const Vec2& x) const {
  const int nv = vel_basis_.n_funcs();
  std::vector<int> dofs(nv);
  space_.velocity.cell_dofs(cell, dofs.data());
  std::vector<double> phi(nv);
  vel_basis_.eval_all(mesh_.to_reference(cell, x), phi.data(), nullptr);
  Vec2 v(0.0, 0.0);
  for (int i = 0; i < nv; ++i) {
    v.x() += u[space_.vx(dofs[i])] * phi[i];
    v.y() += u[space_.vy(dofs[i])] * phi[i];
  }
  return v;
}

Mat2 SpatialOperator::velocity_gradient_in_cell(const Vector& u, int cell,
                                                const Vec2& x) const {
  const int nv = vel_basis_.n_funcs();
  std::vector<int> dofs(nv);
  space_.velocity.cell_dofs(cell, dofs.data());
  std::vector<double> phi(nv);
  std::vector<Vec2> grad(nv);
  vel_basis_.eval_all(mesh_.to_reference(cell, x), phi.data(), grad.data());
  Mat2 g = Mat2::Zero();
  const double inv_hx = 1.0 / mesh_.hx();
  const double inv_hy = 1.0 / mesh_.hy();
  for (int i = 0; i < nv; ++i) {
    const Vec2 d(grad[i].x() * inv_hx, grad[i].y() * inv_hy);
    g(0, 0) += u[space_.vx(dofs[i])] * d.x();
    g(0, 1) += u[space_.vx(dofs[i])] * d.y();
    g(1, 0) += u[space_.vy(dofs[i])] * d.x();
    g(1, 1) += u[space_.vy(dofs[i])] * d.y();
  }
  return g;
}

double SpatialOperator::pressure_in_cell(const Vector& u, int cell,
                                         const Vec2& x) const {
  const int np = pres_basis_.n_funcs();
  std::vector<int> dofs(np);
  space_.pressure.cell_dofs(cell, dofs.data());
  std::vector<double> qv(np);
  pres_basis_.eval_all(mesh_.to_reference(cell, x), qv.data(), nullptr);
  double p = 0.0;
  for (int k = 0; k < np; ++k) p += u[space_.p(dofs[k])] * qv[k];
  return p;
}

double SpatialOperator::integrate_velocity_error_sq(const Ctx& ctx_in,
                                                    const Vector& u,
                                                    const SpaceTimeField& exact,
                                                    double t) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const int nv = vel_basis_.n_funcs();
  std::vector<int> dofs(nv);
  double sum = 0.0;

  auto cell_error = [&](int cell, const QuadCache& cache,
                        const std::vector<Vec2>& points,
                        const std::vector<double>& weights,
                        bool physical_points) {
    space_.velocity.cell_dofs(cell, dofs.data());
    for (size_t q = 0; q < weights.size(); ++q) {
      const double* phi = &cache.vel_vals[q * nv];
      Vec2 v(0.0, 0.0);
      for (int i = 0; i < nv; ++i) {
        v.x() += u[space_.vx(dofs[i])] * phi[i];
        v.y() += u[space_.vy(dofs[i])] * phi[i];
      }
      const Vec2 x =
          physical_points ? points[q] : mesh_.from_reference(cell, points[q]);
      sum += weights[q] * (v - exact(x, t)).squaredNorm();
    }
  };

  for (int cell : geom.tables.cls.fluid_cells)
    cell_error(cell, ref_->vol, ref_->vol_ref_points, ref_->vol_weights, false);
  for (size_t i = 0; i < geom.tables.cut.size(); ++i)
    cell_error(geom.tables.cut[i].topo.cell, geom.cut_vol[i],
               geom.tables.cut[i].volume.points,
               geom.tables.cut[i].volume.weights, true);
  return sum;
}

double SpatialOperator::integrate_pressure_error_sq(
    const Ctx& ctx_in, const Vector& u,
    const std::function<double(const Vec2&, double)>& exact, double t) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const int np = pres_basis_.n_funcs();
  std::vector<int> dofs(np);
  double sum = 0.0;

  auto cell_error = [&](int cell, const QuadCache& cache,
                        const std::vector<Vec2>& points,
                        const std::vector<double>& weights,
                        bool physical_points) {
    space_.pressure.cell_dofs(cell, dofs.data());
    for (size_t q = 0; q < weights.size(); ++q) {
      const double* qv = &cache.pres_vals[q * np];
      double p = 0.0;
      for (int k = 0; k < np; ++k) p += u[space_.p(dofs[k])] * qv[k];
      const Vec2 x =
          physical_points ? points[q] : mesh_.from_reference(cell, points[q]);
      const double diff = p - exact(x, t);
      sum += weights[q] * diff * diff;
    }
  };

  for (int cell : geom.tables.cls.fluid_cells)
    cell_error(cell, ref_->vol, ref_->vol_ref_points, ref_->vol_weights, false);
  for (size_t i = 0; i < geom.tables.cut.size(); ++i)
    cell_error(geom.tables.cut[i].topo.cell, geom.cut_vol[i],
               geom.tables.cut[i].volume.points,
               geom.tables.cut[i].volume.weights, true);
  return sum;
}

double SpatialOperator::fluid_area(const Ctx& ctx_in) const {
  const Context& ctx = context(ctx_in);
  double area = ctx.geom->tables.cls.fluid_cells.size() * mesh_.hx() * mesh_.hy();
  for (const CutCellData& data : ctx.geom->tables.cut)
    area += data.volume.total_weight();
  return area;
}

double SpatialOperator::pressure_mean(const Ctx& ctx_in, const Vector& u) const {
  const Context& ctx = context(ctx_in);
  const GeomData& geom = *ctx.geom;
  const int np = pres_basis_.n_funcs();
  std::vector<int> dofs(np);
  double integral = 0.0;

  for (int cell : geom.tables.cls.fluid_cells) {
    space_.pressure.cell_dofs(cell, dofs.data());
    for (size_t q = 0; q < ref_->vol_weights.size(); ++q) {
      const double* qv = &ref_->vol.pres_vals[q * np];
      double p = 0.0;
      for (int k = 0; k < np; ++k) p += u[space_.p(dofs[k])] * qv[k];
      integral += ref_->vol_weights[q] * p;
    }
  }
  for (size_t i = 0; i < geom.tables.cut.size(); ++i) {
    const CutCellData& data = geom.tables.cut[i];
    space_.pressure.cell_dofs(data.topo.cell, dofs.data());
    const QuadCache& cache = geom.cut_vol[i];
    for (size_t q = 0; q < data.volume.weights.size(); ++q) {
      const double* qv = &cache.pres_vals[q * np];
      double p = 0.0;
      for (int k = 0; k < np; ++k) p += u[space_.p(dofs[k])] * qv[k];
      integral += data.volume.weights[q] * p;
    }
  }
  return integral / fluid_area(ctx_in);
}

void SpatialOperator::normalize_pressure(const Ctx& ctx, Vector& u) const {
  const double mean = pressure_mean(ctx, u);
  u.segment(2 * space_.n_scalar_velocity, space_.n_pressure).array() -= mean;
}

}  // namespace cutflow

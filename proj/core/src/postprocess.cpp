#include "cutflow/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cutflow {

void L2L2Error::add_slab(const SlabRecord& record) {
  const int k = record.basis.degree();
  Vector u(record.nodal.front().size());
  for (size_t mu = 0; mu < record.gauss_points.size(); ++mu) {
    const double t_ref = record.gauss_points[mu];
    const double t = record.t_begin + t_ref * (record.t_end - record.t_begin);
    u.setZero();
    for (int l = 0; l <= k; ++l)
      u += record.basis.value(l, t_ref) * record.nodal[l];
    const double w = record.gauss_weights[mu];
    v_sq_ += w * op_.integrate_velocity_error_sq(record.contexts[mu], u,
                                                 exact_.velocity, t);
    p_sq_ += w * op_.integrate_pressure_error_sq(record.contexts[mu], u,
                                                 exact_.pressure, t);
  }
}

static std::vector<double> eoc_column(const std::vector<double>& errors) {
  std::vector<double> eoc;
  for (size_t i = 1; i < errors.size(); ++i)
    eoc.push_back(std::log2(errors[i - 1] / errors[i]));
  return eoc;
}

std::vector<double> ErrorReport::velocity_eoc() const {
  return eoc_column(velocity_errors);
}

std::vector<double> ErrorReport::pressure_eoc() const {
  return eoc_column(pressure_errors);
}

std::string ErrorReport::to_csv() const {
  std::ostringstream out;
  out << "level,h,tau,velocity_l2l2,velocity_eoc,pressure_l2l2,pressure_eoc\n";
  const auto v_eoc = velocity_eoc();
  const auto p_eoc = pressure_eoc();
  for (size_t i = 0; i < velocity_errors.size(); ++i) {
    out << i << ',' << format_full(h[i]) << ',' << format_full(tau[i]) << ','
        << format_full(velocity_errors[i]) << ',';
    if (i > 0) out << format_full(v_eoc[i - 1]);
    out << ',' << format_full(pressure_errors[i]) << ',';
    if (i > 0) out << format_full(p_eoc[i - 1]);
    out << '\n';
  }
  return out.str();
}

DragLift drag_lift(const SpatialOperator& op, const SpatialProblem::Ctx& ctx,
                   const Vector& u, double l_ref, double u_bar) {
  const GeometryTables& tables = SpatialOperator::tables(ctx);
  if (tables.cut.empty())
    throw GeometryError("drag_lift: no embedded boundary present");
  const double nu = op.params().nu;
  double fd = 0.0, fl = 0.0;
  for (const CutCellData& data : tables.cut) {
    for (size_t q = 0; q < data.boundary.points.size(); ++q) {
      const Vec2& x = data.boundary.points[q];
      const double w = data.boundary.weights[q];
      // Body-outward normal (pointing into the fluid).
      const Vec2 n = -data.boundary_normals[q];
      const Vec2 tangent(n.y(), -n.x());
      const Mat2 g = op.velocity_gradient_in_cell(u, data.topo.cell, x);
      const double p = op.pressure_in_cell(u, data.topo.cell, x);
      // dv_t/dn with the tangential velocity v_t = v . tangent.
      const double dvt_dn = tangent.dot(g * n);
      fd += w * (nu * dvt_dn * n.y() - p * n.x());
      fl -= w * (nu * dvt_dn * n.x() - p * n.y());
    }
  }
  const double scale = 2.0 / (u_bar * u_bar * l_ref);
  return {scale * fd, scale * fl};
}

std::string ForceSeries::to_csv() const {
  std::ostringstream out;
  out << "t,cd,cl\n";
  for (size_t i = 0; i < times.size(); ++i)
    out << format_full(times[i]) << ',' << format_full(cd[i]) << ','
        << format_full(cl[i]) << '\n';
  return out.str();
}

double lift_frequency(const std::vector<double>& times,
                      const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 3)
    throw ConfigError("lift_frequency: need at least three samples");
  std::vector<double> minima;
  for (size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) {
      // Vertex of the parabola through the three bracketing samples.
      const double t0 = times[i - 1], t1 = times[i], t2 = times[i + 1];
      const double f0 = values[i - 1], f1 = values[i], f2 = values[i + 1];
      const double num =
          (t1 - t0) * (t1 - t0) * (f1 - f2) - (t1 - t2) * (t1 - t2) * (f1 - f0);
      const double den = (t1 - t0) * (f1 - f2) - (t1 - t2) * (f1 - f0);
      const double t_min = den != 0.0 ? t1 - 0.5 * num / den : t1;
      minima.push_back(t_min);
    }
  }
  if (minima.size() < 2)
    throw ConfigError("lift_frequency: fewer than two lift minima in series");
  return 1.0 / (minima.back() - minima[minima.size() - 2]);
}

std::vector<CrossSectionSample> sample_cross_section(const SpatialOperator& op,
                                                     const Vector& u, int axis,
                                                     double coordinate,
                                                     int n_samples, double t) {
  if (n_samples < 2)
    throw ConfigError("sample_cross_section: need at least two samples");
  const Rect& extent = op.mesh().extent();
  const double lo = axis == 0 ? extent.x_min : extent.y_min;
  const double hi = axis == 0 ? extent.x_max : extent.y_max;
  std::vector<CrossSectionSample> samples;
  samples.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double s = lo + (hi - lo) * i / (n_samples - 1);
    CrossSectionSample sample;
    sample.position = axis == 0 ? Vec2(s, coordinate) : Vec2(coordinate, s);
    sample.velocity = op.velocity_at(u, sample.position);
    sample.pressure = op.pressure_at(u, sample.position);
    sample.rigid = op.level_set() != nullptr &&
                   op.level_set()->value(sample.position, t) < 0.0;
    samples.push_back(sample);
  }
  return samples;
}

std::string cross_section_csv(const std::vector<CrossSectionSample>& samples) {
  std::ostringstream out;
  out << "x,y,vx,vy,p,region\n";
  for (const CrossSectionSample& s : samples) {
    out << format_full(s.position.x()) << ',' << format_full(s.position.y())
        << ',' << format_full(s.velocity.x()) << ','
        << format_full(s.velocity.y()) << ',' << format_full(s.pressure) << ','
        << (s.rigid ? "rigid" : "fluid") << '\n';
  }
  return out.str();
}

void export_fields(const SpatialOperator& op, const SpatialProblem::Ctx& ctx,
                   const Vector& u, const std::string& path) {
  const BackgroundMesh& mesh = op.mesh();
  const GeometryTables& tables = SpatialOperator::tables(ctx);
  std::ofstream out(path);
  if (!out) throw IoError("export_fields: cannot open " + path);

  out << "# cutflow rectilinear field export\n";
  out << "# nodes " << mesh.n_cells_x() + 1 << ' ' << mesh.n_cells_y() + 1
      << '\n';
  out << "# cells " << mesh.n_cells_x() << ' ' << mesh.n_cells_y() << '\n';
  out << "NODES x,y,vx,vy,p\n";
  for (int j = 0; j <= mesh.n_cells_y(); ++j) {
    for (int i = 0; i <= mesh.n_cells_x(); ++i) {
      const Vec2 x(mesh.extent().x_min + i * mesh.hx(),
                   mesh.extent().y_min + j * mesh.hy());
      const Vec2 v = op.velocity_at(u, x);
      const double p = op.pressure_at(u, x);
      out << format_full(x.x()) << ',' << format_full(x.y()) << ','
          << format_full(v.x()) << ',' << format_full(v.y()) << ','
          << format_full(p) << '\n';
    }
  }
  out << "CELLS i,j,classification\n";
  for (int j = 0; j < mesh.n_cells_y(); ++j) {
    for (int i = 0; i < mesh.n_cells_x(); ++i) {
      const CellKind kind = tables.cls.kind[mesh.cell_index(i, j)];
      const char* name = kind == CellKind::fluid
                             ? "fluid"
                             : (kind == CellKind::rigid ? "rigid" : "cut");
      out << i << ',' << j << ',' << name << '\n';
    }
  }
  if (!out) throw IoError("export_fields: write failed for " + path);
}

SpeedExtrema max_nodal_speeds(const SpatialOperator& op,
                              const SpatialProblem::Ctx& ctx, const Vector& u) {
  const GeometryTables& tables = SpatialOperator::tables(ctx);
  const TaylorHoodSpace& space = op.space();
  const int nv = op.velocity_basis().n_funcs();
  std::vector<int> dofs(nv);
  SpeedExtrema extrema;
  for (int c = 0; c < op.mesh().n_cells(); ++c) {
    const CellKind kind = tables.cls.kind[c];
    if (kind == CellKind::cut) continue;
    space.velocity.cell_dofs(c, dofs.data());
    double m = 0.0;
    for (int i = 0; i < nv; ++i) {
      const double vx = u[space.vx(dofs[i])];
      const double vy = u[space.vy(dofs[i])];
      m = std::max(m, std::hypot(vx, vy));
    }
    if (kind == CellKind::fluid)
      extrema.fluid = std::max(extrema.fluid, m);
    else
      extrema.rigid = std::max(extrema.rigid, m);
  }
  return extrema;
}

}  // namespace cutflow

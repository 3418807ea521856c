#include "cutflow/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cutflow {

double Rule1D::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double Rule2D::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Rule1D gauss_1d(int m) {
  if (m < 1) throw ConfigError("gauss_1d: need at least one point");
  Rule1D rule;
  rule.points.resize(m);
  rule.weights.resize(m);
  if (m == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
    return rule;
  }
  // Golub-Welsch on the Legendre Jacobi matrix.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  for (int i = 0; i < m; ++i) {
    rule.points[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;  // 2*v0^2 on [-1,1], halved by the map
  }
  return rule;
}

Rule1D gauss_radau_right_1d(int s) {
  if (s < 1) throw ConfigError("gauss_radau_right_1d: need at least one point");
  Rule1D rule;
  rule.points.resize(s);
  rule.weights.resize(s);
  if (s == 1) {
    rule.points[0] = 1.0;
    rule.weights[0] = 1.0;
    return rule;
  }
  // Interior nodes are the roots of the Jacobi polynomial P_{s-1}^{(1,0)}
  // mapped from [-1,1] to [0,1]; the right endpoint is appended.
  const int n = s - 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J(0, 0) = -1.0 / 3.0;
  for (int k = 1; k < n; ++k) {
    J(k, k) = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    const double b = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  for (int i = 0; i < n; ++i) rule.points[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
  rule.points[n] = 1.0;

  // Weights from the moment conditions sum_i w_i x_i^j = 1/(j+1).
  Eigen::MatrixXd V(s, s);
  Eigen::VectorXd moments(s);
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) V(j, i) = std::pow(rule.points[i], j);
    moments(j) = 1.0 / (j + 1.0);
  }
  Eigen::VectorXd w = V.fullPivLu().solve(moments);
  for (int i = 0; i < s; ++i) rule.weights[i] = w(i);
  return rule;
}

Rule2D full_cell_quadrature(const Rect& cell, int m) {
  const Rule1D g = gauss_1d(m);
  Rule2D rule;
  rule.points.reserve(m * m);
  rule.weights.reserve(m * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      rule.points.emplace_back(cell.x_min + g.points[i] * cell.width(),
                               cell.y_min + g.points[j] * cell.height());
      rule.weights.push_back(g.weights[i] * g.weights[j] * cell.area());
    }
  }
  return rule;
}

Rule2D segment_quadrature(const Vec2& a, const Vec2& b, int m) {
  const Rule1D g = gauss_1d(m);
  const double len = (b - a).norm();
  Rule2D rule;
  rule.points.reserve(m);
  rule.weights.reserve(m);
  for (int i = 0; i < m; ++i) {
    rule.points.emplace_back(a + g.points[i] * (b - a));
    rule.weights.push_back(g.weights[i] * len);
  }
  return rule;
}

namespace {

struct Interval {
  double lo, hi;
};

/// Fluid sub-intervals (theta > 0) of the segment along the inner axis at
/// fixed outer coordinate. The circle path is analytic; generic level sets
/// use sampling plus bisection.
void fluid_intervals(const LevelSet& geom, double t,
                     const std::optional<Circle>& circle, int outer_axis,
                     double outer, double lo, double hi, int n_probe,
                     std::vector<Interval>& out) {
  out.clear();
  if (circle) {
    const double co = outer_axis == 0 ? circle->center.x() : circle->center.y();
    const double ci = outer_axis == 0 ? circle->center.y() : circle->center.x();
    const double d = outer - co;
    const double r2 = circle->radius * circle->radius - d * d;
    if (r2 <= 0.0) {
      out.push_back({lo, hi});
      return;
    }
    const double s = std::sqrt(r2);
    const double a = std::max(lo, ci - s);
    const double b = std::min(hi, ci + s);
    if (b <= a) {
      out.push_back({lo, hi});
      return;
    }
    if (a > lo) out.push_back({lo, a});
    if (b < hi) out.push_back({b, hi});
    return;
  }

  auto point = [&](double v) {
    return outer_axis == 0 ? Vec2(outer, v) : Vec2(v, outer);
  };
  auto theta = [&](double v) { return geom.value(point(v), t); };

  const int n = std::max(n_probe, 8);
  std::vector<double> breaks;
  double prev_v = lo;
  double prev_f = theta(lo);
  for (int i = 1; i <= n; ++i) {
    const double v = lo + (hi - lo) * i / n;
    const double f = theta(v);
    if ((f < 0.0) != (prev_f < 0.0)) {
      double a = prev_v, b = v, fa = prev_f;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = theta(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      breaks.push_back(0.5 * (a + b));
    }
    prev_v = v;
    prev_f = f;
  }
  double start = lo;
  bool in_fluid = theta(lo + 1e-14 * (hi - lo)) > 0.0;
  for (double brk : breaks) {
    if (in_fluid && brk > start) out.push_back({start, brk});
    start = brk;
    in_fluid = !in_fluid;
  }
  if (in_fluid && hi > start) out.push_back({start, hi});
}

}  // namespace

Rule2D cut_cell_quadrature(const BackgroundMesh& mesh,
                           const CutCellGeometry& geo, const LevelSet& geom,
                           int m1, int m2) {
  if (m1 < 1 || m2 < 1)
    throw ConfigError("cut_cell_quadrature: orders must be positive");
  const Rect cell = mesh.cell_rect(geo.cell);
  const double t = geo.time;
  const auto circle = geom.circle_at(t);

  // Fluid length of each straight edge {bottom, right, top, left}: full if
  // both corners are fluid, the fluid part if the edge carries a cut vertex.
  double edge_fluid[4] = {0.0, 0.0, 0.0, 0.0};
  constexpr int corner_a[4] = {0, 1, 3, 2};
  constexpr int corner_b[4] = {1, 3, 2, 0};
  for (int e = 0; e < 4; ++e) {
    const bool fa = geo.fluid_corner[corner_a[e]];
    const bool fb = geo.fluid_corner[corner_b[e]];
    const Vec2 pa = cell.corner(corner_a[e]);
    const Vec2 pb = cell.corner(corner_b[e]);
    if (fa && fb) {
      edge_fluid[e] = (pb - pa).norm();
    } else if (fa || fb) {
      const Vec2 fluid_end = fa ? pa : pb;
      for (int q = 0; q < 2; ++q)
        if (geo.edges[q] == e)
          edge_fluid[e] = (geo.points[q] - fluid_end).norm();
    }
  }
  const double x_len = std::max(edge_fluid[0], edge_fluid[2]);
  const double y_len = std::max(edge_fluid[1], edge_fluid[3]);
  int outer_axis = (x_len >= y_len) ? 0 : 1;  // ties toward x

  // A circle extremal point inside the cell makes the inner limits of the
  // slicing across it non-smooth; slice the other way in that case.
  if (circle) {
    const Circle& c = *circle;
    auto strictly_inside = [&](const Vec2& p) {
      return p.x() > cell.x_min && p.x() < cell.x_max && p.y() > cell.y_min &&
             p.y() < cell.y_max;
    };
    const bool x_extremal =
        strictly_inside({c.center.x() - c.radius, c.center.y()}) ||
        strictly_inside({c.center.x() + c.radius, c.center.y()});
    const bool y_extremal =
        strictly_inside({c.center.x(), c.center.y() - c.radius}) ||
        strictly_inside({c.center.x(), c.center.y() + c.radius});
    if (x_extremal) outer_axis = 1;
    if (y_extremal) outer_axis = 0;
  }

  const double out_lo = outer_axis == 0 ? cell.x_min : cell.y_min;
  const double out_hi = outer_axis == 0 ? cell.x_max : cell.y_max;
  const double in_lo = outer_axis == 0 ? cell.y_min : cell.x_min;
  const double in_hi = outer_axis == 0 ? cell.y_max : cell.x_max;

  // Strip boundaries: cut vertices and, for circles, extremal coordinates.
  std::vector<double> cuts = {out_lo, out_hi};
  for (const Vec2& p : geo.points)
    cuts.push_back(outer_axis == 0 ? p.x() : p.y());
  if (circle) {
    const double co =
        outer_axis == 0 ? circle->center.x() : circle->center.y();
    cuts.push_back(co - circle->radius);
    cuts.push_back(co + circle->radius);
  }
  std::sort(cuts.begin(), cuts.end());
  const double merge_tol = 1e-13 * mesh.h();

  const Rule1D g_outer = gauss_1d(m1);
  const Rule1D g_inner = gauss_1d(m2);
  Rule2D rule;
  std::vector<Interval> intervals;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = std::clamp(cuts[s], out_lo, out_hi);
    const double b = std::clamp(cuts[s + 1], out_lo, out_hi);
    if (b - a <= merge_tol) continue;
    for (int i = 0; i < m1; ++i) {
      const double outer = a + g_outer.points[i] * (b - a);
      const double w_outer = g_outer.weights[i] * (b - a);
      fluid_intervals(geom, t, circle, outer_axis, outer, in_lo, in_hi,
                      2 * m2, intervals);
      for (const Interval& iv : intervals) {
        const double len = iv.hi - iv.lo;
        if (len <= 0.0) continue;
        for (int j = 0; j < m2; ++j) {
          const double inner = iv.lo + g_inner.points[j] * len;
          rule.points.emplace_back(outer_axis == 0 ? Vec2(outer, inner)
                                                   : Vec2(inner, outer));
          rule.weights.push_back(w_outer * g_inner.weights[j] * len);
        }
      }
    }
  }
  if (rule.points.empty())
    throw GeometryError("cut_cell_quadrature: empty fluid portion in cell " +
                        std::to_string(geo.cell));
  return rule;
}

Rule2D embedded_boundary_quadrature(const BackgroundMesh& mesh,
                                    const CutCellGeometry& geo,
                                    const LevelSet& geom, int m) {
  if (m < 1)
    throw ConfigError("embedded_boundary_quadrature: order must be positive");
  const double t = geo.time;
  const Rect cell = mesh.cell_rect(geo.cell);
  const auto circle = geom.circle_at(t);
  const Rule1D g = gauss_1d(m);
  Rule2D rule;
  rule.points.reserve(m);
  rule.weights.reserve(m);

  if (circle) {
    const Circle& c = *circle;
    const double phi1 = std::atan2(geo.points[0].y() - c.center.y(),
                                   geo.points[0].x() - c.center.x());
    double phi2 = std::atan2(geo.points[1].y() - c.center.y(),
                             geo.points[1].x() - c.center.x());
    // Candidate arcs phi1 -> phi2, counterclockwise or clockwise; keep the
    // one running through the cell.
    if (phi2 < phi1) phi2 += 2.0 * M_PI;
    const double span_ccw = phi2 - phi1;
    auto arc_point = [&](double phi) {
      return Vec2(c.center.x() + c.radius * std::cos(phi),
                  c.center.y() + c.radius * std::sin(phi));
    };
    const Vec2 mid_ccw = arc_point(phi1 + 0.5 * span_ccw);
    const Vec2 mid_cw = arc_point(phi1 + 0.5 * span_ccw - M_PI);
    double start = phi1, span = span_ccw;
    if (!cell.contains(mid_ccw) && cell.contains(mid_cw)) {
      start = phi2;
      span = 2.0 * M_PI - span_ccw;
    } else if (cell.contains(mid_ccw) && cell.contains(mid_cw)) {
      if (2.0 * M_PI - span_ccw < span_ccw) {
        start = phi2;
        span = 2.0 * M_PI - span_ccw;
      }
    }
    for (int i = 0; i < m; ++i) {
      const double phi = start + g.points[i] * span;
      rule.points.push_back(arc_point(phi));
      rule.weights.push_back(g.weights[i] * span * c.radius);
    }
    return rule;
  }

  // Generic level set: project chord points onto the zero level set along
  // the gradient; arc-length factor by central differences.
  const Vec2 a = geo.points[0];
  const Vec2 b = geo.points[1];
  auto project = [&](Vec2 x) {
    for (int it = 0; it < 30; ++it) {
      const double f = geom.value(x, t);
      if (std::abs(f) < 1e-14 * mesh.h()) break;
      const Vec2 gr = geom.gradient(x, t);
      const double n2 = gr.squaredNorm();
      if (n2 < 1e-24) break;
      x -= (f / n2) * gr;
    }
    return x;
  };
  auto curve = [&](double s) { return project(a + s * (b - a)); };
  const double ds = 1e-6;
  for (int i = 0; i < m; ++i) {
    const double s = g.points[i];
    const Vec2 p = curve(s);
    const double sl = std::max(s - ds, 0.0);
    const double sr = std::min(s + ds, 1.0);
    const Vec2 dp = (curve(sr) - curve(sl)) / (sr - sl);
    rule.points.push_back(p);
    rule.weights.push_back(g.weights[i] * dp.norm());
  }
  return rule;
}

}  // namespace cutflow

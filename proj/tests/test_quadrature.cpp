#include "cutflow/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cutflow;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("gauss rules") {
  SUBCASE("midpoint rule") {
    const Rule1D g = gauss_1d(1);
    CHECK(g.points[0] == doctest::Approx(0.5));
    CHECK(g.weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("two-point nodes and weights") {
    const Rule1D g = gauss_1d(2);
    CHECK(g.points[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(g.points[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(g.weights[0] == doctest::Approx(0.5));
    CHECK(g.weights[1] == doctest::Approx(0.5));
    double cubic = 0.0;
    for (int i = 0; i < 2; ++i) cubic += g.weights[i] * std::pow(g.points[i], 3);
    CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("errors") { CHECK_THROWS_AS(gauss_1d(0), ConfigError); }
  SUBCASE("moment exactness up to 2M-1") {
    for (int m = 1; m <= 8; ++m) {
      const Rule1D g = gauss_1d(m);
      for (int j = 0; j <= 2 * m - 1; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += g.weights[i] * std::pow(g.points[i], j);
        CHECK(s == doctest::Approx(1.0 / (j + 1)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("right gauss-radau rules") {
  SUBCASE("single point") {
    const Rule1D g = gauss_radau_right_1d(1);
    CHECK(g.points[0] == doctest::Approx(1.0));
    CHECK(g.weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("two points") {
    const Rule1D g = gauss_radau_right_1d(2);
    CHECK(g.points[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(g.points[1] == doctest::Approx(1.0));
    CHECK(g.weights[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(g.weights[1] == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("three points include (4 -+ sqrt 6)/10") {
    const Rule1D g = gauss_radau_right_1d(3);
    CHECK(g.points[0] == doctest::Approx((4.0 - std::sqrt(6.0)) / 10.0).epsilon(1e-13));
    CHECK(g.points[1] == doctest::Approx((4.0 + std::sqrt(6.0)) / 10.0).epsilon(1e-13));
    CHECK(g.points[2] == doctest::Approx(1.0));
  }
  SUBCASE("errors") { CHECK_THROWS_AS(gauss_radau_right_1d(0), ConfigError); }
  SUBCASE("moment exactness up to 2s-2 and endpoint") {
    for (int s = 1; s <= 6; ++s) {
      const Rule1D g = gauss_radau_right_1d(s);
      CHECK(g.points.back() == doctest::Approx(1.0).epsilon(1e-14));
      for (int j = 0; j <= 2 * s - 2; ++j) {
        double sum = 0.0;
        for (int i = 0; i < s; ++i)
          sum += g.weights[i] * std::pow(g.points[i], j);
        CHECK(sum == doctest::Approx(1.0 / (j + 1)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("full cell tensor rules") {
  const Rect cell{0, 1, 0, 1};
  SUBCASE("area") {
    CHECK(full_cell_quadrature(cell, 2).total_weight() == doctest::Approx(1.0));
  }
  SUBCASE("separable integral of xy") {
    const Rule2D rule = full_cell_quadrature(cell, 2);
    double s = 0.0;
    for (size_t i = 0; i < rule.points.size(); ++i)
      s += rule.weights[i] * rule.points[i].x() * rule.points[i].y();
    CHECK(s == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("x^4 needs three points per direction") {
    auto integrate = [&](int m) {
      const Rule2D rule = full_cell_quadrature(cell, m);
      double s = 0.0;
      for (size_t i = 0; i < rule.points.size(); ++i)
        s += rule.weights[i] * std::pow(rule.points[i].x(), 4);
      return s;
    };
    CHECK(std::abs(integrate(2) - 0.2) > 1e-6);
    CHECK(integrate(3) == doctest::Approx(0.2).epsilon(1e-14));
  }
}

namespace {

AnalyticLevelSet linear_level_set(double a, double b, double c) {
  return AnalyticLevelSet(
      [a, b, c](const Vec2& x) { return a * x.x() + b * x.y() + c; },
      [a, b](const Vec2&) { return Vec2(a, b); });
}

double integrate(const Rule2D& rule, const std::function<double(const Vec2&)>& f) {
  double s = 0.0;
  for (size_t i = 0; i < rule.points.size(); ++i)
    s += rule.weights[i] * f(rule.points[i]);
  return s;
}

}  // namespace

TEST_CASE("cut cell quadrature on straight cuts") {
  const BackgroundMesh mesh({0, 1, 0, 1}, 1, 1);

  SUBCASE("half cell area and first moment") {
    const auto ls = linear_level_set(1, 0, -0.5);  // fluid = x > 0.5
    const auto geo = cut_topology(mesh, 0, ls, 0.0);
    const Rule2D rule = cut_cell_quadrature(mesh, geo, ls, 2, 2);
    CHECK(rule.total_weight() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(integrate(rule, [](const Vec2& x) { return x.x(); }) ==
          doctest::Approx(0.375).epsilon(1e-13));
    for (const Vec2& p : rule.points) CHECK(ls.value(p, 0.0) > 0.0);
  }

  SUBCASE("pentagon with strip split") {
    const auto ls = linear_level_set(1, 1, -0.5);  // fluid = x + y > 0.5
    const auto geo = cut_topology(mesh, 0, ls, 0.0);
    CHECK(geo.archetype == CutArchetype::pentagon);
    const Rule2D rule = cut_cell_quadrature(mesh, geo, ls, 3, 3);
    CHECK(rule.total_weight() == doctest::Approx(0.875).epsilon(1e-13));
  }

  SUBCASE("random linear cuts integrate Q3 exactly at order 4") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> offset(0.2, 0.8);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    int used = 0;
    for (int trial = 0; used < 100 && trial < 10000; ++trial) {
      const double phi = angle(rng);
      const double a = std::cos(phi), b = std::sin(phi);
      const Vec2 anchor(offset(rng), offset(rng));
      const double c = -(a * anchor.x() + b * anchor.y());
      const auto ls = linear_level_set(a, b, c);
      CellClassification cls;
      try {
        cls = classify_cells(mesh, ls, 0.0);
      } catch (const GeometryError&) {
        continue;  // degenerate corner grazing
      }
      if (cls.cut_cells.size() != 1) continue;
      ++used;
      const auto geo = cut_topology(mesh, 0, ls, 0.0);
      const Rule2D rule = cut_cell_quadrature(mesh, geo, ls, 4, 4);
      // Random Q3 polynomial; the oracle integrates column-wise analytically:
      // int x^i y^j over {theta > 0} computed by 1D slicing with exact inner
      // antiderivatives against linear limits, at high outer order.
      double cij[4][4];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cij[i][j] = coeff(rng);
      auto poly = [&](const Vec2& x) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            s += cij[i][j] * std::pow(x.x(), i) * std::pow(x.y(), j);
        return s;
      };
      // Oracle: subdivide x at the cut vertices, Gauss(12) per strip in x,
      // exact antiderivative in y over the fluid interval.
      const auto inner_exact = [&](double x) {
        // Fluid y-interval(s) of the column at abscissa x.
        double lo = 0.0, hi = 1.0;
        if (std::abs(b) > 1e-14) {
          const double y_star = -(a * x + c) / b;
          if (b > 0)
            lo = std::clamp(y_star, 0.0, 1.0);
          else
            hi = std::clamp(y_star, 0.0, 1.0);
        } else if (a * x + c <= 0.0) {
          return 0.0;
        }
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            s += cij[i][j] * std::pow(x, i) *
                 (std::pow(hi, j + 1) - std::pow(lo, j + 1)) / (j + 1);
        return s;
      };
      std::vector<double> splits = {0.0, 1.0};
      for (const Vec2& p : geo.points) splits.push_back(p.x());
      std::sort(splits.begin(), splits.end());
      const Rule1D g12 = gauss_1d(12);
      double exact = 0.0;
      for (size_t s = 0; s + 1 < splits.size(); ++s) {
        const double w = splits[s + 1] - splits[s];
        if (w <= 0) continue;
        for (int q = 0; q < 12; ++q)
          exact += w * g12.weights[q] * inner_exact(splits[s] + w * g12.points[q]);
      }
      CHECK(integrate(rule, poly) == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(used == 100);
  }
}

TEST_CASE("embedded boundary quadrature") {
  const BackgroundMesh mesh({0, 1, 0, 1}, 1, 1);

  SUBCASE("straight cut has segment length and degree-1 exactness") {
    const auto ls = linear_level_set(1, 0, -0.5);
    const auto geo = cut_topology(mesh, 0, ls, 0.0);
    const Rule2D rule = embedded_boundary_quadrature(mesh, geo, ls, 2);
    CHECK(rule.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    // Linear function along the segment: midpoint value times length.
    const double integral = integrate(rule, [](const Vec2& x) { return x.y(); });
    CHECK(integral == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("quarter circle arc length") {
    CircleLevelSet circle(RigidMotion::stationary({0.0, 0.0}, 0.2), true);
    const auto geo = cut_topology(mesh, 0, circle, 0.0);
    const Rule2D rule = embedded_boundary_quadrature(mesh, geo, circle, 20);
    CHECK(rule.total_weight() ==
          doctest::Approx(M_PI * 0.2 / 2.0).epsilon(1e-8));
    for (const Vec2& p : rule.points)
      CHECK(std::abs(circle.value(p, 0.0)) < 1e-9 * mesh.h());
  }
}

TEST_CASE("cut area conservation around a circle") {
  // Circle strictly inside; fluid cell areas + cut fluid portions must sum
  // to |domain| - pi rho^2.
  const BackgroundMesh mesh({0, 3, -0.5, 0.5}, 96, 32);
  CircleLevelSet circle(RigidMotion::harmonic_x({1.545, 0.0}, 0.8, 0.2, 0.2));
  for (double t : {0.0, 1.7, 6.4}) {
    const CellClassification cls = classify_cells(mesh, circle, t);
    double area = cls.fluid_cells.size() * mesh.hx() * mesh.hy();
    for (int c : cls.cut_cells) {
      const auto geo = cut_topology(mesh, c, circle, t);
      area += cut_cell_quadrature(mesh, geo, circle, 4, 4).total_weight();
    }
    CHECK(area == doctest::Approx(3.0 - M_PI * 0.04).epsilon(1e-8 / 3.0));
  }
}

TEST_SUITE_END();

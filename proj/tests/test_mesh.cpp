#include "cutflow/fe_space.hpp"
#include "cutflow/mesh.hpp"

#include <doctest.h>

#include <random>

using namespace cutflow;

TEST_SUITE_BEGIN("mesh");

TEST_CASE("unit square 2x2: cells, faces, h") {
  const BackgroundMesh mesh({0, 1, 0, 1}, 2, 2);
  CHECK(mesh.n_cells() == 4);
  CHECK(mesh.faces().size() == 12);
  CHECK(mesh.interior_faces().size() == 4);
  CHECK(mesh.boundary_faces().size() == 8);
  CHECK(mesh.h() == doctest::Approx(0.5));
}

TEST_CASE("pipe 3x1: congruent square cells") {
  const BackgroundMesh mesh({0, 3, 0, 1}, 3, 1);
  CHECK(mesh.n_cells() == 3);
  CHECK(mesh.hx() == doctest::Approx(1.0));
  CHECK(mesh.hy() == doctest::Approx(1.0));
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(BackgroundMesh({0, 1, 0, 1}, 0, 2), ConfigError);
  CHECK_THROWS_AS(BackgroundMesh({0, 0, 0, 1}, 1, 1), ConfigError);
  CHECK_THROWS_AS(build_taylor_hood(BackgroundMesh({0, 1, 0, 1}, 2, 2), 1),
                  ConfigError);
}

TEST_CASE("taylor-hood dof counts") {
  const BackgroundMesh mesh({0, 1, 0, 1}, 2, 2);
  const TaylorHoodSpace space = build_taylor_hood(mesh, 2);
  CHECK(space.velocity.n_dofs() == 25);
  CHECK(space.pressure.n_dofs() == 9);
  CHECK(space.n_total == 59);

  const BackgroundMesh single({0, 1, 0, 1}, 1, 1);
  CHECK(build_taylor_hood(single, 2).n_total == 22);
}

TEST_CASE("dof count formula for random meshes and degrees") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> cells(1, 9), degree(1, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const int nx = cells(rng), ny = cells(rng), r = degree(rng);
    const BackgroundMesh mesh({0, 1, 0, 2}, nx, ny);
    const DofMap map(mesh, r);
    CHECK(map.n_dofs() == (r * nx + 1) * (r * ny + 1));
  }
}

TEST_CASE("face adjacency is symmetric and complete") {
  const BackgroundMesh mesh({0, 2, 0, 1}, 4, 3);
  for (int f = 0; f < static_cast<int>(mesh.faces().size()); ++f) {
    const Face& face = mesh.faces()[f];
    if (face.is_boundary()) {
      CHECK((face.cell_minus >= 0) != (face.cell_plus >= 0));
      continue;
    }
    // Both neighbors list this face among their four sides.
    for (int cell : {face.cell_minus, face.cell_plus}) {
      const auto sides = mesh.cell_faces(cell);
      CHECK(std::count(sides.begin(), sides.end(), f) == 1);
    }
  }
  // Every cell's four sides reference the cell back.
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int f : mesh.cell_faces(c)) {
      const Face& face = mesh.faces()[f];
      CHECK((face.cell_minus == c || face.cell_plus == c));
    }
}

TEST_CASE("global interpolant reproduces Q_r polynomials") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r : {1, 2, 3}) {
    const BackgroundMesh mesh({0, 1, 0, 1}, 3, 2);
    const DofMap map(mesh, r);
    const QkBasis basis(r);
    // Random polynomial in Q_r, evaluated via tensor monomials.
    std::vector<double> c((r + 1) * (r + 1));
    for (double& v : c) v = coeff(rng);
    auto poly = [&](const Vec2& x) {
      double s = 0.0;
      int idx = 0;
      for (int b = 0; b <= r; ++b)
        for (int a = 0; a <= r; ++a)
          s += c[idx++] * std::pow(x.x(), a) * std::pow(x.y(), b);
      return s;
    };
    // Nodal interpolation.
    std::vector<double> u(map.n_dofs());
    for (int g = 0; g < map.n_dofs(); ++g) u[g] = poly(map.node_position(g));
    // Evaluate the interpolant at random points.
    std::vector<int> dofs(map.n_local());
    std::vector<double> phi(basis.n_funcs());
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 x(unit(rng), unit(rng));
      const int cell = mesh.locate_cell(x);
      map.cell_dofs(cell, dofs.data());
      basis.eval_all(mesh.to_reference(cell, x), phi.data(), nullptr);
      double s = 0.0;
      for (int i = 0; i < basis.n_funcs(); ++i) s += u[dofs[i]] * phi[i];
      CHECK(s == doctest::Approx(poly(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("shared-face dofs coincide") {
  const BackgroundMesh mesh({0, 1, 0, 1}, 2, 1);
  const DofMap map(mesh, 2);
  std::vector<int> left(map.n_local()), right(map.n_local());
  map.cell_dofs(0, left.data());
  map.cell_dofs(1, right.data());
  // Right edge of cell 0 equals left edge of cell 1 (local lexicographic).
  for (int b = 0; b <= 2; ++b)
    CHECK(left[b * 3 + 2] == right[b * 3 + 0]);
}

TEST_SUITE_END();

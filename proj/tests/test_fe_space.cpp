#include "cutflow/fe_space.hpp"

#include <doctest.h>

#include <random>

using namespace cutflow;

TEST_SUITE_BEGIN("fe_space");

TEST_CASE("kronecker property and partition of unity") {
  for (int r : {1, 2, 3}) {
    const QkBasis basis(r);
    for (int i = 0; i < basis.n_funcs(); ++i)
      for (int j = 0; j < basis.n_funcs(); ++j)
        CHECK(basis.value(i, basis.node(j)) ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    std::mt19937 rng(3 + r);
    std::uniform_real_distribution<double> unit(-0.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec2 x(unit(rng), unit(rng));
      double sum = 0.0;
      Vec2 grad_sum(0.0, 0.0);
      for (int i = 0; i < basis.n_funcs(); ++i) {
        sum += basis.value(i, x);
        grad_sum += basis.gradient(i, x);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(grad_sum.norm() == doctest::Approx(0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("q1 values at the cell center") {
  const QkBasis basis(1);
  for (int i = 0; i < 4; ++i)
    CHECK(basis.value(i, {0.5, 0.5}) == doctest::Approx(0.25));
}

TEST_CASE("canonical extension of constants and monomials") {
  const BackgroundMesh mesh({0, 2, 0, 1}, 2, 1);  // K1=[0,1]^2, K2=[1,2]x[0,1]

  SUBCASE("constants extend to themselves") {
    const QkBasis basis(2);
    std::vector<double> ones(basis.n_funcs(), 1.0);
    CHECK(canonical_extension(basis, mesh, 0, ones.data(), {1.7, 0.3}) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("bilinear basis function value 1 at node (1,0)") {
    const QkBasis basis(1);
    std::vector<double> coeffs(4, 0.0);
    coeffs[1] = 1.0;  // node (1,0) of K1: the function x(1-y)
    CHECK(canonical_extension(basis, mesh, 0, coeffs.data(), {2.0, 0.0}) ==
          doctest::Approx(2.0).epsilon(1e-13));
  }

  SUBCASE("x^2 extends as the polynomial identity") {
    const QkBasis basis(2);
    std::vector<double> coeffs(9);
    for (int i = 0; i < 9; ++i) {
      const Vec2 node = basis.node(i);
      coeffs[i] = node.x() * node.x();
    }
    CHECK(canonical_extension(basis, mesh, 0, coeffs.data(), {1.5, 0.3}) ==
          doctest::Approx(2.25).epsilon(1e-13));
  }
}

TEST_CASE("patch extension reproduction") {
  const BackgroundMesh mesh({0, 2, 0, 1}, 2, 1);
  const FacePatch patch = make_face_patch(mesh, mesh.interior_faces().front());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> px(0.0, 2.0), py(0.0, 1.0);
  for (int r : {1, 2, 3}) {
    const QkBasis basis(r);
    // One global polynomial over the patch, restricted to either cell.
    std::vector<double> mono((r + 1) * (r + 1));
    for (double& v : mono) v = coeff(rng);
    auto poly = [&](const Vec2& x) {
      double s = 0.0;
      int idx = 0;
      for (int b = 0; b <= r; ++b)
        for (int a = 0; a <= r; ++a)
          s += mono[idx++] * std::pow(x.x(), a) * std::pow(x.y(), b);
      return s;
    };
    std::vector<double> c1(basis.n_funcs()), c2(basis.n_funcs());
    for (int i = 0; i < basis.n_funcs(); ++i) {
      c1[i] = poly(mesh.from_reference(patch.cell_1, basis.node(i)));
      c2[i] = poly(mesh.from_reference(patch.cell_2, basis.node(i)));
    }
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 x(px(rng), py(rng));
      const double e1 = canonical_extension(basis, mesh, patch.cell_1, c1.data(), x);
      const double e2 = canonical_extension(basis, mesh, patch.cell_2, c2.data(), x);
      CHECK(e1 - e2 == doctest::Approx(0.0).epsilon(1e-11));
      CHECK(e1 == doctest::Approx(poly(x)).epsilon(1e-11));
    }
  }
}

TEST_SUITE_END();

#include "cutflow/runner.hpp"
#include "cutflow/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace cutflow;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("builtin scenario parameters") {
  SUBCASE("dynamic poiseuille") {
    const Scenario s = builtin_scenario("dynamic_poiseuille");
    CHECK(s.domain.x_max == doctest::Approx(3.0));
    CHECK(s.domain.y_min == doctest::Approx(-0.5));
    CHECK(s.t_end == doctest::Approx(40.0));
    CHECK(s.tau == doctest::Approx(0.1));
    CHECK(s.body_radius == doctest::Approx(0.2));
    CHECK(s.body_center0.x() == doctest::Approx(1.545));
    CHECK(s.body_amplitude == doctest::Approx(0.8));
    CHECK(s.body_omega == doctest::Approx(0.2));
    CHECK(s.u_in == doctest::Approx(1.0));
    CHECK(s.nu == doctest::Approx(0.001));
  }
  SUBCASE("moving cylinder") {
    const Scenario s = builtin_scenario("moving_cylinder");
    CHECK(s.domain.y_max == doctest::Approx(1.0));
    CHECK(s.t_end == doctest::Approx(29.0));
    CHECK(s.tau == doctest::Approx(0.01));
    CHECK(s.nu == doctest::Approx(0.001));
    CHECK(s.body_center0.y() == doctest::Approx(0.6));
    CHECK(s.body_omega == doctest::Approx(0.5));
    // Body boundary condition is the rigid velocity (A w cos(w t), 0).
    const BoundaryData data = make_boundary_data(s);
    const Vec2 g = data.on_body({1.0, 0.6}, 2.0);
    CHECK(g.x() == doctest::Approx(0.8 * 0.5 * std::cos(0.5 * 2.0)));
    CHECK(g.y() == doctest::Approx(0.0));
    // Inflow ramps up over t <= 1, then holds.
    CHECK(data.inflow({0.0, 0.5}, 0.5).x() ==
          doctest::Approx(6.0 * 0.5 * 0.25));
    CHECK(data.inflow({0.0, 0.5}, 7.0).x() == doctest::Approx(6.0 * 0.25));
  }
  SUBCASE("dfg cylinder inflow parabola") {
    const Scenario s = builtin_scenario("dfg_cylinder");
    const BoundaryData data = make_boundary_data(s);
    const double y = 0.205;
    CHECK(data.inflow({0.0, y}, 0.0).x() ==
          doctest::Approx(4.0 * 1.5 * y * (0.41 - y) / (0.41 * 0.41)));
    CHECK(s.force_l_ref == doctest::Approx(0.1));
    CHECK(s.force_u_bar == doctest::Approx(1.0));
  }
  SUBCASE("pure dirichlet detection") {
    CHECK(is_pure_dirichlet(builtin_scenario(ScenarioKind::convergence)));
    CHECK(!is_pure_dirichlet(builtin_scenario(ScenarioKind::dfg_cylinder)));
  }
}

TEST_CASE("config parsing") {
  SUBCASE("tau = 0 is rejected") {
    CHECK_THROWS_AS(
        parse_config_text("scenario = convergence\n[time]\ntau = 0\n"),
        ConfigError);
  }
  SUBCASE("unknown keys are reported with line numbers") {
    try {
      parse_config_text("scenario = convergence\n[time]\nbogus = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find("time.bogus") != std::string::npos);
      CHECK(std::string(err.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("missing scenario key") {
    CHECK_THROWS_AS(parse_config_text("[time]\ntau = 0.1\n"), ConfigError);
  }
  SUBCASE("overrides apply on top of builtin defaults") {
    const Scenario s = parse_config_text(
        "scenario = moving_cylinder\n[mesh]\nnx = 96\nny = 48\n[newton]\n"
        "strategy = dogleg\n");
    CHECK(s.nx == 96);
    CHECK(s.ny == 48);
    CHECK(s.newton.strategy == NewtonStrategy::dogleg);
    CHECK(s.tau == doctest::Approx(0.01));  // builtin default kept
  }
}

TEST_CASE("builtin scenarios round-trip through the config format") {
  for (ScenarioKind kind :
       {ScenarioKind::convergence, ScenarioKind::dfg_cylinder,
        ScenarioKind::dynamic_poiseuille, ScenarioKind::moving_cylinder}) {
    const Scenario s = builtin_scenario(kind);
    const Scenario back = parse_config_text(serialize_config(s));
    CHECK(s == back);
  }
}

TEST_CASE("wall clearance validation") {
  Scenario s = builtin_scenario(ScenarioKind::dynamic_poiseuille);
  s.body_radius = 0.55;  // would touch the walls
  CHECK_THROWS_AS(validate_scenario(s), ConfigError);
}

TEST_CASE("refinement semantics") {
  const Scenario conv = refine(builtin_scenario(ScenarioKind::convergence), 2);
  CHECK(conv.nx == 32);
  CHECK(conv.tau == doctest::Approx(0.025));
  const Scenario dfg = refine(builtin_scenario(ScenarioKind::dfg_cylinder), 1);
  CHECK(dfg.nx == 160);
  CHECK(dfg.tau == doctest::Approx(0.005));  // spatial refinement only
}

TEST_CASE("manufactured solution satisfies the PDE data") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> unit(0.05, 0.95), time(0.1, 1.0);
  const double nu = 0.7;
  const double dx = 1e-4;

  for (int trial = 0; trial < 20; ++trial) {
    const Vec2 x(unit(rng), unit(rng));
    const double t = time(rng);

    auto v = [](const Vec2& p, double tt) { return manufactured::velocity(p, tt); };
    // Finite-difference building blocks.
    const Vec2 dt_v = (v(x, t + dx) - v(x, t - dx)) / (2.0 * dx);
    const Vec2 ex(dx, 0), ey(0, dx);
    Mat2 grad;
    grad.col(0) = (v(x + ex, t) - v(x - ex, t)) / (2.0 * dx);
    grad.col(1) = (v(x + ey, t) - v(x - ey, t)) / (2.0 * dx);
    const Vec2 lap = (v(x + ex, t) + v(x - ex, t) + v(x + ey, t) +
                      v(x - ey, t) - 4.0 * v(x, t)) /
                     (dx * dx);
    const Vec2 grad_p((manufactured::pressure(x + ex, t) -
                       manufactured::pressure(x - ex, t)) /
                          (2.0 * dx),
                      (manufactured::pressure(x + ey, t) -
                       manufactured::pressure(x - ey, t)) /
                          (2.0 * dx));
    const Vec2 vv = v(x, t);
    const Vec2 conv = grad * vv;  // (v . grad) v
    const Vec2 f_fd = dt_v + conv - nu * lap + grad_p;
    const Vec2 f = manufactured::forcing(x, t, nu);
    CHECK((f - f_fd).norm() < 2e-5);
    // Divergence free.
    CHECK(std::abs(grad(0, 0) + grad(1, 1)) < 1e-6);
  }

  SUBCASE("velocity vanishes on the boundary") {
    for (double s : {0.0, 0.31, 0.77, 1.0}) {
      CHECK(manufactured::velocity({0.0, s}, 0.5).norm() < 1e-14);
      CHECK(manufactured::velocity({1.0, s}, 0.5).norm() < 1e-14);
      CHECK(manufactured::velocity({s, 0.0}, 0.5).norm() < 1e-14);
      CHECK(manufactured::velocity({s, 1.0}, 0.5).norm() < 1e-14);
    }
  }
  SUBCASE("initial velocity is zero") {
    CHECK(manufactured::velocity({0.3, 0.7}, 0.0).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("poiseuille data satisfies the do-nothing outflow") {
  const double nu = 0.001, u_in = 1.0, lx = 3.0;
  // At x = lx: nu dv/dx - p n = 0 since v is x-independent and p(lx) = 0.
  CHECK(poiseuille::pressure({lx, 0.2}, nu, u_in, lx) == doctest::Approx(0.0));
  CHECK(poiseuille::velocity({0.0, 0.5}, u_in, 0.5).norm() ==
        doctest::Approx(0.0));  // no-slip at the walls
}

TEST_CASE("mini convergence run writes an error report") {
  Scenario s = builtin_scenario(ScenarioKind::convergence);
  s.nx = s.ny = 4;
  s.t_end = 0.2;
  s.tau = 0.1;
  RunOptions options;
  options.out_dir = "/tmp/cutflow_test_run";
  options.refine = 1;
  CHECK(run_scenario(s, options) == 0);
  std::ifstream in(options.out_dir + "/errors.csv");
  REQUIRE(in.good());
  std::string line;
  int rows = 0, eoc_rows = 0;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    ++rows;
    // EOC columns are filled from the second level on.
    std::istringstream row(line);
    std::string tok;
    int col = 0;
    bool has_eoc = false;
    while (std::getline(row, tok, ',')) {
      if (col == 4 && !tok.empty()) has_eoc = true;
      ++col;
    }
    if (has_eoc) ++eoc_rows;
  }
  CHECK(rows == 2);
  CHECK(eoc_rows == 1);
  std::filesystem::remove_all(options.out_dir);
}

TEST_SUITE_END();

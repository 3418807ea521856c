#include "cutflow/scenario.hpp"

#include "cutflow/config.hpp"

#include <cmath>
#include <sstream>

namespace cutflow {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::convergence: return "convergence";
    case ScenarioKind::dfg_cylinder: return "dfg_cylinder";
    case ScenarioKind::dynamic_poiseuille: return "dynamic_poiseuille";
    case ScenarioKind::moving_cylinder: return "moving_cylinder";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "convergence") return ScenarioKind::convergence;
  if (name == "dfg_cylinder") return ScenarioKind::dfg_cylinder;
  if (name == "dynamic_poiseuille") return ScenarioKind::dynamic_poiseuille;
  if (name == "moving_cylinder") return ScenarioKind::moving_cylinder;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected convergence, dfg_cylinder, "
                    "dynamic_poiseuille or moving_cylinder)");
}

Scenario builtin_scenario(ScenarioKind kind) {
  Scenario s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::convergence:
      s.domain = {0.0, 1.0, 0.0, 1.0};
      s.t_end = 1.0;
      s.tau = 0.1;
      s.nx = s.ny = 8;
      s.nu = 1.0;
      break;
    case ScenarioKind::dfg_cylinder:
      s.domain = {0.0, 2.2, 0.0, 0.41};
      s.t_end = 30.0;
      s.tau = 0.005;
      s.nx = 80;
      s.ny = 15;
      s.nu = 0.001;
      s.u_in = 1.5;  // parabola peak; mean velocity is 1
      s.has_body = true;
      s.body_radius = 0.05;
      s.body_center0 = {0.2, 0.2};
      s.force_l_ref = 0.1;
      s.force_u_bar = 1.0;
      break;
    case ScenarioKind::dynamic_poiseuille:
      s.domain = {0.0, 3.0, -0.5, 0.5};
      s.t_end = 40.0;
      s.tau = 0.1;
      s.nx = 96;
      s.ny = 32;
      s.nu = 0.001;
      s.u_in = 1.0;
      s.has_body = true;
      s.body_radius = 0.2;
      s.body_center0 = {1.545, 0.0};
      s.body_amplitude = 0.8;
      s.body_omega = 0.2;
      s.force_l_ref = 0.4;
      s.force_u_bar = 1.0;
      break;
    case ScenarioKind::moving_cylinder:
      s.domain = {0.0, 3.0, 0.0, 1.0};
      s.t_end = 29.0;
      s.tau = 0.01;
      s.nx = 64;
      s.ny = 32;
      s.nu = 0.001;
      s.u_in = 1.0;  // parabola mean after the startup ramp
      s.has_body = true;
      s.body_radius = 0.2;
      s.body_center0 = {1.545, 0.6};
      s.body_amplitude = 0.8;
      s.body_omega = 0.5;
      s.force_l_ref = 0.4;
      s.force_u_bar = 1.0;
      break;
  }
  return s;
}

Scenario builtin_scenario(const std::string& name) {
  return builtin_scenario(scenario_kind_from_string(name));
}

void validate_scenario(const Scenario& s) {
  if (s.domain.degenerate()) throw ConfigError("degenerate domain extent");
  if (s.nx < 1 || s.ny < 1) throw ConfigError("mesh cell counts must be positive");
  if (s.tau <= 0.0) throw ConfigError("time step tau must be positive");
  if (s.t_end <= 0.0) throw ConfigError("final time must be positive");
  if (s.k < 0) throw ConfigError("temporal degree k must be >= 0");
  if (s.r < 2) throw ConfigError("velocity degree r must be >= 2 (Taylor-Hood)");
  if (s.nu <= 0.0) throw ConfigError("viscosity must be positive");
  if (s.nitsche.gamma1 <= 0.0 || s.nitsche.gamma2 <= 0.0)
    throw ConfigError("Nitsche penalties must be positive");
  if (s.ghost.gamma_v <= 0.0 || s.ghost.gamma_p <= 0.0)
    throw ConfigError("ghost penalty parameters must be positive");
  if (s.newton.max_iters < 1) throw ConfigError("newton.max_iters must be >= 1");
  if (s.newton.abs_tol <= 0.0 || s.newton.rel_tol <= 0.0)
    throw ConfigError("newton tolerances must be positive");
  if (s.threads < 1) throw ConfigError("threads must be >= 1");
  if (s.has_body) {
    if (s.body_radius <= 0.0) throw ConfigError("body radius must be positive");
    const double x_lo = s.body_center0.x() - std::abs(s.body_amplitude);
    const double x_hi = s.body_center0.x() + std::abs(s.body_amplitude);
    const double clearance =
        std::min({x_lo - s.body_radius - s.domain.x_min,
                  s.domain.x_max - x_hi - s.body_radius,
                  s.body_center0.y() - s.body_radius - s.domain.y_min,
                  s.domain.y_max - s.body_center0.y() - s.body_radius});
    if (clearance <= 0.0)
      throw ConfigError("body touches or leaves the pipe (clearance " +
                        format_full(clearance) + ")");
  }
}

Scenario refine(const Scenario& s, int levels) {
  Scenario out = s;
  for (int i = 0; i < levels; ++i) {
    out.nx *= 2;
    out.ny *= 2;
    if (s.kind == ScenarioKind::convergence) out.tau *= 0.5;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config file handling
// ---------------------------------------------------------------------------

namespace {

Scenario apply_config(ConfigFile& cfg) {
  const std::string name = cfg.require_string("scenario");
  Scenario s = builtin_scenario(name);

  s.domain.x_min = cfg.get_double("domain.x_min", s.domain.x_min);
  s.domain.x_max = cfg.get_double("domain.x_max", s.domain.x_max);
  s.domain.y_min = cfg.get_double("domain.y_min", s.domain.y_min);
  s.domain.y_max = cfg.get_double("domain.y_max", s.domain.y_max);
  s.nx = cfg.get_int("mesh.nx", s.nx);
  s.ny = cfg.get_int("mesh.ny", s.ny);
  s.t_end = cfg.get_double("time.t_end", s.t_end);
  s.tau = cfg.get_double("time.tau", s.tau);
  s.k = cfg.get_int("space.k", s.k);
  s.r = cfg.get_int("space.r", s.r);
  s.nu = cfg.get_double("fluid.nu", s.nu);
  s.u_in = cfg.get_double("fluid.u_in", s.u_in);
  s.nitsche.gamma1 = cfg.get_double("nitsche.gamma1", s.nitsche.gamma1);
  s.nitsche.gamma2 = cfg.get_double("nitsche.gamma2", s.nitsche.gamma2);
  s.ghost.gamma_v = cfg.get_double("ghost_penalty.gamma_v", s.ghost.gamma_v);
  s.ghost.gamma_p = cfg.get_double("ghost_penalty.gamma_p", s.ghost.gamma_p);
  s.ghost.velocity_h_exponent = cfg.get_double(
      "ghost_penalty.velocity_h_exponent", s.ghost.velocity_h_exponent);
  s.ghost.pressure_h_exponent = cfg.get_double(
      "ghost_penalty.pressure_h_exponent", s.ghost.pressure_h_exponent);
  s.newton.abs_tol = cfg.get_double("newton.abs_tol", s.newton.abs_tol);
  s.newton.rel_tol = cfg.get_double("newton.rel_tol", s.newton.rel_tol);
  s.newton.max_iters = cfg.get_int("newton.max_iters", s.newton.max_iters);
  const std::string strategy = cfg.get_string(
      "newton.strategy", s.newton.strategy == NewtonStrategy::dogleg
                             ? "dogleg"
                             : "line_search");
  if (strategy == "line_search")
    s.newton.strategy = NewtonStrategy::line_search;
  else if (strategy == "dogleg")
    s.newton.strategy = NewtonStrategy::dogleg;
  else
    throw ConfigError("newton.strategy must be line_search or dogleg, got '" +
                      strategy + "'");
  s.has_body = cfg.get_bool("body.present", s.has_body);
  s.body_radius = cfg.get_double("body.radius", s.body_radius);
  s.body_center0.x() = cfg.get_double("body.center_x", s.body_center0.x());
  s.body_center0.y() = cfg.get_double("body.center_y", s.body_center0.y());
  s.body_amplitude = cfg.get_double("body.amplitude", s.body_amplitude);
  s.body_omega = cfg.get_double("body.omega", s.body_omega);
  s.force_l_ref = cfg.get_double("forces.l_ref", s.force_l_ref);
  s.force_u_bar = cfg.get_double("forces.u_bar", s.force_u_bar);
  s.threads = cfg.get_int("run.threads", s.threads);
  s.field_every = cfg.get_int("output.field_every", s.field_every);

  cfg.finish();
  validate_scenario(s);
  return s;
}

}  // namespace

Scenario load_config(const std::string& path) {
  ConfigFile cfg = ConfigFile::parse_file(path);
  return apply_config(cfg);
}

Scenario parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile cfg = ConfigFile::parse_string(text, origin);
  return apply_config(cfg);
}

std::string serialize_config(const Scenario& s) {
  std::ostringstream out;
  auto kv = [&out](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  kv("scenario", to_string(s.kind));
  out << "\n[domain]\n";
  kv("x_min", format_full(s.domain.x_min));
  kv("x_max", format_full(s.domain.x_max));
  kv("y_min", format_full(s.domain.y_min));
  kv("y_max", format_full(s.domain.y_max));
  out << "\n[mesh]\n";
  kv("nx", std::to_string(s.nx));
  kv("ny", std::to_string(s.ny));
  out << "\n[time]\n";
  kv("t_end", format_full(s.t_end));
  kv("tau", format_full(s.tau));
  out << "\n[space]\n";
  kv("k", std::to_string(s.k));
  kv("r", std::to_string(s.r));
  out << "\n[fluid]\n";
  kv("nu", format_full(s.nu));
  kv("u_in", format_full(s.u_in));
  out << "\n[nitsche]\n";
  kv("gamma1", format_full(s.nitsche.gamma1));
  kv("gamma2", format_full(s.nitsche.gamma2));
  out << "\n[ghost_penalty]\n";
  kv("gamma_v", format_full(s.ghost.gamma_v));
  kv("gamma_p", format_full(s.ghost.gamma_p));
  kv("velocity_h_exponent", format_full(s.ghost.velocity_h_exponent));
  kv("pressure_h_exponent", format_full(s.ghost.pressure_h_exponent));
  out << "\n[newton]\n";
  kv("abs_tol", format_full(s.newton.abs_tol));
  kv("rel_tol", format_full(s.newton.rel_tol));
  kv("max_iters", std::to_string(s.newton.max_iters));
  kv("strategy", s.newton.strategy == NewtonStrategy::dogleg ? "dogleg"
                                                             : "line_search");
  out << "\n[body]\n";
  kv("present", s.has_body ? "true" : "false");
  kv("radius", format_full(s.body_radius));
  kv("center_x", format_full(s.body_center0.x()));
  kv("center_y", format_full(s.body_center0.y()));
  kv("amplitude", format_full(s.body_amplitude));
  kv("omega", format_full(s.body_omega));
  out << "\n[forces]\n";
  kv("l_ref", format_full(s.force_l_ref));
  kv("u_bar", format_full(s.force_u_bar));
  out << "\n[run]\n";
  kv("threads", std::to_string(s.threads));
  out << "\n[output]\n";
  kv("field_every", std::to_string(s.field_every));
  return out.str();
}

// ---------------------------------------------------------------------------
// Problem data
// ---------------------------------------------------------------------------

namespace manufactured {

Vec2 velocity(const Vec2& x, double t) {
  const double s1 = std::sin(M_PI * x.x()), c1 = std::cos(M_PI * x.x());
  const double s2 = std::sin(M_PI * x.y()), c2 = std::cos(M_PI * x.y());
  const double tf = std::sin(t);
  return {tf * s1 * s1 * s2 * c2, -tf * s1 * c1 * s2 * s2};
}

double pressure(const Vec2& x, double t) {
  const double s1 = std::sin(M_PI * x.x()), c1 = std::cos(M_PI * x.x());
  const double s2 = std::sin(M_PI * x.y()), c2 = std::cos(M_PI * x.y());
  return std::sin(t) * s1 * c1 * s2 * c2;
}

Vec2 forcing(const Vec2& x, double t, double nu) {
  const double pi = M_PI;
  const double s1 = std::sin(pi * x.x()), c1 = std::cos(pi * x.x());
  const double s2 = std::sin(pi * x.y()), c2 = std::cos(pi * x.y());
  const double tf = std::sin(t), td = std::cos(t);

  const double v1 = tf * s1 * s1 * s2 * c2;
  const double v2 = -tf * s1 * c1 * s2 * s2;
  const double dx_v1 = 2.0 * pi * tf * s1 * c1 * s2 * c2;
  const double dy_v1 = pi * tf * s1 * s1 * (c2 * c2 - s2 * s2);
  const double dx_v2 = -pi * tf * (c1 * c1 - s1 * s1) * s2 * s2;
  const double dy_v2 = -2.0 * pi * tf * s1 * c1 * s2 * c2;
  const double lap_v1 = 2.0 * pi * pi * tf * (c1 * c1 - s1 * s1) * s2 * c2 -
                        4.0 * pi * pi * tf * s1 * s1 * s2 * c2;
  const double lap_v2 = 4.0 * pi * pi * tf * s1 * c1 * s2 * s2 -
                        2.0 * pi * pi * tf * s1 * c1 * (c2 * c2 - s2 * s2);
  const double dx_p = pi * tf * (c1 * c1 - s1 * s1) * s2 * c2;
  const double dy_p = pi * tf * s1 * c1 * (c2 * c2 - s2 * s2);

  const double dt_v1 = td * s1 * s1 * s2 * c2;
  const double dt_v2 = -td * s1 * c1 * s2 * s2;

  return {dt_v1 + v1 * dx_v1 + v2 * dy_v1 - nu * lap_v1 + dx_p,
          dt_v2 + v1 * dx_v2 + v2 * dy_v2 - nu * lap_v2 + dy_p};
}

}  // namespace manufactured

namespace poiseuille {

Vec2 velocity(const Vec2& x, double u_in, double half_height) {
  return {u_in * (half_height * half_height - x.y() * x.y()), 0.0};
}

double pressure(const Vec2& x, double nu, double u_in, double length) {
  return -2.0 * nu * u_in * (x.x() - length);
}

}  // namespace poiseuille

BoundaryTags scenario_boundary_tags(const Scenario& s) {
  BoundaryTags tags;
  if (s.kind == ScenarioKind::convergence) {
    // Dirichlet data on the whole boundary.
    tags.left = tags.right = BoundaryTag::wall;
  }
  return tags;
}

bool is_pure_dirichlet(const Scenario& s) {
  const BoundaryTags tags = scenario_boundary_tags(s);
  return tags.left != BoundaryTag::outflow &&
         tags.right != BoundaryTag::outflow &&
         tags.bottom != BoundaryTag::outflow &&
         tags.top != BoundaryTag::outflow;
}

std::shared_ptr<const LevelSet> make_level_set(const Scenario& s) {
  if (!s.has_body) return nullptr;
  const bool stationary = s.body_amplitude == 0.0;
  RigidMotion motion =
      stationary
          ? RigidMotion::stationary(s.body_center0, s.body_radius)
          : RigidMotion::harmonic_x(s.body_center0, s.body_amplitude,
                                    s.body_omega, s.body_radius);
  return std::make_shared<CircleLevelSet>(std::move(motion), stationary);
}

BoundaryData make_boundary_data(const Scenario& s) {
  BoundaryData data;
  switch (s.kind) {
    case ScenarioKind::convergence:
      // Manufactured solution vanishes on the boundary; data stays zero.
      break;
    case ScenarioKind::dfg_cylinder: {
      const double height = s.domain.height();
      const double u_in = s.u_in;
      data.inflow = [height, u_in](const Vec2& x, double) {
        return Vec2(4.0 * u_in * x.y() * (height - x.y()) / (height * height),
                    0.0);
      };
      // Stationary cylinder: g_r = 0.
      break;
    }
    case ScenarioKind::dynamic_poiseuille: {
      const double half = 0.5 * s.domain.height();
      const double u_in = s.u_in;
      auto profile = [half, u_in](const Vec2& x, double) {
        return poiseuille::velocity(x, u_in, half);
      };
      data.inflow = profile;
      data.body = profile;  // g_r = v_p keeps the Poiseuille flow exact
      break;
    }
    case ScenarioKind::moving_cylinder: {
      const double u_in = s.u_in;
      data.inflow = [u_in](const Vec2& x, double t) {
        const double ramp = std::min(t, 1.0);
        return Vec2(6.0 * u_in * ramp * x.y() * (1.0 - x.y()), 0.0);
      };
      const double a = s.body_amplitude, w = s.body_omega;
      data.body = [a, w](const Vec2&, double t) {
        return Vec2(a * w * std::cos(w * t), 0.0);
      };
      break;
    }
  }
  return data;
}

FluidParameters make_fluid_parameters(const Scenario& s) {
  FluidParameters params;
  params.nu = s.nu;
  if (s.kind == ScenarioKind::convergence) {
    const double nu = s.nu;
    params.body_force = [nu](const Vec2& x, double t) {
      return manufactured::forcing(x, t, nu);
    };
  }
  return params;
}

std::optional<ExactSolution> scenario_exact_solution(const Scenario& s) {
  if (s.kind != ScenarioKind::convergence) return std::nullopt;
  ExactSolution exact;
  exact.velocity = [](const Vec2& x, double t) {
    return manufactured::velocity(x, t);
  };
  exact.pressure = [](const Vec2& x, double t) {
    return manufactured::pressure(x, t);
  };
  return exact;
}

}  // namespace cutflow

#pragma once

#include "cutflow/forms.hpp"
#include "cutflow/postprocess.hpp"
#include "cutflow/solver.hpp"

#include <optional>
#include <string>

namespace cutflow {

enum class ScenarioKind {
  convergence,
  dfg_cylinder,
  dynamic_poiseuille,
  moving_cylinder
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

/// A fully resolved simulation setup: one of the four built-in experiments
/// with all numerical parameters, optionally adjusted via config file or
/// command line. One Scenario determines a run completely.
struct Scenario {
  ScenarioKind kind = ScenarioKind::convergence;
  Rect domain;
  double t_end = 1.0;
  double tau = 0.1;
  int nx = 8, ny = 8;
  int k = 1, r = 2;
  double nu = 1.0;
  double u_in = 1.0;

  NitscheConfig nitsche;
  GhostPenaltyConfig ghost;
  NewtonConfig newton;

  bool has_body = false;
  double body_radius = 0.0;
  Vec2 body_center0 = {0.0, 0.0};
  double body_amplitude = 0.0;  // harmonic x-motion amplitude (0: stationary)
  double body_omega = 0.0;

  double force_l_ref = 1.0;  // drag/lift normalization
  double force_u_bar = 1.0;

  int threads = 1;
  int field_every = 0;  // field export interval in slabs (0 = final time only)

  bool operator==(const Scenario& o) const {
    return kind == o.kind && domain == o.domain && t_end == o.t_end &&
           tau == o.tau && nx == o.nx && ny == o.ny && k == o.k && r == o.r &&
           nu == o.nu && u_in == o.u_in && nitsche == o.nitsche &&
           ghost == o.ghost && newton == o.newton && has_body == o.has_body &&
           body_radius == o.body_radius &&
           body_center0.x() == o.body_center0.x() &&
           body_center0.y() == o.body_center0.y() &&
           body_amplitude == o.body_amplitude && body_omega == o.body_omega &&
           force_l_ref == o.force_l_ref && force_u_bar == o.force_u_bar &&
           threads == o.threads && field_every == o.field_every;
  }
};

Scenario builtin_scenario(ScenarioKind kind);
Scenario builtin_scenario(const std::string& name);

/// Parses a config file; values start from the named builtin's defaults.
Scenario load_config(const std::string& path);
Scenario parse_config_text(const std::string& text,
                           const std::string& origin = "<string>");
std::string serialize_config(const Scenario& s);

/// Positivity and wall-clearance checks; throws ConfigError on violation.
void validate_scenario(const Scenario& s);

/// Halves the mesh width; the convergence scenario also halves tau
/// (simultaneous space-time refinement), the others refine space only.
Scenario refine(const Scenario& s, int levels);

// Per-scenario problem data.
BoundaryTags scenario_boundary_tags(const Scenario& s);
std::shared_ptr<const LevelSet> make_level_set(const Scenario& s);
BoundaryData make_boundary_data(const Scenario& s);
FluidParameters make_fluid_parameters(const Scenario& s);
std::optional<ExactSolution> scenario_exact_solution(const Scenario& s);
/// Needs the algebraic pressure gauge pin (no outflow boundary).
bool is_pure_dirichlet(const Scenario& s);

/// Manufactured space-time solution of the convergence study (divergence
/// free, zero on the boundary of the unit square, zero-mean pressure).
namespace manufactured {
Vec2 velocity(const Vec2& x, double t);
double pressure(const Vec2& x, double t);
Vec2 forcing(const Vec2& x, double t, double nu);
}  // namespace manufactured

/// Poiseuille reference profile of the dynamic-Poiseuille experiment.
namespace poiseuille {
Vec2 velocity(const Vec2& x, double u_in, double half_height);
double pressure(const Vec2& x, double nu, double u_in, double length);
}  // namespace poiseuille

}  // namespace cutflow

// Command-line front end: scenario runs and quadrature-rule dumps.

#include "cutflow/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace cutflow;

std::shared_ptr<const LevelSet> parse_level_set(const std::string& spec) {
  if (spec.empty() || spec == "none") return nullptr;
  std::istringstream in(spec);
  std::string head;
  std::getline(in, head, ':');
  std::vector<double> args;
  std::string token;
  while (std::getline(in, token, ',')) args.push_back(std::stod(token));
  if (head == "circle" && args.size() == 3) {
    return std::make_shared<CircleLevelSet>(
        RigidMotion::stationary({args[0], args[1]}, args[2]), true);
  }
  if (head == "linear" && args.size() == 3) {
    const double a = args[0], b = args[1], c = args[2];
    return std::make_shared<AnalyticLevelSet>(
        [a, b, c](const Vec2& x) { return a * x.x() + b * x.y() + c; },
        [a, b](const Vec2&) { return Vec2(a, b); });
  }
  throw ConfigError("level set spec must be 'circle:cx,cy,r', 'linear:a,b,c' "
                    "or 'none', got '" + spec + "'");
}

int quad_dump(const std::string& rule, int m1, int m2,
              const std::vector<double>& cell_spec,
              const std::string& level_set_spec) {
  if (rule == "gauss" || rule == "radau") {
    const Rule1D r = rule == "gauss" ? gauss_1d(m1) : gauss_radau_right_1d(m1);
    std::cout << "x,w\n";
    for (size_t i = 0; i < r.points.size(); ++i)
      std::cout << format_full(r.points[i]) << ','
                << format_full(r.weights[i]) << '\n';
    return 0;
  }

  Rect cell{0.0, 1.0, 0.0, 1.0};
  if (cell_spec.size() == 4)
    cell = {cell_spec[0], cell_spec[1], cell_spec[2], cell_spec[3]};
  Rule2D r2;
  if (rule == "full") {
    r2 = full_cell_quadrature(cell, m1);
  } else if (rule == "cut" || rule == "boundary") {
    const auto ls = parse_level_set(level_set_spec);
    if (!ls) throw ConfigError("rule '" + rule + "' needs --level-set");
    const BackgroundMesh mesh(cell, 1, 1);
    const auto geo = cut_topology(mesh, 0, *ls, 0.0);
    r2 = rule == "cut" ? cut_cell_quadrature(mesh, geo, *ls, m1, m2)
                       : embedded_boundary_quadrature(mesh, geo, *ls, m1);
  } else {
    throw ConfigError("unknown rule '" + rule +
                      "' (expected gauss, radau, full, cut, boundary)");
  }
  std::cout << "x,y,w\n";
  for (size_t i = 0; i < r2.points.size(); ++i)
    std::cout << format_full(r2.points[i].x()) << ','
              << format_full(r2.points[i].y()) << ','
              << format_full(r2.weights[i]) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cutflow: unfitted space-time finite element flow solver"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a scenario");
  std::string config_path, scenario_name, out_dir = "out";
  int refine_levels = 0;
  bool dry_run = false, log_newton = false;
  int k_override = -1, r_override = -1, threads_override = 0;
  double tau_override = 0.0;
  run->add_option("config", config_path, "config file path");
  run->add_option("--scenario", scenario_name,
                  "builtin scenario (convergence, dfg_cylinder, "
                  "dynamic_poiseuille, moving_cylinder)");
  run->add_option("--refine", refine_levels, "refinement levels");
  run->add_option("--k", k_override, "temporal polynomial degree");
  run->add_option("--r", r_override, "velocity polynomial degree");
  run->add_option("--tau", tau_override, "time step size");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads_override, "assembly worker threads");
  run->add_flag("--dry-run", dry_run,
                "validate config and geometry at t=0, then exit");
  run->add_flag("--log-newton", log_newton, "per-iteration Newton log lines");

  // quad-dump
  auto* dump = app.add_subcommand("quad-dump", "dump a quadrature rule as CSV");
  std::string rule = "gauss", level_set_spec;
  int m1 = 3, m2 = 0;
  std::vector<double> cell_spec;
  dump->add_option("--rule", rule, "gauss | radau | full | cut | boundary");
  dump->add_option("--m", m1, "number of points / order");
  dump->add_option("--m2", m2, "inner order for cut rules (default --m)");
  dump->add_option("--cell", cell_spec, "cell as x_min x_max y_min y_max")
      ->expected(4);
  dump->add_option("--level-set", level_set_spec,
                   "'circle:cx,cy,r' or 'linear:a,b,c'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(dump))
      return quad_dump(rule, m1, m2 > 0 ? m2 : m1, cell_spec, level_set_spec);

    cutflow::Scenario scenario;
    if (!config_path.empty()) {
      scenario = cutflow::load_config(config_path);
    } else if (!scenario_name.empty()) {
      scenario = cutflow::builtin_scenario(scenario_name);
    } else {
      std::cerr << "error: pass a config file or --scenario <name>\n";
      return 2;
    }

    cutflow::RunOptions options;
    options.out_dir = out_dir;
    options.refine = refine_levels;
    options.dry_run = dry_run;
    options.log_newton = log_newton;
    if (k_override >= 0) options.k = k_override;
    if (r_override >= 0) options.r = r_override;
    if (tau_override > 0.0) options.tau = tau_override;
    if (threads_override > 0) options.threads = threads_override;
    return cutflow::run_scenario(scenario, options);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

#include "cutflow/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cutflow {

FlowSetup make_flow_setup(const Scenario& s) {
  validate_scenario(s);
  FlowSetup setup;
  setup.mesh = std::make_shared<BackgroundMesh>(s.domain, s.nx, s.ny,
                                                scenario_boundary_tags(s));
  setup.space = std::make_shared<TaylorHoodSpace>(build_taylor_hood(*setup.mesh, s.r));
  setup.levelset = make_level_set(s);
  setup.op = std::make_shared<SpatialOperator>(
      *setup.mesh, *setup.space, setup.levelset, make_fluid_parameters(s),
      s.nitsche, s.ghost, make_boundary_data(s), s.threads);
  setup.op->set_pin_pressure_gauge(is_pure_dirichlet(s));
  return setup;
}

MarchConfig make_march_config(const Scenario& s,
                              std::shared_ptr<SpatialOperator> op,
                              bool log_newton) {
  MarchConfig config;
  config.k = s.k;
  config.t_end = s.t_end;
  config.tau = s.tau;
  config.newton = s.newton;
  config.log_newton = log_newton;
  if (is_pure_dirichlet(s)) {
    config.post_solve = [op](std::vector<Vector>& nodal,
                             const std::vector<SpatialProblem::Ctx>& contexts) {
      for (size_t l = 0; l < nodal.size(); ++l)
        op->normalize_pressure(contexts.back(), nodal[l]);
    };
  }
  return config;
}

MarchResult run_flow(const FlowSetup& setup, const Scenario& s,
                     LinearSolver& linsolve, const SlabObserver& observer,
                     bool log_newton) {
  const MarchConfig config = make_march_config(s, setup.op, log_newton);
  const Vector u0 = Vector::Zero(setup.space->n_total);
  return march(*setup.op, u0, config, linsolve, observer);
}

ErrorReport convergence_study(const Scenario& base, int levels,
                              bool log_progress) {
  ErrorReport report;
  for (int level = 0; level <= levels; ++level) {
    const Scenario s = refine(base, level);
    const FlowSetup setup = make_flow_setup(s);
    const auto exact = scenario_exact_solution(s);
    if (!exact)
      throw ConfigError("convergence_study requires an exact solution");
    L2L2Error error(*setup.op, *exact);
    auto linsolve = make_default_linear_solver();
    run_flow(setup, s, *linsolve,
             [&error](const SlabRecord& record) { error.add_slab(record); });
    report.h.push_back(setup.mesh->h());
    report.tau.push_back(s.tau);
    report.velocity_errors.push_back(error.velocity_error());
    report.pressure_errors.push_back(error.pressure_error());
    if (log_progress)
      std::clog << "convergence level " << level << ": h=" << setup.mesh->h()
                << " tau=" << s.tau
                << " e_v=" << format_full(error.velocity_error())
                << " e_p=" << format_full(error.pressure_error()) << "\n";
  }
  return report;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

struct ForceWindow {
  double cd_min = 0.0, cd_max = 0.0, cl_min = 0.0, cl_max = 0.0;
  double frequency = 0.0;
  bool periodic = false;
};

/// Min/max over the last full lift cycle (between the last two lift minima).
ForceWindow analyze_forces(const ForceSeries& series) {
  ForceWindow window;
  std::vector<size_t> minima;
  for (size_t i = 1; i + 1 < series.cl.size(); ++i)
    if (series.cl[i] < series.cl[i - 1] && series.cl[i] < series.cl[i + 1])
      minima.push_back(i);
  if (minima.size() < 2) {
    if (!series.cd.empty()) {
      window.cd_min = *std::min_element(series.cd.begin(), series.cd.end());
      window.cd_max = *std::max_element(series.cd.begin(), series.cd.end());
      window.cl_min = *std::min_element(series.cl.begin(), series.cl.end());
      window.cl_max = *std::max_element(series.cl.begin(), series.cl.end());
    }
    return window;
  }
  const size_t a = minima[minima.size() - 2];
  const size_t b = minima.back();
  window.cd_min = *std::min_element(series.cd.begin() + a, series.cd.begin() + b + 1);
  window.cd_max = *std::max_element(series.cd.begin() + a, series.cd.begin() + b + 1);
  window.cl_min = *std::min_element(series.cl.begin() + a, series.cl.begin() + b + 1);
  window.cl_max = *std::max_element(series.cl.begin() + a, series.cl.begin() + b + 1);
  window.frequency = lift_frequency(series.times, series.cl);
  window.periodic = true;
  return window;
}

int run_convergence(const Scenario& s, const RunOptions& options) {
  const ErrorReport report = convergence_study(s, options.refine, true);
  write_file(options.out_dir + "/errors.csv", report.to_csv());
  std::ostringstream summary;
  summary << "convergence study: " << options.refine + 1 << " levels\n";
  const auto v_eoc = report.velocity_eoc();
  const auto p_eoc = report.pressure_eoc();
  for (size_t i = 0; i < report.velocity_errors.size(); ++i) {
    summary << "level " << i << ": h=" << format_full(report.h[i])
            << " tau=" << format_full(report.tau[i])
            << " e_v=" << format_full(report.velocity_errors[i])
            << " e_p=" << format_full(report.pressure_errors[i]);
    if (i > 0)
      summary << " eoc_v=" << format_full(v_eoc[i - 1])
              << " eoc_p=" << format_full(p_eoc[i - 1]);
    summary << '\n';
  }
  write_file(options.out_dir + "/summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int run_dfg(const Scenario& s, const RunOptions& options) {
  const FlowSetup setup = make_flow_setup(s);
  auto linsolve = make_default_linear_solver();
  ForceSeries series;
  series.l_ref = s.force_l_ref;
  series.u_bar = s.force_u_bar;
  run_flow(setup, s, *linsolve,
           [&](const SlabRecord& record) {
             const auto ctx = setup.op->prepare(record.t_end);
             const DragLift f = drag_lift(*setup.op, ctx, record.nodal.back(),
                                          s.force_l_ref, s.force_u_bar);
             series.times.push_back(record.t_end);
             series.cd.push_back(f.cd);
             series.cl.push_back(f.cl);
           },
           options.log_newton);
  write_file(options.out_dir + "/forces.csv", series.to_csv());

  const ForceWindow window = analyze_forces(series);
  std::ostringstream summary;
  summary << "flow around cylinder, dofs_per_interval="
          << (s.k + 1) * setup.space->n_total << "\n";
  summary << "min(cl)=" << format_full(window.cl_min)
          << " max(cl)=" << format_full(window.cl_max)
          << " min(cd)=" << format_full(window.cd_min)
          << " max(cd)=" << format_full(window.cd_max);
  if (window.periodic)
    summary << " f_l=" << format_full(window.frequency);
  else
    summary << " f_l=n/a (no periodic cycle detected)";
  summary << '\n';
  write_file(options.out_dir + "/summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int run_poiseuille(const Scenario& s, const RunOptions& options) {
  const FlowSetup setup = make_flow_setup(s);
  auto linsolve = make_default_linear_solver();
  const MarchResult result = run_flow(setup, s, *linsolve, {}, options.log_newton);

  const Vector& u_final = result.last.nodal.back();
  const double t = s.t_end;
  const auto samples_v =
      sample_cross_section(*setup.op, u_final, 1, 2.34, 50, t);
  const auto samples_p = sample_cross_section(*setup.op, u_final, 0, 0.0, 200, t);
  write_file(options.out_dir + "/crosssection_velocity_x2.34.csv",
             cross_section_csv(samples_v));
  write_file(options.out_dir + "/crosssection_pressure_y0.csv",
             cross_section_csv(samples_p));
  const auto ctx = setup.op->prepare(t);
  export_fields(*setup.op, ctx, u_final, options.out_dir + "/fields_final.dat");

  const double half = 0.5 * s.domain.height();
  double max_dev = 0.0;
  for (const auto& sample : samples_v)
    if (!sample.rigid) {
      const Vec2 exact = poiseuille::velocity(sample.position, s.u_in, half);
      max_dev = std::max(max_dev, (sample.velocity - exact).lpNorm<Eigen::Infinity>());
    }
  // Least-squares pressure slope along the centerline (fluid side).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& sample : samples_p)
    if (!sample.rigid) {
      sx += sample.position.x();
      sy += sample.pressure;
      sxx += sample.position.x() * sample.position.x();
      sxy += sample.position.x() * sample.pressure;
      ++n;
    }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  std::ostringstream summary;
  summary << "dynamic poiseuille, T=" << format_full(s.t_end) << "\n";
  summary << "max |v - v_p| on fluid side of x=2.34: " << format_full(max_dev)
          << "\n";
  summary << "pressure slope along y=0: " << format_full(slope)
          << " (exact " << format_full(-2.0 * s.nu * s.u_in) << ")\n";
  write_file(options.out_dir + "/summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int run_moving_cylinder(const Scenario& s, const RunOptions& options) {
  const FlowSetup setup = make_flow_setup(s);
  auto linsolve = make_default_linear_solver();
  std::ostringstream stability;
  stability << "t,max_fluid_speed,max_rigid_speed\n";
  double worst_ratio = 0.0;
  double max_fluid_all = 0.0, max_rigid_all = 0.0;
  const MarchResult result = run_flow(
      setup, s, *linsolve,
      [&](const SlabRecord& record) {
        const auto ctx = setup.op->prepare(record.t_end);
        const SpeedExtrema speeds =
            max_nodal_speeds(*setup.op, ctx, record.nodal.back());
        stability << format_full(record.t_end) << ','
                  << format_full(speeds.fluid) << ','
                  << format_full(speeds.rigid) << '\n';
        max_fluid_all = std::max(max_fluid_all, speeds.fluid);
        max_rigid_all = std::max(max_rigid_all, speeds.rigid);
        if (speeds.fluid > 0.0)
          worst_ratio = std::max(worst_ratio, speeds.rigid / speeds.fluid);
        if (s.field_every > 0 && record.index % s.field_every == 0)
          export_fields(*setup.op, ctx, record.nodal.back(),
                        options.out_dir + "/fields_" +
                            std::to_string(record.index) + ".dat");
      },
      options.log_newton);
  write_file(options.out_dir + "/stability.csv", stability.str());
  const auto ctx = setup.op->prepare(s.t_end);
  export_fields(*setup.op, ctx, result.last.nodal.back(),
                options.out_dir + "/fields_final.dat");

  std::ostringstream summary;
  summary << "moving cylinder, T=" << format_full(s.t_end) << ", "
          << result.n_slabs << " slabs\n";
  summary << "max rigid-cell speed over run: " << format_full(max_rigid_all)
          << ", max fluid-cell speed: " << format_full(max_fluid_all)
          << ", worst per-slab ratio: " << format_full(worst_ratio) << "\n";
  write_file(options.out_dir + "/summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

}  // namespace

int run_scenario(Scenario s, const RunOptions& options) {
  if (options.k) s.k = *options.k;
  if (options.r) s.r = *options.r;
  if (options.tau) s.tau = *options.tau;
  if (options.threads) s.threads = *options.threads;
  if (s.kind != ScenarioKind::convergence && options.refine > 0)
    s = refine(s, options.refine);
  validate_scenario(s);

  std::filesystem::create_directories(options.out_dir);

  if (options.dry_run) {
    const BackgroundMesh mesh(s.domain, s.nx, s.ny, scenario_boundary_tags(s));
    const auto levelset = make_level_set(s);
    const auto tables = build_geometry_tables(mesh, levelset.get(), 0.0,
                                              QuadOrders::for_degree(s.r));
    std::cout << "scenario " << to_string(s.kind) << " at t=0: "
              << tables.cls.fluid_cells.size() << " fluid, "
              << tables.cls.rigid_cells.size() << " rigid, "
              << tables.cls.cut_cells.size() << " cut cells, "
              << tables.cls.stab_faces.size() << " stabilized faces\n";
    const TaylorHoodSpace space = build_taylor_hood(mesh, s.r);
    std::cout << "dofs: " << space.n_total << " per time node, "
              << (s.k + 1) * space.n_total << " per slab; "
              << static_cast<int>(std::ceil(s.t_end / s.tau - 1e-9))
              << " slabs\n";
    return 0;
  }

  switch (s.kind) {
    case ScenarioKind::convergence: return run_convergence(s, options);
    case ScenarioKind::dfg_cylinder: return run_dfg(s, options);
    case ScenarioKind::dynamic_poiseuille: return run_poiseuille(s, options);
    case ScenarioKind::moving_cylinder: return run_moving_cylinder(s, options);
  }
  return 1;
}

}  // namespace cutflow

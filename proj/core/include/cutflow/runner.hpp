#pragma once

#include "cutflow/scenario.hpp"
#include "cutflow/timeslab.hpp"

#include <optional>
#include <string>

namespace cutflow {

/// Mesh, spaces and assembled operator for one scenario.
struct FlowSetup {
  std::shared_ptr<BackgroundMesh> mesh;
  std::shared_ptr<TaylorHoodSpace> space;
  std::shared_ptr<const LevelSet> levelset;
  std::shared_ptr<SpatialOperator> op;
};

FlowSetup make_flow_setup(const Scenario& s);

/// March configuration for a scenario, including the pressure-gauge
/// normalization hook for pure-Dirichlet setups.
MarchConfig make_march_config(const Scenario& s,
                              std::shared_ptr<SpatialOperator> op,
                              bool log_newton);

/// Runs the scenario's time marching from the zero initial state.
MarchResult run_flow(const FlowSetup& setup, const Scenario& s,
                     LinearSolver& linsolve, const SlabObserver& observer,
                     bool log_newton = false);

/// Convergence study: `levels + 1` runs under simultaneous (tau, h) halving.
ErrorReport convergence_study(const Scenario& base, int levels,
                              bool log_progress = false);

struct RunOptions {
  std::string out_dir = "out";
  int refine = 0;
  bool dry_run = false;
  std::optional<int> k;
  std::optional<int> r;
  std::optional<double> tau;
  std::optional<int> threads;
  bool log_newton = false;
};

/// CLI entry point behind `cutflow run`; writes output files and a summary,
/// returns a process exit status.
int run_scenario(Scenario s, const RunOptions& options);

}  // namespace cutflow

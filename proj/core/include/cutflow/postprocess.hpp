#pragma once

#include "cutflow/forms.hpp"
#include "cutflow/timeslab.hpp"

#include <string>
#include <vector>

namespace cutflow {

/// Space-time exact solution used by the convergence study.
struct ExactSolution {
  SpaceTimeField velocity;
  std::function<double(const Vec2&, double)> pressure;
};

/// Accumulates the L2(L2) errors over the moving fluid domain: temporal
/// Gauss points per slab, spatial full/cut rules per cell.
class L2L2Error {
 public:
  L2L2Error(const SpatialOperator& op, ExactSolution exact)
      : op_(op), exact_(std::move(exact)) {}

  void add_slab(const SlabRecord& record);
  double velocity_error() const { return std::sqrt(v_sq_); }
  double pressure_error() const { return std::sqrt(p_sq_); }

 private:
  const SpatialOperator& op_;
  ExactSolution exact_;
  double v_sq_ = 0.0;
  double p_sq_ = 0.0;
};

/// Per-refinement errors with experimental orders of convergence under
/// simultaneous (tau, h) halving.
struct ErrorReport {
  std::vector<double> h;
  std::vector<double> tau;
  std::vector<double> velocity_errors;
  std::vector<double> pressure_errors;

  std::vector<double> velocity_eoc() const;  // size = levels - 1
  std::vector<double> pressure_eoc() const;
  std::string to_csv() const;
};

struct DragLift {
  double cd = 0.0;
  double cl = 0.0;
};

/// Drag and lift coefficients on the embedded boundary, normalization
/// c = 2 F / (U^2 L). Gradients and pressure are taken from the owning cut
/// cell's bulk polynomial (fluid side).
DragLift drag_lift(const SpatialOperator& op, const SpatialProblem::Ctx& ctx,
                   const Vector& u, double l_ref, double u_bar);

struct ForceSeries {
  std::vector<double> times;
  std::vector<double> cd;
  std::vector<double> cl;
  double l_ref = 1.0;
  double u_bar = 1.0;

  std::string to_csv() const;
};

/// Oscillation frequency of the lift series: inverse spacing of the last two
/// consecutive lift minima, each refined by a local parabolic fit.
double lift_frequency(const std::vector<double>& times,
                      const std::vector<double>& values);

struct CrossSectionSample {
  Vec2 position;
  Vec2 velocity;
  double pressure;
  bool rigid;  // sample lies inside the rigid body (extension values)
};

/// Samples fields along a line: `axis` is the varying coordinate (0 = x,
/// 1 = y), `coordinate` the fixed one. n_samples points, endpoints included.
std::vector<CrossSectionSample> sample_cross_section(
    const SpatialOperator& op, const Vector& u, int axis, double coordinate,
    int n_samples, double t);

std::string cross_section_csv(const std::vector<CrossSectionSample>& samples);

/// Writes mesh vertices with fields plus the cell classification as a
/// documented rectilinear-grid text file; output is bit-exact across runs.
void export_fields(const SpatialOperator& op, const SpatialProblem::Ctx& ctx,
                   const Vector& u, const std::string& path);

/// Max nodal velocity magnitude over fluid- and rigid-classified cells
/// (stability diagnostic of the fictitious-domain extension).
struct SpeedExtrema {
  double fluid = 0.0;
  double rigid = 0.0;
};
SpeedExtrema max_nodal_speeds(const SpatialOperator& op,
                              const SpatialProblem::Ctx& ctx, const Vector& u);

}  // namespace cutflow

#pragma once

#include "cutflow/problem.hpp"
#include "cutflow/quadrature.hpp"
#include "cutflow/solver.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace cutflow {

/// Nodal Lagrange basis in time on the reference interval [0,1], collocated
/// at the k+1 right Gauss-Radau nodes (the last node is the slab endpoint,
/// so the end-of-slab trace is a degree of freedom).
class TemporalBasis {
 public:
  explicit TemporalBasis(int k);

  int degree() const { return k_; }
  int n_nodes() const { return k_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  double vandermonde_condition() const { return condition_; }

  double value(int l, double t_ref) const;
  double derivative(int l, double t_ref) const;

 private:
  int k_;
  std::vector<double> nodes_;
  Eigen::MatrixXd coeffs_;  // column l: monomial coefficients of chi_l
  double condition_ = 1.0;
};

TemporalBasis build_temporal_basis(int k);

/// dG(k) solution on one slab: the k+1 nodal states and the evaluation of
/// the polynomial in time anywhere on the slab.
struct SlabSolution {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::shared_ptr<const TemporalBasis> basis;
  std::vector<Vector> nodal;  // k+1 coefficient states at the Radau nodes

  /// Evaluates at physical time t in [t_begin, t_end]. Evaluation at a
  /// Radau node returns that nodal state exactly.
  Vector evaluate(double t) const;
};

struct SlabRecord {
  int index;           // 1-based slab number
  double t_begin;
  double t_end;
  const TemporalBasis& basis;
  const std::vector<double>& gauss_points;    // reference points in [0,1]
  const std::vector<double>& gauss_weights;   // physical weights (sum = tau)
  const std::vector<SpatialProblem::Ctx>& contexts;  // at the Gauss points
  const SpatialProblem::Ctx& start_context;          // at t_{n-1} (jump term)
  const std::vector<Vector>& nodal;
  const NewtonReport& newton;
  const SpatialProblem& problem;
};

using SlabObserver = std::function<void(const SlabRecord&)>;

struct MarchConfig {
  int k = 1;
  double t_end = 1.0;
  double tau = 0.1;
  NewtonConfig newton;
  /// Invoked after each converged solve, before observers (pressure gauge
  /// normalization for pure-Dirichlet scenarios).
  std::function<void(std::vector<Vector>&, const std::vector<SpatialProblem::Ctx>&)>
      post_solve;
  /// Structured per-iteration Newton log lines to std::clog.
  bool log_newton = false;
};

struct MarchResult {
  int n_slabs = 0;
  int total_newton_iterations = 0;
  SlabSolution last;
};

/// Number of temporal Gauss points, the minimal m with m >= (3k+1)/2.
inline int temporal_gauss_points(int k) { return (3 * k + 2) / 2; }

/// Assembles and solves the block system of one slab. Exposed separately
/// from march() for the slab-level tests; marching calls it in sequence.
class SlabSystem : public NonlinearSystem {
 public:
  SlabSystem(const SpatialProblem& problem, const TemporalBasis& basis,
             double t_begin, double tau, const Vector& u_old);

  int size() const override;
  Vector residual(const Vector& x) override;
  const SparseMat& jacobian(const Vector& x) override;

  const std::vector<SpatialProblem::Ctx>& contexts() const { return contexts_; }
  const SpatialProblem::Ctx& start_context() const { return ctx_start_; }
  const std::vector<double>& gauss_points() const { return gauss_ref_; }
  const std::vector<double>& gauss_weights() const { return weights_; }
  /// Initial guess: every node carries the incoming trace.
  Vector initial_guess() const;
  std::vector<Vector> split(const Vector& x) const;

 private:
  void interpolate(const Vector& x, double t_ref, Vector& u) const;

  const SpatialProblem& problem_;
  const TemporalBasis& basis_;
  double t_begin_, tau_;
  int n_, k_, m_;
  Vector u_old_;
  std::vector<double> gauss_ref_, weights_;
  std::vector<SpatialProblem::Ctx> contexts_;
  SpatialProblem::Ctx ctx_start_;
  std::vector<SparseMat> mass_;   // per Gauss point
  SparseMat mass_start_;
  std::vector<SparseMat> jac_;    // per Gauss point, reused across iterations
  SparseMat block_;
  std::vector<int> pinned_;
  std::vector<char> pinned_mask_;
};

MarchResult march(const SpatialProblem& problem, Vector u0,
                  const MarchConfig& config, LinearSolver& linsolve,
                  const SlabObserver& observer = {});

}  // namespace cutflow

#pragma once

#include "cutflow/common.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cutflow {

enum class NewtonStrategy { line_search, dogleg };

struct NewtonConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_iters = 20;
  NewtonStrategy strategy = NewtonStrategy::line_search;
  // Backtracking line search.
  double backtrack_factor = 0.5;
  double sufficient_decrease = 1e-4;
  double min_step = 1.0 / 1024.0;  // 2^-10
  // Dogleg trust region.
  double initial_radius = 1.0;
  bool operator==(const NewtonConfig&) const = default;
};

/// Pluggable sparse linear solve behind the Newton iteration.
class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  virtual Vector solve(const SparseMat& a, const Vector& b) = 0;
};

/// Sparse direct LU factorization (default).
class SparseDirectSolver : public LinearSolver {
 public:
  Vector solve(const SparseMat& a, const Vector& b) override;
};

std::unique_ptr<LinearSolver> make_default_linear_solver();

/// Residual/Jacobian view of one nonlinear system.
class NonlinearSystem {
 public:
  virtual ~NonlinearSystem() = default;
  virtual int size() const = 0;
  virtual Vector residual(const Vector& x) = 0;
  virtual const SparseMat& jacobian(const Vector& x) = 0;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_norms;  // per assembled iterate, incl. x0
  std::vector<double> damping;         // accepted step length per iteration
  std::string failure;
};

/// Damped Newton iteration; for structured progress logging pass a non-null
/// `log` callback (one call per iterate).
Vector newton_solve(NonlinearSystem& system, Vector x0,
                    const NewtonConfig& config, LinearSolver& linsolve,
                    NewtonReport* report = nullptr,
                    const std::function<void(int, double, double)>& log = {});

}  // namespace cutflow

#include "cutflow/solver.hpp"

#ifdef CUTFLOW_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include <cmath>
#include <sstream>

namespace cutflow {

Vector SparseDirectSolver::solve(const SparseMat& a, const Vector& b) {
#ifdef CUTFLOW_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMat> lu;
#else
  Eigen::SparseLU<SparseMat> lu;
#endif
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed");
  Vector x = lu.solve(b);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU back substitution failed");
  return x;
}

std::unique_ptr<LinearSolver> make_default_linear_solver() {
  return std::make_unique<SparseDirectSolver>();
}

namespace {

Vector dogleg_step(const SparseMat& j, const Vector& r, const Vector& newton,
                   double radius) {
  // Quadratic model m(p) = 0.5*|r + J p|^2 on the dogleg path.
  if (newton.norm() <= radius) return newton;
  const Vector g = j.transpose() * r;        // gradient of the model
  const double gn2 = g.squaredNorm();
  const Vector jg = j * g;
  const double denom = jg.squaredNorm();
  if (denom <= 0.0 || gn2 <= 0.0) return (radius / newton.norm()) * newton;
  const Vector cauchy = -(gn2 / denom) * g;
  const double cn = cauchy.norm();
  if (cn >= radius) return -(radius / std::sqrt(gn2)) * g;
  // Intersection of the segment cauchy -> newton with the radius.
  const Vector d = newton - cauchy;
  const double a = d.squaredNorm();
  const double b = 2.0 * cauchy.dot(d);
  const double c = cauchy.squaredNorm() - radius * radius;
  const double tau = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  return cauchy + tau * d;
}

}  // namespace

Vector newton_solve(NonlinearSystem& system, Vector x,
                    const NewtonConfig& config, LinearSolver& linsolve,
                    NewtonReport* report,
                    const std::function<void(int, double, double)>& log) {
  NewtonReport local;
  NewtonReport& rep = report ? *report : local;
  rep = NewtonReport{};

  Vector r = system.residual(x);
  double rn = r.norm();
  rep.residual_norms.push_back(rn);
  if (log) log(0, rn, 1.0);
  const double tol = std::max(config.abs_tol, config.rel_tol * rn);
  double radius = config.initial_radius;

  for (int it = 0; it < config.max_iters; ++it) {
    if (rn <= tol) {
      rep.converged = true;
      return x;
    }
    const SparseMat& j = system.jacobian(x);
    const Vector newton_dir = linsolve.solve(j, -r);

    double accepted_step = 0.0;
    if (config.strategy == NewtonStrategy::line_search) {
      double alpha = 1.0;
      while (true) {
        const Vector trial = x + alpha * newton_dir;
        const Vector r_trial = system.residual(trial);
        const double rt = r_trial.norm();
        if (rt < (1.0 - config.sufficient_decrease * alpha) * rn) {
          x = trial;
          r = r_trial;
          rn = rt;
          accepted_step = alpha;
          break;
        }
        alpha *= config.backtrack_factor;
        if (alpha < config.min_step) break;
      }
      if (accepted_step == 0.0) {
        rep.failure = "line search stalled at residual " + format_full(rn);
        rep.iterations = it;
        if (report == nullptr) throw SolverError("newton_solve: " + rep.failure);
        return x;
      }
    } else {
      // Dogleg trust region on the Gauss-Newton model.
      bool accepted = false;
      for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
        const Vector p = dogleg_step(j, r, newton_dir, radius);
        const Vector trial = x + p;
        const Vector r_trial = system.residual(trial);
        const double rt = r_trial.norm();
        const double pred =
            0.5 * (rn * rn - (r + j * p).squaredNorm());
        const double actual = 0.5 * (rn * rn - rt * rt);
        const double rho = pred > 0.0 ? actual / pred : -1.0;
        if (rho > 0.1 && rt < rn) {
          x = trial;
          r = r_trial;
          rn = rt;
          accepted_step = p.norm();
          accepted = true;
          if (rho > 0.75) radius = std::max(radius, 2.0 * p.norm());
        } else {
          radius *= 0.25;
          if (radius < 1e-14) break;
        }
      }
      if (!accepted) {
        rep.failure = "dogleg trust region collapsed at residual " + format_full(rn);
        rep.iterations = it;
        if (report == nullptr) throw SolverError("newton_solve: " + rep.failure);
        return x;
      }
    }

    rep.iterations = it + 1;
    rep.residual_norms.push_back(rn);
    rep.damping.push_back(accepted_step);
    if (log) log(it + 1, rn, accepted_step);
  }

  if (rn <= tol) {
    rep.converged = true;
    return x;
  }
  rep.failure = "maximum iterations reached, residual " + format_full(rn);
  if (report == nullptr) throw SolverError("newton_solve: " + rep.failure);
  return x;
}

}  // namespace cutflow

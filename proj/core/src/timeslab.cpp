#include "cutflow/timeslab.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <iostream>

namespace cutflow {

TemporalBasis::TemporalBasis(int k) : k_(k) {
  if (k_ < 0) throw ConfigError("TemporalBasis: k must be >= 0");
  if (k_ > 10)
    std::clog << "[cutflow] warning: temporal degree k=" << k_
              << " leads to an ill-conditioned Vandermonde system\n";
  nodes_ = gauss_radau_right_1d(k_ + 1).points;
  const int n = k_ + 1;
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m) v(i, m) = std::pow(nodes_[i], m);
  coeffs_ = v.fullPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
  condition_ = svd.singularValues()(0) / svd.singularValues()(n - 1);
}

double TemporalBasis::value(int l, double t) const {
  double s = 0.0;
  for (int m = k_; m >= 0; --m) s = s * t + coeffs_(m, l);
  return s;
}

double TemporalBasis::derivative(int l, double t) const {
  double s = 0.0;
  for (int m = k_; m >= 1; --m) s = s * t + m * coeffs_(m, l);
  return s;
}

TemporalBasis build_temporal_basis(int k) { return TemporalBasis(k); }

Vector SlabSolution::evaluate(double t) const {
  const double tau = t_end - t_begin;
  const double t_ref = (t - t_begin) / tau;
  for (size_t l = 0; l < nodal.size(); ++l)
    if (std::abs(t_ref - basis->nodes()[l]) < 1e-14) return nodal[l];
  Vector u = Vector::Zero(nodal.front().size());
  for (size_t l = 0; l < nodal.size(); ++l)
    u += basis->value(static_cast<int>(l), t_ref) * nodal[l];
  return u;
}

// ---------------------------------------------------------------------------
// Slab system
// ---------------------------------------------------------------------------

SlabSystem::SlabSystem(const SpatialProblem& problem, const TemporalBasis& basis,
                       double t_begin, double tau, const Vector& u_old)
    : problem_(problem), basis_(basis), t_begin_(t_begin), tau_(tau),
      n_(problem.n_dofs()), k_(basis.degree()),
      m_(temporal_gauss_points(basis.degree())), u_old_(u_old) {
  const Rule1D gauss = gauss_1d(m_);
  gauss_ref_ = gauss.points;
  weights_.resize(m_);
  for (int mu = 0; mu < m_; ++mu) weights_[mu] = tau_ * gauss.weights[mu];

  contexts_.reserve(m_);
  for (int mu = 0; mu < m_; ++mu)
    contexts_.push_back(problem_.prepare(t_begin_ + tau_ * gauss_ref_[mu]));
  ctx_start_ = problem_.prepare(t_begin_);

  mass_.resize(m_);
  for (int mu = 0; mu < m_; ++mu)
    problem_.assemble_mass(contexts_[mu], mass_[mu]);
  problem_.assemble_mass(ctx_start_, mass_start_);
  jac_.resize(m_);

  pinned_ = problem_.pinned_dofs();
  pinned_mask_.assign(n_, 0);
  for (int d : pinned_) pinned_mask_[d] = 1;
}

int SlabSystem::size() const { return (k_ + 1) * n_; }

void SlabSystem::interpolate(const Vector& x, double t_ref, Vector& u) const {
  u.setZero();
  for (int l = 0; l <= k_; ++l)
    u += basis_.value(l, t_ref) * x.segment(l * n_, n_);
}

Vector SlabSystem::initial_guess() const {
  Vector x((k_ + 1) * n_);
  for (int l = 0; l <= k_; ++l) x.segment(l * n_, n_) = u_old_;
  return x;
}

std::vector<Vector> SlabSystem::split(const Vector& x) const {
  std::vector<Vector> nodal(k_ + 1);
  for (int l = 0; l <= k_; ++l) nodal[l] = x.segment(l * n_, n_);
  return nodal;
}

Vector SlabSystem::residual(const Vector& x) {
  Vector res = Vector::Zero((k_ + 1) * n_);
  Vector u(n_), du(n_);
  for (int mu = 0; mu < m_; ++mu) {
    const double t_ref = gauss_ref_[mu];
    interpolate(x, t_ref, u);
    du.setZero();
    for (int l = 0; l <= k_; ++l)
      du += (basis_.derivative(l, t_ref) / tau_) * x.segment(l * n_, n_);
    Vector r_mu = problem_.residual(contexts_[mu], u);
    r_mu.noalias() += mass_[mu] * du;
    for (int j = 0; j <= k_; ++j) {
      const double c = weights_[mu] * basis_.value(j, t_ref);
      if (c != 0.0) res.segment(j * n_, n_) += c * r_mu;
    }
  }
  // Jump term over the fluid domain at the slab start.
  Vector d(n_);
  d.setZero();
  for (int l = 0; l <= k_; ++l)
    d += basis_.value(l, 0.0) * x.segment(l * n_, n_);
  d -= u_old_;
  const Vector jump = mass_start_ * d;
  for (int j = 0; j <= k_; ++j)
    res.segment(j * n_, n_) += basis_.value(j, 0.0) * jump;

  for (int d_pin : pinned_)
    for (int j = 0; j <= k_; ++j)
      res[j * n_ + d_pin] = x[j * n_ + d_pin];
  return res;
}

const SparseMat& SlabSystem::jacobian(const Vector& x) {
  Vector u(n_);
  for (int mu = 0; mu < m_; ++mu) {
    interpolate(x, gauss_ref_[mu], u);
    problem_.assemble_jacobian(contexts_[mu], u, jac_[mu]);
  }

  // Temporal coupling blocks B[j][l].
  const int nb = k_ + 1;
  std::vector<SparseMat> blocks(nb * nb);
  for (int j = 0; j < nb; ++j) {
    const double chi_j0 = basis_.value(j, 0.0);
    for (int l = 0; l < nb; ++l) {
      SparseMat b(n_, n_);
      for (int mu = 0; mu < m_; ++mu) {
        const double cj = weights_[mu] * basis_.value(j, gauss_ref_[mu]);
        const double a = cj * basis_.value(l, gauss_ref_[mu]);
        const double c = cj * basis_.derivative(l, gauss_ref_[mu]) / tau_;
        if (a != 0.0) b += a * jac_[mu];
        if (c != 0.0) b += c * mass_[mu];
      }
      const double cjump = chi_j0 * basis_.value(l, 0.0);
      if (cjump != 0.0) b += cjump * mass_start_;
      blocks[j * nb + l] = std::move(b);
    }
  }

  // Stack the blocks into one compressed column-major matrix, replacing the
  // rows of pinned DoFs by identity equations.
  const int big = nb * n_;
  std::vector<int> outer(big + 1, 0);
  size_t nnz_total = 0;
  for (int l = 0; l < nb; ++l) {
    for (int c = 0; c < n_; ++c) {
      size_t count = 0;
      for (int j = 0; j < nb; ++j) {
        const SparseMat& b = blocks[j * nb + l];
        for (SparseMat::InnerIterator it(b, c); it; ++it)
          if (!pinned_mask_[it.row()]) ++count;
        if (pinned_mask_[c] && j == l) ++count;  // identity diagonal
      }
      outer[l * n_ + c + 1] = static_cast<int>(count);
      nnz_total += count;
    }
  }
  for (int c = 0; c < big; ++c) outer[c + 1] += outer[c];

  std::vector<int> inner(nnz_total);
  std::vector<double> vals(nnz_total);
  for (int l = 0; l < nb; ++l) {
    for (int c = 0; c < n_; ++c) {
      size_t pos = outer[l * n_ + c];
      for (int j = 0; j < nb; ++j) {
        const SparseMat& b = blocks[j * nb + l];
        const bool insert_diag = pinned_mask_[c] && j == l;
        bool diag_done = false;
        for (SparseMat::InnerIterator it(b, c); it; ++it) {
          const int r = static_cast<int>(it.row());
          if (pinned_mask_[r]) continue;
          if (insert_diag && !diag_done && r > c) {
            inner[pos] = j * n_ + c;
            vals[pos++] = 1.0;
            diag_done = true;
          }
          inner[pos] = j * n_ + r;
          vals[pos++] = it.value();
        }
        if (insert_diag && !diag_done) {
          inner[pos] = j * n_ + c;
          vals[pos++] = 1.0;
        }
      }
    }
  }
  block_ = Eigen::Map<const SparseMat>(big, big, static_cast<int>(nnz_total),
                                       outer.data(), inner.data(), vals.data());
  return block_;
}

// ---------------------------------------------------------------------------
// Time marching
// ---------------------------------------------------------------------------

MarchResult march(const SpatialProblem& problem, Vector u0,
                  const MarchConfig& config, LinearSolver& linsolve,
                  const SlabObserver& observer) {
  if (config.tau <= 0.0) throw ConfigError("march: tau must be positive");
  if (config.t_end <= 0.0) throw ConfigError("march: t_end must be positive");
  const int n_slabs =
      static_cast<int>(std::ceil(config.t_end / config.tau - 1e-9));

  auto basis = std::make_shared<TemporalBasis>(config.k);
  MarchResult result;
  result.n_slabs = n_slabs;

  Vector u_old = std::move(u0);
  for (int n = 1; n <= n_slabs; ++n) {
    const double t0 = (n - 1) * config.tau;
    const double t1 = std::min(n * config.tau, config.t_end);
    try {
      SlabSystem system(problem, *basis, t0, t1 - t0, u_old);
      NewtonReport report;
      std::function<void(int, double, double)> log;
      if (config.log_newton)
        log = [n](int it, double rn, double damping) {
          std::clog << "newton slab=" << n << " iter=" << it
                    << " residual=" << format_full(rn)
                    << " damping=" << format_full(damping) << "\n";
        };
      Vector x = newton_solve(system, system.initial_guess(), config.newton,
                              linsolve, &report, log);
      if (!report.converged) {
        std::string history;
        for (double rn : report.residual_norms)
          history += " " + format_full(rn);
        throw SolverError("Newton failed in slab " + std::to_string(n) +
                          " (t in [" + format_full(t0) + ", " + format_full(t1) +
                          "]): " + report.failure + "; residual history:" +
                          history);
      }
      result.total_newton_iterations += report.iterations;

      std::vector<Vector> nodal = system.split(x);
      if (config.post_solve) config.post_solve(nodal, system.contexts());

      if (observer) {
        SlabRecord record{n, t0, t1, *basis, system.gauss_points(),
                          system.gauss_weights(), system.contexts(),
                          system.start_context(), nodal, report, problem};
        observer(record);
      }

      u_old = nodal.back();
      if (n == n_slabs) {
        result.last.t_begin = t0;
        result.last.t_end = t1;
        result.last.basis = basis;
        result.last.nodal = std::move(nodal);
      }
    } catch (const GeometryError& err) {
      throw GeometryError("slab " + std::to_string(n) + ": " + err.what());
    }
  }
  return result;
}

}  // namespace cutflow

#include "cutflow/fe_space.hpp"

namespace cutflow {

QkBasis::QkBasis(int degree) : degree_(degree), n_((degree + 1) * (degree + 1)) {
  if (degree_ < 1) throw ConfigError("QkBasis: degree must be >= 1");
  nodes_1d_.resize(degree_ + 1);
  for (int a = 0; a <= degree_; ++a)
    nodes_1d_[a] = static_cast<double>(a) / degree_;
  inv_denom_.resize(degree_ + 1);
  for (int a = 0; a <= degree_; ++a) {
    double d = 1.0;
    for (int b = 0; b <= degree_; ++b)
      if (b != a) d *= nodes_1d_[a] - nodes_1d_[b];
    inv_denom_[a] = 1.0 / d;
  }
}

Vec2 QkBasis::node(int i) const {
  return {nodes_1d_[i % (degree_ + 1)], nodes_1d_[i / (degree_ + 1)]};
}

void QkBasis::eval_1d(double x, std::vector<double>& v,
                      std::vector<double>& d) const {
  const int n = degree_ + 1;
  v.resize(n);
  d.resize(n);
  for (int a = 0; a < n; ++a) {
    double val = inv_denom_[a];
    for (int b = 0; b < n; ++b)
      if (b != a) val *= x - nodes_1d_[b];
    v[a] = val;
    // Derivative of the product: sum over the omitted factor.
    double der = 0.0;
    for (int c = 0; c < n; ++c) {
      if (c == a) continue;
      double term = inv_denom_[a];
      for (int b = 0; b < n; ++b)
        if (b != a && b != c) term *= x - nodes_1d_[b];
      der += term;
    }
    d[a] = der;
  }
}

double QkBasis::value(int i, const Vec2& ref) const {
  thread_local std::vector<double> vx, dx, vy, dy;
  eval_1d(ref.x(), vx, dx);
  eval_1d(ref.y(), vy, dy);
  return vx[i % (degree_ + 1)] * vy[i / (degree_ + 1)];
}

Vec2 QkBasis::gradient(int i, const Vec2& ref) const {
  thread_local std::vector<double> vx, dx, vy, dy;
  eval_1d(ref.x(), vx, dx);
  eval_1d(ref.y(), vy, dy);
  const int a = i % (degree_ + 1);
  const int b = i / (degree_ + 1);
  return {dx[a] * vy[b], vx[a] * dy[b]};
}

void QkBasis::eval_all(const Vec2& ref, double* values, Vec2* gradients) const {
  thread_local std::vector<double> vx, dx, vy, dy;
  eval_1d(ref.x(), vx, dx);
  eval_1d(ref.y(), vy, dy);
  int i = 0;
  for (int b = 0; b <= degree_; ++b) {
    for (int a = 0; a <= degree_; ++a, ++i) {
      values[i] = vx[a] * vy[b];
      if (gradients) gradients[i] = {dx[a] * vy[b], vx[a] * dy[b]};
    }
  }
}

FacePatch make_face_patch(const BackgroundMesh& mesh, int face) {
  const Face& f = mesh.faces()[face];
  if (f.is_boundary())
    throw ConfigError("make_face_patch: face is on the domain boundary");
  return {face, f.cell_minus, f.cell_plus};
}

double canonical_extension(const QkBasis& basis, const BackgroundMesh& mesh,
                           int cell, const double* coeffs, const Vec2& point) {
  const Vec2 ref = mesh.to_reference(cell, point);
  thread_local std::vector<double> values;
  values.resize(basis.n_funcs());
  basis.eval_all(ref, values.data(), nullptr);
  double s = 0.0;
  for (int i = 0; i < basis.n_funcs(); ++i) s += coeffs[i] * values[i];
  return s;
}

}  // namespace cutflow

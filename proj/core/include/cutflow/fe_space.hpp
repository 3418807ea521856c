#pragma once

#include "cutflow/common.hpp"
#include "cutflow/mesh.hpp"

#include <vector>

namespace cutflow {

/// Tensor-product Lagrange basis of degree r on the reference square, with
/// equispaced nodes. Evaluation is valid at arbitrary points, including
/// outside [0,1]^2 (used by the canonical patch extension).
class QkBasis {
 public:
  explicit QkBasis(int degree);

  int degree() const { return degree_; }
  int n_funcs() const { return n_; }
  Vec2 node(int i) const;

  double value(int i, const Vec2& ref) const;
  Vec2 gradient(int i, const Vec2& ref) const;
  /// Evaluates all shape values and reference gradients at once.
  void eval_all(const Vec2& ref, double* values, Vec2* gradients) const;

 private:
  void eval_1d(double x, std::vector<double>& v, std::vector<double>& d) const;

  int degree_;
  int n_;
  std::vector<double> nodes_1d_;
  std::vector<double> inv_denom_;  // 1 / prod_{b != a} (x_a - x_b)
};

/// The two congruent cells sharing an interior face, with the affine maps
/// needed to evaluate either cell's polynomial anywhere on the patch.
struct FacePatch {
  int face = -1;
  int cell_1 = -1;
  int cell_2 = -1;
};

FacePatch make_face_patch(const BackgroundMesh& mesh, int face);

/// Value at `point` of the unique Q_r polynomial agreeing on cell `cell`
/// with the finite element function given by `coeffs` (local coefficients,
/// lexicographic). `point` may lie outside the cell.
double canonical_extension(const QkBasis& basis, const BackgroundMesh& mesh,
                           int cell, const double* coeffs, const Vec2& point);

}  // namespace cutflow

#pragma once

#include <cstdint>

#include "hhash/types.hpp"

namespace hhash {

/// An orthogonal map stored as an ordered list of Householder reflection
/// vectors v_1, ..., v_m in R^k.
///
/// The induced matrix is U = H(v_1) H(v_2) ... H(v_m), where
/// H(v) = I - 2 v v^T / |v|^2. Applied to a column vector x this means H(v_m)
/// acts first and H(v_1) last. Every vector has norm above kMinVectorNorm.
class HouseholderStack {
 public:
  /// Empty stack (identity) of width `dim`.
  explicit HouseholderStack(int dim);

  /// `vectors` is m x k, one reflection vector per row. Throws
  /// DegenerateVectorError if any row has norm <= kMinVectorNorm and
  /// DimensionError if k < 1.
  explicit HouseholderStack(Matrix vectors);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(vectors_.rows()); }
  bool empty() const noexcept { return vectors_.rows() == 0; }

  const Matrix& vectors() const noexcept { return vectors_; }
  Eigen::Ref<const Vector> vector(int i) const { return vectors_.row(i).transpose(); }

  friend bool operator==(const HouseholderStack& a, const HouseholderStack& b) {
    return a.dim_ == b.dim_ && a.vectors_.rows() == b.vectors_.rows() && a.vectors_ == b.vectors_;
  }

 private:
  int dim_;
  Matrix vectors_;
};

/// x - 2 (<v,x> / |v|^2) v, in O(k). Throws DegenerateVectorError for
/// |v| <= kMinVectorNorm and DimensionError on length mismatch.
Vector reflect(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& x);

/// Replaces every row x_i of `rows` by U x_i, in place, without forming U.
/// Cost O(n m k).
void apply_stack_inplace(const HouseholderStack& stack, Eigen::Ref<Matrix> rows);

/// Returns the rows of `x` mapped through U (equivalently x * U^T).
Matrix apply_stack(const HouseholderStack& stack, const Matrix& x);

/// Dense k x k matrix U = H(v_1) ... H(v_m).
Matrix stack_to_matrix(const HouseholderStack& stack);

/// Factors an orthogonal matrix into at most k reflections whose product
/// reproduces `u`. Throws NotOrthogonalError when max|U^T U - I| > tol.
HouseholderStack decompose_orthogonal(const Matrix& u, double tol = 1e-8);

/// k reflection vectors with i.i.d. standard-normal entries, drawn from a
/// generator seeded with `seed`. Identical seeds give identical stacks.
HouseholderStack random_stack(int k, std::uint64_t seed);

/// Largest absolute entry of U^T U - I.
double orthogonality_error(const Matrix& u);

}  // namespace hhash

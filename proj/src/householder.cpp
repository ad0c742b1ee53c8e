#include "hhash/householder.hpp"

#include <cmath>
#include <string>

#include "hhash/errors.hpp"
#include "hhash/random.hpp"

namespace hhash {

namespace {

void check_vector(const Eigen::Ref<const Vector>& v, int index) {
  if (!(v.norm() > kMinVectorNorm)) {
    throw DegenerateVectorError("reflection vector " + std::to_string(index) +
                                " has norm <= 1e-12");
  }
}

// rows <- rows * H(v), i.e. every row reflected through v.
void reflect_rows(const Eigen::Ref<const Vector>& v, Eigen::Ref<Matrix> rows) {
  const double scale = 2.0 / v.squaredNorm();
  const Vector proj = rows * v;
  rows.noalias() -= (scale * proj) * v.transpose();
}

}  // namespace

HouseholderStack::HouseholderStack(int dim) : dim_(dim), vectors_(0, dim) {
  if (dim < 1) throw DimensionError("householder stack dimension must be >= 1");
}

HouseholderStack::HouseholderStack(Matrix vectors)
    : dim_(static_cast<int>(vectors.cols())), vectors_(std::move(vectors)) {
  if (dim_ < 1) throw DimensionError("householder stack dimension must be >= 1");
  for (int i = 0; i < vectors_.rows(); ++i) check_vector(vectors_.row(i).transpose(), i);
}

Vector reflect(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& x) {
  if (v.size() != x.size()) throw DimensionError("reflect: vector lengths differ");
  check_vector(v, 0);
  return x - (2.0 * v.dot(x) / v.squaredNorm()) * v;
}

void apply_stack_inplace(const HouseholderStack& stack, Eigen::Ref<Matrix> rows) {
  if (rows.cols() != stack.dim()) {
    throw DimensionError("apply_stack: matrix has " + std::to_string(rows.cols()) +
                         " columns, stack dimension is " + std::to_string(stack.dim()));
  }
  // Row form: x^T U^T = x^T H(v_m) ... H(v_1); H(v_m) goes first.
  for (int i = stack.size() - 1; i >= 0; --i) reflect_rows(stack.vector(i), rows);
}

Matrix apply_stack(const HouseholderStack& stack, const Matrix& x) {
  Matrix out = x;
  apply_stack_inplace(stack, out);
  return out;
}

Matrix stack_to_matrix(const HouseholderStack& stack) {
  // Rows of I mapped through U give U^T.
  Matrix ut = Matrix::Identity(stack.dim(), stack.dim());
  apply_stack_inplace(stack, ut);
  return ut.transpose();
}

double orthogonality_error(const Matrix& u) {
  const Matrix gram = u.transpose() * u;
  return (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

HouseholderStack decompose_orthogonal(const Matrix& u, double tol) {
  if (u.rows() != u.cols() || u.rows() < 1) {
    throw DimensionError("decompose_orthogonal: matrix must be square and non-empty");
  }
  const int k = static_cast<int>(u.rows());
  const double err = orthogonality_error(u);
  if (!(err <= tol)) {
    throw NotOrthogonalError("decompose_orthogonal: max|U^T U - I| = " + std::to_string(err) +
                             " exceeds tolerance");
  }

  // Reduce U column by column: H_j ... H_1 U becomes upper triangular, which
  // for orthogonal U means diagonal with entries +1 except possibly the last.
  Eigen::MatrixXd a = u;
  Matrix reflections(0, k);
  for (int j = 0; j + 1 < k; ++j) {
    const int tail = k - j;
    Vector x = a.col(j).tail(tail);
    const double sigma = x.tail(tail - 1).squaredNorm();
    const double norm = std::sqrt(x[0] * x[0] + sigma);
    Vector v = x;
    // v = x - |x| e_1, with the first entry evaluated without cancellation.
    v[0] = x[0] <= 0 ? x[0] - norm : -sigma / (x[0] + norm);
    if (!(v.norm() > kMinVectorNorm)) continue;  // column already reduced

    const double scale = 2.0 / v.squaredNorm();
    auto block = a.bottomRows(tail);
    const Eigen::RowVectorXd proj = v.transpose() * block;
    block.noalias() -= (scale * v) * proj;

    Vector full = Vector::Zero(k);
    full.tail(tail) = v;
    reflections.conservativeResize(reflections.rows() + 1, Eigen::NoChange);
    reflections.row(reflections.rows() - 1) = full.transpose();
  }
  if (a(k - 1, k - 1) < 0) {
    reflections.conservativeResize(reflections.rows() + 1, Eigen::NoChange);
    reflections.row(reflections.rows() - 1) = Vector::Unit(k, k - 1).transpose();
  }
  // H_m ... H_1 U = I  =>  U = H_1 ... H_m.
  return HouseholderStack(std::move(reflections));
}

HouseholderStack random_stack(int k, std::uint64_t seed) {
  if (k < 1) throw DimensionError("random_stack: k must be >= 1");
  Rng rng(seed);
  Matrix vectors(k, k);
  for (int i = 0; i < k; ++i) {
    Vector v = gaussian_vector(k, rng);
    while (!(v.norm() > kMinVectorNorm)) v = gaussian_vector(k, rng);
    vectors.row(i) = v.transpose();
  }
  return HouseholderStack(std::move(vectors));
}

}  // namespace hhash

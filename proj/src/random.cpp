#include "hhash/random.hpp"

namespace hhash {

Vector gaussian_vector(int size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(size);
  for (int i = 0; i < size; ++i) out[i] = normal(rng);
  return out;
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

Matrix random_orthogonal(int k, Rng& rng) {
  Eigen::MatrixXd g = gaussian_matrix(k, k, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace hhash

#include "hhash/baselines.hpp"

#include "hhash/errors.hpp"
#include "hhash/losses.hpp"
#include "hhash/random.hpp"

namespace hhash {

namespace {

Matrix signs_of(const Matrix& m) {
  return m.unaryExpr([](double x) { return sign_pm1(x); });
}

}  // namespace

double itq_objective(const Matrix& v, const Matrix& rotation) {
  const Matrix z = v * rotation;
  return (z - signs_of(z)).squaredNorm();
}

ItqResult itq_iterate(const Matrix& v, Matrix initial, int iterations) {
  if (iterations < 1) throw Error("ITQ needs at least one iteration");
  if (initial.rows() != v.cols() || initial.cols() != v.cols())
    throw DimensionError("ITQ rotation must be k x k");
  ItqResult result;
  result.rotation = std::move(initial);
  result.objective.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const Matrix b = signs_of(v * result.rotation);
    // max tr(R^T V^T B): with V^T B = P S Q^T the optimum is R = P Q^T.
    const Eigen::MatrixXd cross = v.transpose() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success || !svd.matrixU().allFinite() || !svd.matrixV().allFinite())
      throw NumericError("ITQ Procrustes SVD failed", it);
    result.rotation = svd.matrixU() * svd.matrixV().transpose();
    result.objective.push_back(itq_objective(v, result.rotation));
  }
  return result;
}

Matrix center_rows(const Matrix& data, const Vector& mean) {
  if (mean.size() != data.cols()) throw DimensionError("center_rows: mean has wrong length");
  Matrix out = normalize_rows(data);
  out.rowwise() -= mean.transpose();
  return out;
}

ItqResult itq_fit(const EmbeddingSet& e, const ItqConfig& cfg) {
  if (e.n() < 1 || e.k() < 1) throw EmptyInputError("itq_fit: embedding set is empty");
  Matrix v = normalize_rows(e.data);
  std::optional<Vector> mean;
  if (cfg.center) {
    mean = v.colwise().mean().transpose();
    v.rowwise() -= mean->transpose();
  }
  Rng rng(cfg.seed);
  ItqResult result = itq_iterate(v, random_orthogonal(e.k(), rng), cfg.iterations);
  result.mean = std::move(mean);
  return result;
}

HouseholderStack ItqResult::to_stack(double tol) const {
  return decompose_orthogonal(rotation.transpose(), tol);
}

HouseholderStack random_rotation_baseline(int k, std::uint64_t seed) { return random_stack(k, seed); }

}  // namespace hhash

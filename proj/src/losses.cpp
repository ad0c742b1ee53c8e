#include "hhash/losses.hpp"

#include <cmath>
#include <string>

#include "hhash/errors.hpp"

namespace hhash {

namespace {

void check_input(const Matrix& z) {
  if (z.rows() == 0) throw EmptyInputError("loss evaluated on zero rows");
  if (!z.allFinite()) throw NonFiniteError("loss input contains NaN or Inf");
}

// F(x)(1 - F(x)) for the logistic CDF, without overflow for large |x|.
double logistic_variance(double x) {
  const double e = std::exp(-std::abs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

double row_loss(LossKind kind, const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  const auto k = z.size();
  double total = 0.0;
  switch (kind) {
    case LossKind::L2:
      for (Eigen::Index j = 0; j < k; ++j) {
        const double d = z[j] - sign_pm1(z[j]);
        total += d * d;
      }
      return total;
    case LossKind::L1:
      for (Eigen::Index j = 0; j < k; ++j) total += std::abs(z[j] - sign_pm1(z[j]));
      return total;
    case LossKind::MIN_ENTRY: {
      double shift = -z[0] * z[0];
      for (Eigen::Index j = 1; j < k; ++j) shift = std::max(shift, -z[j] * z[j]);
      for (Eigen::Index j = 0; j < k; ++j) total += std::exp(-z[j] * z[j] - shift);
      return shift + std::log(total);
    }
    case LossKind::BIT_VAR:
      for (Eigen::Index j = 0; j < k; ++j) total += logistic_variance(z[j]);
      return total;
  }
  return total;
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L2: return "l2";
    case LossKind::L1: return "l1";
    case LossKind::MIN_ENTRY: return "min-entry";
    case LossKind::BIT_VAR: return "bit-var";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "l2") return LossKind::L2;
  if (name == "l1") return LossKind::L1;
  if (name == "min-entry") return LossKind::MIN_ENTRY;
  if (name == "bit-var") return LossKind::BIT_VAR;
  throw Error("unknown loss '" + std::string(name) + "' (expected l2, l1, min-entry, bit-var)");
}

Matrix normalize_rows(const Matrix& data) {
  Matrix out(data.rows(), data.cols());
  const double radius = std::sqrt(static_cast<double>(data.cols()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double norm = data.row(i).norm();
    if (!(norm > kMinVectorNorm)) throw ZeroRowError(static_cast<std::size_t>(i));
    out.row(i) = data.row(i) * (radius / norm);
  }
  return out;
}

EmbeddingSet normalize(const EmbeddingSet& e) {
  return EmbeddingSet(normalize_rows(e.data), e.labels);
}

double loss_value(LossKind kind, const Matrix& z) {
  check_input(z);
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) total += row_loss(kind, z.row(i));
  return total / static_cast<double>(z.rows());
}

Matrix loss_grad(LossKind kind, const Matrix& z) {
  check_input(z);
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto row = z.row(i);
    switch (kind) {
      case LossKind::L2:
        for (Eigen::Index j = 0; j < z.cols(); ++j)
          g(i, j) = 2.0 * inv_n * (row[j] - sign_pm1(row[j]));
        break;
      case LossKind::L1:
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
          const double d = row[j] - sign_pm1(row[j]);
          g(i, j) = d > 0 ? inv_n : (d < 0 ? -inv_n : 0.0);
        }
        break;
      case LossKind::MIN_ENTRY: {
        double shift = -row[0] * row[0];
        for (Eigen::Index j = 1; j < z.cols(); ++j) shift = std::max(shift, -row[j] * row[j]);
        double denom = 0.0;
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
          g(i, j) = std::exp(-row[j] * row[j] - shift);
          denom += g(i, j);
        }
        for (Eigen::Index j = 0; j < z.cols(); ++j)
          g(i, j) = inv_n * (g(i, j) / denom) * (-2.0 * row[j]);
        break;
      }
      case LossKind::BIT_VAR:
        // d/dz F(1-F) = F(1-F)(1-2F), and 1 - 2F(z) = -tanh(z/2).
        for (Eigen::Index j = 0; j < z.cols(); ++j)
          g(i, j) = -inv_n * logistic_variance(row[j]) * std::tanh(0.5 * row[j]);
        break;
    }
  }
  return g;
}

}  // namespace hhash

#pragma once

#include <Eigen/Dense>

namespace hhash {

/// Row-major dense matrix; rows are items, columns are embedding coordinates.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Smallest Euclidean norm accepted for a reflection vector or an embedding row.
inline constexpr double kMinVectorNorm = 1e-12;

}  // namespace hhash

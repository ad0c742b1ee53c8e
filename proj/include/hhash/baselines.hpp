#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hhash/embedding.hpp"
#include "hhash/householder.hpp"

namespace hhash {

struct ItqConfig {
  int iterations = 50;
  std::uint64_t seed = 0;
  bool center = false;
};

/// Output of iterative quantization. Codes are sign(V R) for the prepared
/// (normalized, optionally centered) rows V.
struct ItqResult {
  Matrix rotation;                   ///< R, k x k, acting on row vectors
  std::optional<Vector> mean;        ///< column means subtracted when centering
  std::vector<double> objective;     ///< |V R - B|_F^2 after each iteration

  /// The same map as a column-vector stack: U = R^T, so U f = (f^T R)^T.
  HouseholderStack to_stack(double tol = 1e-8) const;
};

/// Alternates B = sign(V R) and the orthogonal Procrustes update
/// R = argmin |V R - B|_F, starting from a seeded random orthogonal R.
/// V is the normalized input, column-centered when cfg.center is set.
ItqResult itq_fit(const EmbeddingSet& e, const ItqConfig& cfg);

/// Same loop on already prepared rows, starting from `initial`.
ItqResult itq_iterate(const Matrix& v, Matrix initial, int iterations);

/// |V R - sign(V R)|_F^2.
double itq_objective(const Matrix& v, const Matrix& rotation);

/// Rows normalized to the sqrt(k) sphere, then `mean` subtracted.
Matrix center_rows(const Matrix& data, const Vector& mean);

/// Untrained control: random_stack(k, seed).
HouseholderStack random_rotation_baseline(int k, std::uint64_t seed);

}  // namespace hhash

#pragma once

#include <cstdint>
#include <random>

#include "hhash/types.hpp"

namespace hhash {

/// The single generator type used for every seeded draw in the library.
using Rng = std::mt19937_64;

Vector gaussian_vector(int size, Rng& rng);
Matrix gaussian_matrix(int rows, int cols, Rng& rng);

/// Haar-distributed orthogonal matrix: Q from the QR factorization of a
/// Gaussian matrix, with column signs fixed so that diag(R) > 0.
Matrix random_orthogonal(int k, Rng& rng);

}  // namespace hhash

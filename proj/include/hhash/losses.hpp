#pragma once

#include <string_view>

#include "hhash/embedding.hpp"
#include "hhash/types.hpp"

namespace hhash {

/// Quantization objectives for rotation training. All of them average a
/// per-row term over rows and sum over coordinates.
///
///   L2        |z - sign(z)|_2^2
///   L1        |z - sign(z)|_1
///   MIN_ENTRY log sum_j exp(-z_j^2)            (smooth max of -z_j^2)
///   BIT_VAR   sum_j F(z_j) (1 - F(z_j)),  F the logistic CDF
///
/// sign(0) is +1 throughout.
enum class LossKind { L2, L1, MIN_ENTRY, BIT_VAR };

std::string_view to_string(LossKind kind);
/// Accepts "l2", "l1", "min-entry", "bit-var". Throws Error otherwise.
LossKind parse_loss_kind(std::string_view name);

inline double sign_pm1(double x) { return x >= 0.0 ? 1.0 : -1.0; }

/// Row i becomes sqrt(k) * f_i / |f_i|. Throws ZeroRowError for rows with
/// norm <= kMinVectorNorm. Labels are carried over.
EmbeddingSet normalize(const EmbeddingSet& e);
Matrix normalize_rows(const Matrix& data);

/// Mean per-row loss. Throws NonFiniteError on NaN/Inf input, EmptyInputError
/// for zero rows.
double loss_value(LossKind kind, const Matrix& z);

/// d loss_value / d z, with sign(.) held constant.
Matrix loss_grad(LossKind kind, const Matrix& z);

}  // namespace hhash

#pragma once

#include <cstddef>

#include "corrdet/stream.hpp"

namespace corrdet {

/// Linear encoder fitted once on anomaly-free windows.
///
/// `components` holds k orthonormal rows of length W, ordered by descending
/// explained variance. Each row's largest-magnitude entry is positive (lowest
/// index wins ties) so that refits of the same data are bit-reproducible.
struct PcaModel {
  Vector mean;                 // W
  Matrix components;           // k x W
  Vector explained_variance;   // k, non-increasing
  bool rank_deficient = false; // fewer than k directions carried variance

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  std::size_t latent_dim() const noexcept { return static_cast<std::size_t>(components.rows()); }
};

/// Fits from the rows of `windows` (m x W) through the sample covariance.
PcaModel fit_pca(const Matrix& windows, std::size_t k);

/// components * (x - mean); one k x W product.
Vector project(const PcaModel& model, const Vector& x);
/// Projects every column of `windows` (W x B) at once.
Matrix project_columns(const PcaModel& model, const Matrix& windows);

/// mean + components^T * z.
Vector reconstruct(const PcaModel& model, const Vector& z);

/// Applies the sign rule to each row in place.
void canonicalize_signs(Matrix& rows);

}  // namespace corrdet

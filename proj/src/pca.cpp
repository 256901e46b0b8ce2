#include "corrdet/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrdet/error.hpp"

namespace corrdet {

void canonicalize_signs(Matrix& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double mag = std::abs(rows(r, c));
      if (mag > best) {  // strict: the lowest index keeps ties
        best = mag;
        pivot = c;
      }
    }
    if (rows(r, pivot) < 0.0) rows.row(r) *= -1.0;
  }
}

PcaModel fit_pca(const Matrix& windows, std::size_t k) {
  const auto m = static_cast<std::size_t>(windows.rows());
  const auto dim = static_cast<std::size_t>(windows.cols());
  if (m < 2) throw Error(ErrorKind::InvalidConfig, "PCA needs at least two training windows");
  if (k == 0 || k > std::min(m, dim)) {
    throw Error(ErrorKind::InvalidConfig, "PCA latent dimension " + std::to_string(k) +
                                              " outside [1, min(m, W)]");
  }

  PcaModel model;
  model.mean = windows.colwise().mean().transpose();
  const Matrix centered = windows.rowwise() - model.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);

  // Eigen returns ascending eigenvalues; the top-k sit at the end.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::DegenerateVariance, "covariance eigen-decomposition failed");
  }
  const Vector& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();

  const auto kk = static_cast<Eigen::Index>(k);
  const auto d = static_cast<Eigen::Index>(dim);
  model.components.resize(kk, d);
  model.explained_variance.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    model.components.row(i) = vectors.col(d - 1 - i).transpose();
    model.explained_variance(i) = std::max(values(d - 1 - i), 0.0);
  }
  canonicalize_signs(model.components);

  const double scale = std::max(values(d - 1), 0.0);
  const double tol = std::max(scale, 1.0) * 1e-12 * static_cast<double>(dim);
  std::size_t informative = 0;
  for (Eigen::Index i = 0; i < d; ++i) informative += values(i) > tol ? 1 : 0;
  model.rank_deficient = informative < k;
  return model;
}

Vector project(const PcaModel& model, const Vector& x) {
  if (x.size() != model.mean.size()) {
    throw Error(ErrorKind::DimMismatch, "window length " + std::to_string(x.size()) +
                                            " != model input " + std::to_string(model.mean.size()));
  }
  return model.components * (x - model.mean);
}

Matrix project_columns(const PcaModel& model, const Matrix& windows) {
  if (windows.rows() != model.mean.size()) {
    throw Error(ErrorKind::DimMismatch, "window length does not match PCA input dimension");
  }
  return model.components * (windows.colwise() - model.mean);
}

Vector reconstruct(const PcaModel& model, const Vector& z) {
  if (z.size() != model.components.rows()) {
    throw Error(ErrorKind::DimMismatch, "latent length does not match PCA output dimension");
  }
  return model.mean + model.components.transpose() * z;
}

}  // namespace corrdet

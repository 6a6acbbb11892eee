#pragma once

#include <vector>

#include "satad/tensor.hpp"

namespace satad {

// PCA anomaly detector: score = L2 residual after projecting the centered
// vector onto the top-r principal axes.
struct PcaModel {
  std::vector<double> mean;           // dimension D
  std::vector<std::vector<double>> axes;  // r orthonormal axes, each length D
  std::size_t dim() const { return mean.size(); }
  std::size_t rank() const { return axes.size(); }
};

// Brute-force KNN detector: score = mean Euclidean distance to the k
// nearest reference vectors.
struct KnnModel {
  std::vector<std::vector<double>> references;
  std::size_t k = 1;
};

// Top-r eigenvectors of the covariance by power iteration with deflation
// (tolerance 1e-10, max 1000 iterations per axis).
PcaModel pca_fit(const std::vector<std::vector<double>>& train, std::size_t r);
double pca_score(const PcaModel& model, const std::vector<double>& v);

KnnModel knn_fit(std::vector<std::vector<double>> references, std::size_t k);
double knn_score(const KnnModel& model, const std::vector<double>& v);

// Windows flattened row-major, the same inputs the GAN sees.
std::vector<std::vector<double>> flatten_windows(const std::vector<Tensor>& windows);

}  // namespace satad

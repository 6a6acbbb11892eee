#include "satad/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "satad/errors.hpp"
#include "satad/rng.hpp"

namespace satad {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PcaModel pca_fit(const std::vector<std::vector<double>>& train, std::size_t r) {
  if (train.empty()) throw ContractError("pca_fit: empty training set");
  std::size_t d = train[0].size();
  if (r > d) throw ConfigError("pca_fit: r exceeds dimension");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const auto& v : train)
    for (std::size_t i = 0; i < d; ++i) model.mean[i] += v[i];
  for (double& m : model.mean) m /= static_cast<double>(train.size());

  // Covariance (population).
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& v : train)
    for (std::size_t i = 0; i < d; ++i) {
      double vi = v[i] - model.mean[i];
      for (std::size_t j = i; j < d; ++j) cov[i][j] += vi * (v[j] - model.mean[j]);
    }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] /= static_cast<double>(train.size());
      cov[j][i] = cov[i][j];
    }

  Rng rng(12345);
  for (std::size_t axis = 0; axis < r; ++axis) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;

    for (int iter = 0; iter < 1000; ++iter) {
      std::vector<double> next(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) next[i] += cov[i][j] * v[j];
      // deflate against already-found axes
      for (const auto& prev : model.axes) {
        double c = dot(next, prev);
        for (std::size_t i = 0; i < d; ++i) next[i] -= c * prev[i];
      }
      double n = std::sqrt(dot(next, next));
      if (n < 1e-300) break;  // zero eigenvalue direction; keep current v
      for (double& x : next) x /= n;
      double diff = 0.0;
      for (std::size_t i = 0; i < d; ++i) diff += std::abs(next[i] - v[i]);
      double diff_neg = 0.0;
      for (std::size_t i = 0; i < d; ++i) diff_neg += std::abs(next[i] + v[i]);
      v = std::move(next);
      if (std::min(diff, diff_neg) < 1e-10) break;
    }
    // final re-orthonormalization against previous axes
    for (const auto& prev : model.axes) {
      double c = dot(v, prev);
      for (std::size_t i = 0; i < d; ++i) v[i] -= c * prev[i];
    }
    double n = std::sqrt(dot(v, v));
    if (n > 1e-300)
      for (double& x : v) x /= n;
    model.axes.push_back(std::move(v));
  }
  return model;
}

double pca_score(const PcaModel& model, const std::vector<double>& v) {
  if (v.size() != model.dim()) throw ShapeError("pca_score: dimension mismatch");
  std::vector<double> centered(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) centered[i] = v[i] - model.mean[i];
  std::vector<double> residual = centered;
  for (const auto& axis : model.axes) {
    double c = dot(centered, axis);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c * axis[i];
  }
  return std::sqrt(dot(residual, residual));
}

KnnModel knn_fit(std::vector<std::vector<double>> references, std::size_t k) {
  if (references.empty()) throw ContractError("knn_fit: empty reference set");
  if (k < 1 || k > references.size()) throw ConfigError("knn_fit: k must be in [1, reference size]");
  return {std::move(references), k};
}

double knn_score(const KnnModel& model, const std::vector<double>& v) {
  std::vector<double> dists;
  dists.reserve(model.references.size());
  for (const auto& ref : model.references) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double d = v[i] - ref[i];
      s += d * d;
    }
    dists.push_back(std::sqrt(s));
  }
  std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(model.k), dists.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < model.k; ++i) sum += dists[i];
  return sum / static_cast<double>(model.k);
}

std::vector<std::vector<double>> flatten_windows(const std::vector<Tensor>& windows) {
  std::vector<std::vector<double>> out;
  out.reserve(windows.size());
  for (const Tensor& w : windows) out.push_back(w.data());
  return out;
}

}  // namespace satad

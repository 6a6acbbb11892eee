#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "satad/errors.hpp"

namespace satad {

struct ClassMetrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EvalReport {
  // Binary view with the anomaly class (0) as positive.
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // One-vs-rest breakdown per label present in the data.
  std::map<int, ClassMetrics> per_class;

  std::string to_json() const;
  std::string to_table() const;
};

struct SweepPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> curve;
  double best_threshold = 0.0;
  double best_f1 = 0.0;

  void save_csv(const std::string& path) const;
};

// Zero-denominator conventions: precision/recall/f1 are 0, never NaN.
double precision_from_counts(std::size_t tp, std::size_t fp);
double recall_from_counts(std::size_t tp, std::size_t fn);
double f1_from_pr(double precision, double recall);

EvalReport evaluate(const std::vector<int>& predicted, const std::vector<int>& truth);

// Thresholds at score quantiles; predicted anomalous when score > threshold.
// Ties on best F1 break to the lower threshold.
SweepResult threshold_sweep(const std::vector<double>& scores, const std::vector<int>& truth,
                            std::size_t n_points);

}  // namespace satad

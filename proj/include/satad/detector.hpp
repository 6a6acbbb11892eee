#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satad/gan.hpp"
#include "satad/timeseries.hpp"

namespace satad {

struct InversionConfig {
  std::size_t steps = 100;
  double lr = 0.05;
  std::size_t restarts = 3;
  std::uint64_t seed = 0;
};

enum class StepAggregation { kMean, kMax };

struct ScoreConfig {
  double lambda = 0.5;  // blend weight between reconstruction and discrimination error
  InversionConfig inversion;
  StepAggregation aggregation = StepAggregation::kMean;
  std::size_t threads = 1;

  void validate() const;
};

struct InversionResult {
  Tensor z;          // w x l
  double objective;  // final ||y - G(z)||^2
  std::vector<double> trajectory;  // objective per accepted iteration, best restart
};

struct ScoreSeries {
  std::vector<double> window_scores;  // Res per window
  std::vector<Tensor> latents;        // inverted z' per window
  std::vector<double> step_scores;    // aggregated, length N
  std::vector<int> step_labels;       // predicted; empty until classify/thresholding
};

// Gradient descent on ||y - G(z)||^2 from `restarts` seeded standard-normal
// starts; backtracking halves the step whenever the objective would
// increase, so trajectories are monotone. Returns the best restart.
InversionResult invert_latent(const GanModel& model, const Tensor& y, const InversionConfig& cfg);

// lambda * ||y - G(z')|| + (1 - lambda) * |D(y) - D(G(z'))|
double score_window(const GanModel& model, const Tensor& y, const Tensor& z_prime, double lambda);

// Per-step score = mean (or max) over all windows covering the step; steps
// covered by no window inherit the nearest covered step's score.
std::vector<double> aggregate_steps(const std::vector<double>& window_scores,
                                    const std::vector<std::size_t>& starts, std::size_t w,
                                    std::size_t n_steps,
                                    StepAggregation agg = StepAggregation::kMean);

// Full scoring pass over a window set. Parallel across windows; results are
// independent of scheduling order (one derived RNG stream per window).
ScoreSeries score_series(const GanModel& model, const WindowSet& windows, std::size_t n_steps,
                         const ScoreConfig& cfg);

// Multi-class rule: per step, label = device id of the lowest-scoring class
// model when that score is <= threshold, else 0 (anomaly). Ties break to the
// lowest class id.
std::vector<int> classify(const std::vector<std::vector<double>>& per_class_step_scores,
                          const std::vector<int>& class_ids, double threshold);

void save_score_csv(const ScoreSeries& series, const std::optional<std::vector<int>>& true_labels,
                    const std::string& path);

}  // namespace satad

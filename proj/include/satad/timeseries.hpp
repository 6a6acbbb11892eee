#pragma once

#include <optional>
#include <string>
#include <vector>

#include "satad/tensor.hpp"

namespace satad {

// Multivariate series: M steps by K channels, optional per-step integer
// labels (0 = anomaly, c >= 1 = normal of device type c).
struct TimeSeries {
  Tensor values;  // M x K
  std::optional<std::vector<int>> labels;
  std::vector<std::string> channel_names;

  std::size_t length() const { return values.rows(); }
  std::size_t channels() const { return values.cols(); }
  void validate() const;
};

struct WindowConfig {
  std::size_t w = 32;
  std::size_t s = 4;
};

struct WindowSet {
  std::vector<Tensor> windows;  // each w x K
  std::vector<std::size_t> start_indices;
  std::vector<int> window_labels;
  std::size_t w = 0;
  std::size_t s = 0;

  std::size_t count() const { return windows.size(); }
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at kStdFloor for constant channels
  static constexpr double kStdFloor = 1e-8;
};

// CSV: header row required, optional leading `timestamp` column (ignored),
// K feature columns, optional trailing `label` integer column.
TimeSeries load_csv(const std::string& path);
void save_csv(const TimeSeries& ts, const std::string& path);

// Binary cache: magic "SATD", u16 version, u64 M, u64 K, row-major f64
// values, then u8 label-presence flag and i32 labels when present.
TimeSeries load_cache(const std::string& path);
void save_cache(const TimeSeries& ts, const std::string& path);

NormStats fit_normalizer(const TimeSeries& train);
TimeSeries apply_normalizer(const TimeSeries& ts, const NormStats& stats);
TimeSeries invert_normalizer(const TimeSeries& ts, const NormStats& stats);

WindowSet make_windows(const TimeSeries& ts, const WindowConfig& cfg);

// Streaming dedup: drop a window when its MSE to the last retained window is
// strictly below the threshold. The first window is always retained.
WindowSet dedup_filter(const WindowSet& ws, double mse_threshold);

}  // namespace satad

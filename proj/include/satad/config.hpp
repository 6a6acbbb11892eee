#pragma once

#include <cstdint>
#include <string>

#include "satad/detector.hpp"
#include "satad/timeseries.hpp"
#include "satad/trainer.hpp"

namespace satad {

// Flat `key = value` config file, `#` comments. Flags override file values.
struct RunConfig {
  WindowConfig window;           // training windows
  std::size_t detect_stride = 2;  // denser scan at detection time
  std::size_t latent_dim = 4;
  std::size_t hidden_dim = 16;

  TrainConfig train;
  ScoreConfig detect;
  bool threshold_auto = true;
  double threshold = 0.0;  // used when threshold_auto is false

  double dedup_threshold = 1e-3;

  std::size_t synth_channels = 3;
  std::size_t train_length = 20000;
  std::size_t test_length = 5000;
  double anomaly_rate = 0.05;
  double anomaly_magnitude = 6.0;
  double noise_sigma = 0.25;
  int device_count = 1;

  std::uint64_t seed = 42;
  std::string out_dir = "out";

  // Scoring uses a short partial inversion: a fully converged descent
  // reconstructs anomalies along with the signal (the per-step latent is
  // overcomplete), while a few steps capture only the dominant on-manifold
  // component and leave anomalies as residual.
  RunConfig() {
    detect.inversion.steps = 2;
    detect.inversion.lr = 0.2;
    detect.inversion.restarts = 3;
  }

  void set(const std::string& key, const std::string& value);
  void apply_seed(std::uint64_t s);

  static RunConfig load(const std::string& path);
  static RunConfig defaults() { RunConfig c; c.apply_seed(c.seed); return c; }
};

}  // namespace satad

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satad/gan.hpp"
#include "satad/timeseries.hpp"

namespace satad {

struct SchedulerConfig {
  double decay_factor = 1.0;  // in (0, 1]; 1 disables decay
  std::size_t decay_every = 10;  // epochs
};

struct TrainConfig {
  std::size_t epochs = 16;
  std::size_t batch_size = 32;
  // Small equal rates stay in equilibrium on multi-channel data; larger
  // rates let the generator's output scale run away from the data scale.
  double lr_g = 5e-4;
  double lr_d = 5e-4;
  SchedulerConfig scheduler;
  std::size_t sample_average_every = 0;  // 0 = off
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainLogEntry {
  std::size_t step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
  double lr_g = 0.0;
  double lr_d = 0.0;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  void save_csv(const std::string& path) const;
};

// -mean[log D(x)] - mean[log(1 - D(G(z)))], probabilities clamped to
// [1e-7, 1 - 1e-7] inside the logs.
double d_loss(const GanModel& model, const std::vector<Tensor>& x_batch,
              const std::vector<Tensor>& z_batch);

// Non-saturating generator loss -mean[log D(G(z))].
double g_loss(const GanModel& model, const std::vector<Tensor>& z_batch);

// Alternating adversarial training: one D update then one G update per
// batch, SGD with momentum 0.9, step-decay scheduler, optional batch
// averaging every n batches. Deterministic per cfg.seed.
TrainLog train(GanModel& model, const WindowSet& windows, const TrainConfig& cfg);

double scheduled_lr(double lr0, const SchedulerConfig& sched, std::size_t epoch);

}  // namespace satad

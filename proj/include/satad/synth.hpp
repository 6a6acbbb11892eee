#pragma once

#include <cstdint>
#include <vector>

#include "satad/timeseries.hpp"

namespace satad {

struct SinComponent {
  double period = 64.0;  // in steps
  double amplitude = 1.0;
  double phase = 0.0;  // radians
};

struct ChannelSpec {
  std::vector<SinComponent> components;
  double offset = 0.0;
};

enum class AnomalyKind { kSpike, kLevelShift, kDrift };

struct AnomalySpec {
  std::vector<AnomalyKind> kinds = {AnomalyKind::kSpike, AnomalyKind::kLevelShift,
                                    AnomalyKind::kDrift};
  double rate = 0.0;       // target fraction of anomalous steps
  double magnitude = 2.0;  // base injection amplitude, in raw signal units
};

struct SynthSpec {
  std::size_t length = 10000;
  std::size_t t_offset = 0;  // phase origin: step t evaluates at t + t_offset
  std::vector<ChannelSpec> channels;
  std::vector<double> mixing;  // K x K row-major; empty = identity
  double noise_sigma = 0.25;
  int device_id = 1;
  AnomalySpec anomaly;

  std::size_t channel_count() const { return channels.size(); }

  // K channels with incommensurate multi-sinusoid content and mild
  // cross-channel mixing; phases vary per device id.
  static SynthSpec preset(std::size_t k, std::size_t length, int device_id = 1);
};

// Deterministic per seed. Injected steps are labeled 0, clean steps carry
// spec.device_id. The injected step count lands on round(rate * length) up
// to trimming of the final event.
TimeSeries synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace satad

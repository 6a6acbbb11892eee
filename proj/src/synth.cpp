#include "satad/synth.hpp"

#include <cmath>
#include <numbers>

#include "satad/errors.hpp"
#include "satad/rng.hpp"

namespace satad {

SynthSpec SynthSpec::preset(std::size_t k, std::size_t length, int device_id) {
  SynthSpec spec;
  spec.length = length;
  spec.device_id = device_id;
  // Incommensurate periods so the joint signal does not repeat quickly.
  const double base_periods[] = {47.0, 89.0, 131.0, 173.0, 211.0, 257.0};
  for (std::size_t c = 0; c < k; ++c) {
    ChannelSpec ch;
    ch.offset = 0.3 * static_cast<double>(c);
    for (std::size_t j = 0; j < 3; ++j) {
      SinComponent comp;
      comp.period = base_periods[(c * 3 + j) % 6] * (1.0 + 0.07 * static_cast<double>(c));
      comp.amplitude = 1.0 / (1.0 + static_cast<double>(j));
      comp.phase = 0.9 * static_cast<double>(c + j) + 0.31 * static_cast<double>(device_id);
      ch.components.push_back(comp);
    }
    spec.channels.push_back(ch);
  }
  // Mild off-diagonal coupling.
  spec.mixing.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      spec.mixing[i * k + j] = i == j ? 1.0 : 0.25 / static_cast<double>(k);
  return spec;
}

namespace {

struct Event {
  AnomalyKind kind;
  std::size_t start;
  std::size_t len;
  std::size_t channel;
  double sign;
};

}  // namespace

TimeSeries synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.channels.empty()) throw ConfigError("synth spec needs at least one channel");
  if (spec.anomaly.rate < 0.0 || spec.anomaly.rate > 1.0)
    throw ConfigError("anomaly rate must be in [0, 1]");
  if (!spec.mixing.empty() && spec.mixing.size() != spec.channel_count() * spec.channel_count())
    throw ConfigError("mixing matrix must be K x K");

  std::size_t m = spec.length;
  std::size_t k = spec.channel_count();
  Rng rng(seed);

  // Clean per-channel signal, then cross-channel mixing, then noise.
  Tensor clean({m, k});
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t c = 0; c < k; ++c) {
      double v = spec.channels[c].offset;
      for (const SinComponent& comp : spec.channels[c].components)
        v += comp.amplitude *
             std::sin(2.0 * std::numbers::pi * static_cast<double>(t + spec.t_offset) /
                          comp.period +
                      comp.phase);
      clean(t, c) = v;
    }

  TimeSeries ts;
  ts.values = Tensor({m, k});
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t c = 0; c < k; ++c) {
      double v = 0.0;
      if (spec.mixing.empty())
        v = clean(t, c);
      else
        for (std::size_t j = 0; j < k; ++j) v += spec.mixing[c * k + j] * clean(t, j);
      ts.values(t, c) = v + rng.normal(0.0, spec.noise_sigma);
    }
  for (std::size_t c = 0; c < k; ++c) ts.channel_names.push_back("c" + std::to_string(c));

  std::vector<int> labels(m, spec.device_id);

  // Event placement: keep injecting non-overlapping events until the target
  // anomalous step count is reached, trimming the last event to land on it.
  std::size_t target = static_cast<std::size_t>(std::llround(spec.anomaly.rate * static_cast<double>(m)));
  if (target > 0 && !spec.anomaly.kinds.empty()) {
    std::vector<bool> occupied(m, false);
    std::size_t injected = 0;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 200 * (target + 1);
    while (injected < target && attempts < max_attempts) {
      ++attempts;
      Event ev;
      ev.kind = spec.anomaly.kinds[rng.index(spec.anomaly.kinds.size())];
      switch (ev.kind) {
        case AnomalyKind::kSpike: ev.len = 1; break;
        case AnomalyKind::kLevelShift: ev.len = 20 + rng.index(31); break;
        case AnomalyKind::kDrift: ev.len = 50 + rng.index(51); break;
      }
      ev.len = std::min(ev.len, target - injected);
      if (ev.len == 0 || ev.len > m) continue;
      ev.start = rng.index(m - ev.len + 1);
      ev.channel = rng.index(k);
      ev.sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      bool clash = false;
      for (std::size_t t = ev.start; t < ev.start + ev.len && !clash; ++t)
        if (occupied[t]) clash = true;
      if (clash) continue;

      double mag = spec.anomaly.magnitude;
      for (std::size_t t = ev.start; t < ev.start + ev.len; ++t) {
        double delta = 0.0;
        switch (ev.kind) {
          case AnomalyKind::kSpike: delta = ev.sign * mag; break;
          case AnomalyKind::kLevelShift: delta = ev.sign * mag * 0.5; break;
          case AnomalyKind::kDrift:
            delta = ev.sign * mag * 0.75 * static_cast<double>(t - ev.start + 1) /
                    static_cast<double>(ev.len);
            break;
        }
        ts.values(t, ev.channel) += delta;
        occupied[t] = true;
        labels[t] = 0;
      }
      injected += ev.len;
    }
  }

  ts.labels = std::move(labels);
  ts.validate();
  return ts;
}

}  // namespace satad

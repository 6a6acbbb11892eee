#include "satad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "satad/errors.hpp"
#include "satad/rng.hpp"
#include "satad/trainer.hpp"

namespace satad {

namespace fs = std::filesystem;

namespace {

std::string device_path(const RunConfig& cfg, const std::string& stem, int id,
                        const std::string& ext) {
  return (fs::path(cfg.out_dir) / (stem + "_d" + std::to_string(id) + ext)).string();
}

void ensure_out_dir(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

}  // namespace

SynthSpec synth_spec_from_config(const RunConfig& cfg, int device_id, bool with_anomalies,
                                 std::size_t length) {
  SynthSpec spec = SynthSpec::preset(cfg.synth_channels, length, device_id);
  // The test stream continues the device's timeline where training data
  // ended instead of replaying the same phase range.
  spec.t_offset = with_anomalies ? cfg.train_length : 0;
  spec.noise_sigma = cfg.noise_sigma;
  spec.anomaly.rate = with_anomalies ? cfg.anomaly_rate : 0.0;
  spec.anomaly.magnitude = cfg.anomaly_magnitude;
  return spec;
}

SynthPaths run_synth(const RunConfig& cfg) {
  if (cfg.device_count < 1) throw ConfigError("device_count must be >= 1");
  ensure_out_dir(cfg);
  SynthPaths paths;

  for (int id = 1; id <= cfg.device_count; ++id) {
    SynthSpec spec = synth_spec_from_config(cfg, id, false, cfg.train_length);
    TimeSeries train = synth_generate(spec, Rng::derive(cfg.seed, 100 + static_cast<std::uint64_t>(id)));
    std::string path = device_path(cfg, "train", id, ".csv");
    save_csv(train, path);
    paths.train_paths.push_back(path);
  }

  // Test stream: per-device segments with injected anomalies, concatenated.
  std::size_t seg = cfg.test_length / static_cast<std::size_t>(cfg.device_count);
  TimeSeries test;
  bool first = true;
  for (int id = 1; id <= cfg.device_count; ++id) {
    std::size_t len = id == cfg.device_count ? cfg.test_length - seg * static_cast<std::size_t>(cfg.device_count - 1) : seg;
    SynthSpec spec = synth_spec_from_config(cfg, id, true, len);
    TimeSeries part = synth_generate(spec, Rng::derive(cfg.seed, 200 + static_cast<std::uint64_t>(id)));
    if (first) {
      test = std::move(part);
      first = false;
    } else {
      std::size_t old_m = test.length();
      Tensor merged({old_m + part.length(), test.channels()});
      std::copy(test.values.data().begin(), test.values.data().end(), merged.data().begin());
      std::copy(part.values.data().begin(), part.values.data().end(),
                merged.data().begin() + static_cast<std::ptrdiff_t>(old_m * test.channels()));
      test.values = std::move(merged);
      test.labels->insert(test.labels->end(), part.labels->begin(), part.labels->end());
    }
  }
  paths.test_path = (fs::path(cfg.out_dir) / "test.csv").string();
  save_csv(test, paths.test_path);
  return paths;
}

void save_norm(const NormStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[64];
  for (std::size_t c = 0; c < stats.mean.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", stats.mean[c], stats.stddev[c]);
    out << buf;
  }
}

NormStats load_norm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing normalization stats: " + path);
  NormStats stats;
  double mean, stddev;
  while (in >> mean >> stddev) {
    stats.mean.push_back(mean);
    stats.stddev.push_back(stddev);
  }
  if (stats.mean.empty()) throw ParseError("empty normalization stats: " + path);
  return stats;
}

std::vector<TrainedClass> run_train(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  std::vector<TrainedClass> classes;
  for (int id = 1; id <= cfg.device_count; ++id) {
    TimeSeries raw = load_csv(device_path(cfg, "train", id, ".csv"));
    if (raw.labels)
      for (int lab : *raw.labels)
        if (lab == 0) throw ContractError("training data contains anomaly labels (0)");

    TrainedClass cls;
    cls.device_id = id;
    cls.stats = fit_normalizer(raw);
    TimeSeries norm = apply_normalizer(raw, cls.stats);
    WindowSet windows = make_windows(norm, cfg.window);
    windows = dedup_filter(windows, cfg.dedup_threshold);

    cls.model = gan_init(Rng::derive(cfg.seed, 300 + static_cast<std::uint64_t>(id)), cfg.window.w,
                         raw.channels(), cfg.latent_dim, cfg.hidden_dim);
    TrainConfig tc = cfg.train;
    tc.seed = Rng::derive(cfg.seed, 400 + static_cast<std::uint64_t>(id));
    TrainLog log = train(cls.model, windows, tc);

    gan_save(cls.model, device_path(cfg, "model", id, ".ckpt"));
    log.save_csv(device_path(cfg, "trainlog", id, ".csv"));
    save_norm(cls.stats, device_path(cfg, "norm", id, ".txt"));
    classes.push_back(std::move(cls));
  }
  return classes;
}

std::vector<TrainedClass> load_trained(const RunConfig& cfg) {
  std::vector<TrainedClass> classes;
  for (int id = 1; id <= cfg.device_count; ++id) {
    TrainedClass cls;
    cls.device_id = id;
    cls.model = gan_load(device_path(cfg, "model", id, ".ckpt"));
    cls.stats = load_norm(device_path(cfg, "norm", id, ".txt"));
    classes.push_back(std::move(cls));
  }
  return classes;
}

DetectResult run_detect(const RunConfig& cfg, const std::vector<TrainedClass>& classes,
                        const std::string& test_path, bool write_outputs) {
  if (classes.empty()) throw ConfigError("no trained models supplied");
  TimeSeries test = load_csv(test_path);

  DetectResult result;
  std::vector<std::vector<double>> per_class_scores;
  std::vector<int> class_ids;
  ScoreSeries first_series;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    TimeSeries norm = apply_normalizer(test, classes[c].stats);
    WindowSet windows = make_windows(norm, {cfg.window.w, cfg.detect_stride});
    ScoreConfig sc = cfg.detect;
    sc.inversion.seed = Rng::derive(cfg.seed, 500 + static_cast<std::uint64_t>(classes[c].device_id));
    ScoreSeries series = score_series(classes[c].model, windows, test.length(), sc);
    per_class_scores.push_back(series.step_scores);
    class_ids.push_back(classes[c].device_id);
    if (c == 0) first_series = std::move(series);
  }

  // Combined per-step score: min over class models.
  std::size_t n = per_class_scores[0].size();
  result.step_scores.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double mn = per_class_scores[0][t];
    for (const auto& s : per_class_scores) mn = std::min(mn, s[t]);
    result.step_scores[t] = mn;
  }

  if (!test.labels) throw ContractError("test data has no labels; cannot evaluate or auto-threshold");
  result.truth = *test.labels;

  result.sweep = threshold_sweep(result.step_scores, result.truth, 200);
  result.threshold = cfg.threshold_auto ? result.sweep.best_threshold : cfg.threshold;
  result.predicted = classify(per_class_scores, class_ids, result.threshold);
  result.report = evaluate(result.predicted, result.truth);

  if (write_outputs) {
    ensure_out_dir(cfg);
    first_series.step_scores = result.step_scores;
    first_series.step_labels = result.predicted;
    save_score_csv(first_series, test.labels, (fs::path(cfg.out_dir) / "scores.csv").string());
    result.sweep.save_csv((fs::path(cfg.out_dir) / "curve.csv").string());
    std::ofstream rep((fs::path(cfg.out_dir) / "report.json").string());
    rep << result.report.to_json() << '\n';
  }
  return result;
}

BenchReport run_bench(const RunConfig& cfg, const TrainedClass& cls, double duration_s,
                      bool score_only) {
  // Pre-generate a synthetic stream once; cycle through its windows.
  SynthSpec spec = synth_spec_from_config(cfg, cls.device_id, true, 4096);
  TimeSeries stream = synth_generate(spec, Rng::derive(cfg.seed, 900));
  TimeSeries norm = apply_normalizer(stream, cls.stats);
  WindowSet windows = make_windows(norm, {cfg.window.w, cfg.detect_stride});

  BenchReport report;
  std::vector<double> latencies_ms;
  auto t_begin = std::chrono::steady_clock::now();
  std::size_t i = 0;
  while (true) {
    auto t0 = std::chrono::steady_clock::now();
    double elapsed = std::chrono::duration<double>(t0 - t_begin).count();
    if (elapsed >= duration_s) break;

    const Tensor& y = windows.windows[i % windows.count()];
    double score;
    if (score_only) {
      score = 1.0 - gan_discriminate(cls.model, y);
    } else {
      ScoreConfig sc = cfg.detect;
      InversionConfig inv = sc.inversion;
      inv.seed = Rng::derive(cfg.seed, 1000 + i);
      InversionResult res = invert_latent(cls.model, y, inv);
      score = score_window(cls.model, y, res.z, sc.lambda);
    }
    (void)score;
    auto t1 = std::chrono::steady_clock::now();
    latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    ++i;
  }
  report.windows_scored = i;
  report.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  // Each window advances the stream by the detection stride.
  report.steps_per_second =
      static_cast<double>(i * cfg.detect_stride) / std::max(report.elapsed_s, 1e-9);
  if (!latencies_ms.empty()) {
    std::sort(latencies_ms.begin(), latencies_ms.end());
    report.p50_ms = latencies_ms[latencies_ms.size() / 2];
    report.p99_ms = latencies_ms[std::min(latencies_ms.size() - 1,
                                          static_cast<std::size_t>(
                                              std::ceil(0.99 * static_cast<double>(latencies_ms.size())) - 1))];
  }
  report.pass = score_only && report.steps_per_second >= kRealtimeStepsPerSecond;
  return report;
}

}  // namespace satad

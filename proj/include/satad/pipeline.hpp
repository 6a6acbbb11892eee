#pragma once

#include <string>
#include <vector>

#include "satad/config.hpp"
#include "satad/detector.hpp"
#include "satad/evaluator.hpp"
#include "satad/gan.hpp"
#include "satad/synth.hpp"
#include "satad/timeseries.hpp"

namespace satad {

// End-to-end wiring used by both the CLI and the acceptance suite. All file
// outputs live under cfg.out_dir (created on demand) with fixed names:
//   train_d<id>.csv, test.csv            (synth)
//   model_d<id>.ckpt, trainlog_d<id>.csv, norm_d<id>.txt   (train)
//   scores.csv, report.json, curve.csv   (detect)

SynthSpec synth_spec_from_config(const RunConfig& cfg, int device_id, bool with_anomalies,
                                 std::size_t length);

struct SynthPaths {
  std::vector<std::string> train_paths;
  std::string test_path;
};
SynthPaths run_synth(const RunConfig& cfg);

struct TrainedClass {
  int device_id = 0;
  GanModel model;
  NormStats stats;
};
std::vector<TrainedClass> run_train(const RunConfig& cfg);

std::vector<TrainedClass> load_trained(const RunConfig& cfg);

struct DetectResult {
  std::vector<double> step_scores;  // min over class models (single class: its scores)
  std::vector<int> predicted;
  std::vector<int> truth;
  double threshold = 0.0;
  EvalReport report;
  SweepResult sweep;
};
DetectResult run_detect(const RunConfig& cfg, const std::vector<TrainedClass>& classes,
                        const std::string& test_path, bool write_outputs = true);

struct BenchReport {
  double steps_per_second = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  std::size_t windows_scored = 0;
  double elapsed_s = 0.0;
  bool pass = false;  // against kRealtimeStepsPerSecond, score-only mode
};
// Throughput target: 4,628,800 readings per day rounded up to whole steps/s.
inline constexpr double kRealtimeStepsPerSecond = 54.0;

// score_only: discrimination-only scoring (no latent inversion).
BenchReport run_bench(const RunConfig& cfg, const TrainedClass& cls, double duration_s,
                      bool score_only);

void save_norm(const NormStats& stats, const std::string& path);
NormStats load_norm(const std::string& path);

}  // namespace satad

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satad/config.hpp"
#include "satad/errors.hpp"
#include "satad/pipeline.hpp"

namespace {

using satad::RunConfig;

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::string> threshold;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "flat key=value config file");
  cmd->add_option("--seed", flags.seed, "master seed; determines all stochastic outputs");
  cmd->add_option("--lambda", flags.lambda, "score blend weight in [0,1]");
  cmd->add_option("--threshold", flags.threshold, "score threshold, or 'auto'");
  cmd->add_option("--out", flags.out, "output directory");
}

RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg = flags.config_path ? RunConfig::load(*flags.config_path) : RunConfig::defaults();
  if (flags.seed) cfg.apply_seed(*flags.seed);
  if (flags.lambda) cfg.set("lambda", std::to_string(*flags.lambda));
  if (flags.threshold) cfg.set("threshold", *flags.threshold);
  if (flags.out) cfg.out_dir = *flags.out;
  if (const char* env = std::getenv("SATAD_THREADS")) cfg.set("threads", env);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-attention GAN anomaly detection for multivariate sensor streams"};
  app.require_subcommand(1);

  CommonFlags flags;
  double bench_duration = 60.0;

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic train/test CSVs");
  CLI::App* train = app.add_subcommand("train", "train one GAN per device type");
  CLI::App* detect = app.add_subcommand("detect", "score a test stream and evaluate");
  CLI::App* eval = app.add_subcommand("eval", "evaluate an existing scores.csv");
  CLI::App* bench = app.add_subcommand("bench", "measure scoring throughput");
  for (CLI::App* cmd : {synth, train, detect, eval, bench}) add_common(cmd, flags);
  bench->add_option("--duration", bench_duration, "seconds per mode (default 60)");

  std::string test_path, scores_path;
  detect->add_option("--test", test_path, "test CSV (default <out>/test.csv)");
  eval->add_option("--scores", scores_path, "scores CSV with true_label column");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = resolve(flags);

    if (synth->parsed()) {
      satad::SynthPaths paths = satad::run_synth(cfg);
      for (const auto& p : paths.train_paths) std::printf("wrote %s\n", p.c_str());
      std::printf("wrote %s\n", paths.test_path.c_str());
    } else if (train->parsed()) {
      auto classes = satad::run_train(cfg);
      for (const auto& cls : classes)
        std::printf("trained device %d: %s\n", cls.device_id,
                    (std::filesystem::path(cfg.out_dir) /
                     ("model_d" + std::to_string(cls.device_id) + ".ckpt"))
                        .c_str());
    } else if (detect->parsed()) {
      if (test_path.empty())
        test_path = (std::filesystem::path(cfg.out_dir) / "test.csv").string();
      auto classes = satad::load_trained(cfg);
      satad::DetectResult result = satad::run_detect(cfg, classes, test_path);
      std::printf("threshold %.6g (%s)\n", result.threshold,
                  cfg.threshold_auto ? "auto" : "fixed");
      std::fputs(result.report.to_table().c_str(), stdout);
    } else if (eval->parsed()) {
      if (scores_path.empty())
        scores_path = (std::filesystem::path(cfg.out_dir) / "scores.csv").string();
      std::ifstream in(scores_path);
      if (!in) throw satad::IoError("missing scores file: " + scores_path);
      std::string line;
      if (!std::getline(in, line) || line.find("true_label") == std::string::npos)
        throw satad::ParseError("scores file lacks a true_label column: " + scores_path);
      std::vector<double> scores;
      std::vector<int> predicted, truth;
      while (std::getline(in, line)) {
        std::size_t c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos)
          throw satad::ParseError("malformed scores row: " + line);
        scores.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        predicted.push_back(std::stoi(line.substr(c2 + 1, c3 - c2 - 1)));
        truth.push_back(std::stoi(line.substr(c3 + 1)));
      }
      satad::EvalReport report = satad::evaluate(predicted, truth);
      satad::SweepResult sweep = satad::threshold_sweep(scores, truth, 200);
      std::fputs(report.to_table().c_str(), stdout);
      std::printf("best_f1 %.4f at threshold %.6g\n", sweep.best_f1, sweep.best_threshold);
    } else if (bench->parsed()) {
      auto classes = satad::load_trained(cfg);
      satad::BenchReport so = satad::run_bench(cfg, classes.front(), bench_duration, true);
      satad::BenchReport full = satad::run_bench(cfg, classes.front(), bench_duration, false);
      std::printf("target %.0f steps/s\n", satad::kRealtimeStepsPerSecond);
      std::printf("score-only: %.1f steps/s over %.1fs (p50 %.3f ms, p99 %.3f ms) -> %s\n",
                  so.steps_per_second, so.elapsed_s, so.p50_ms, so.p99_ms,
                  so.pass ? "PASS" : "FAIL");
      std::printf("full-inversion: %.1f steps/s over %.1fs (p50 %.3f ms, p99 %.3f ms)\n",
                  full.steps_per_second, full.elapsed_s, full.p50_ms, full.p99_ms);
      if (!so.pass) {
        std::fprintf(stderr, "error: score-only throughput below realtime target\n");
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

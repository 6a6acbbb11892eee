#include "satad/config.hpp"

#include <cstdlib>
#include <fstream>

#include "satad/errors.hpp"

namespace satad {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') throw ConfigError("bad integer for " + key + ": " + v);
  return x;
}

double parse_f64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw ConfigError("bad number for " + key + ": " + v);
  return x;
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  detect.inversion.seed = s;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "window_w") window.w = parse_u64(key, value);
  else if (key == "window_s") window.s = parse_u64(key, value);
  else if (key == "detect_stride") detect_stride = parse_u64(key, value);
  else if (key == "latent_dim") latent_dim = parse_u64(key, value);
  else if (key == "hidden_dim") hidden_dim = parse_u64(key, value);
  else if (key == "epochs") train.epochs = parse_u64(key, value);
  else if (key == "batch_size") train.batch_size = parse_u64(key, value);
  else if (key == "lr_g") train.lr_g = parse_f64(key, value);
  else if (key == "lr_d") train.lr_d = parse_f64(key, value);
  else if (key == "decay_factor") train.scheduler.decay_factor = parse_f64(key, value);
  else if (key == "decay_every") train.scheduler.decay_every = parse_u64(key, value);
  else if (key == "sample_average_every") train.sample_average_every = parse_u64(key, value);
  else if (key == "seed") apply_seed(parse_u64(key, value));
  else if (key == "lambda") detect.lambda = parse_f64(key, value);
  else if (key == "inversion_steps") detect.inversion.steps = parse_u64(key, value);
  else if (key == "inversion_lr") detect.inversion.lr = parse_f64(key, value);
  else if (key == "inversion_restarts") detect.inversion.restarts = parse_u64(key, value);
  else if (key == "aggregation") {
    if (value == "mean") detect.aggregation = StepAggregation::kMean;
    else if (value == "max") detect.aggregation = StepAggregation::kMax;
    else throw ConfigError("aggregation must be mean or max");
  } else if (key == "threshold") {
    if (value == "auto") threshold_auto = true;
    else {
      threshold_auto = false;
      threshold = parse_f64(key, value);
    }
  } else if (key == "dedup_threshold") dedup_threshold = parse_f64(key, value);
  else if (key == "synth_channels") synth_channels = parse_u64(key, value);
  else if (key == "train_length") train_length = parse_u64(key, value);
  else if (key == "test_length") test_length = parse_u64(key, value);
  else if (key == "anomaly_rate") anomaly_rate = parse_f64(key, value);
  else if (key == "anomaly_magnitude") anomaly_magnitude = parse_f64(key, value);
  else if (key == "noise_sigma") noise_sigma = parse_f64(key, value);
  else if (key == "device_count") device_count = static_cast<int>(parse_u64(key, value));
  else if (key == "out_dir") out_dir = value;
  else if (key == "threads") detect.threads = parse_u64(key, value);
  else throw ConfigError("unknown config key: " + key);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg = RunConfig::defaults();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace satad

#include "satad/detector.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "satad/errors.hpp"
#include "satad/rng.hpp"

namespace satad {

void ScoreConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
  if (inversion.steps < 1) throw ConfigError("inversion steps must be >= 1");
  if (inversion.restarts < 1) throw ConfigError("inversion restarts must be >= 1");
}

namespace {

double objective(const GanModel& model, const Tensor& y, const Tensor& z) {
  Tensor out = gan_generate(model, z);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double d = y[i] - out[i];
    s += d * d;
  }
  return s;
}

}  // namespace

InversionResult invert_latent(const GanModel& model, const Tensor& y, const InversionConfig& cfg) {
  if (cfg.steps < 1 || cfg.restarts < 1) throw ConfigError("inversion needs steps >= 1, restarts >= 1");

  InversionResult best;
  best.objective = std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(Rng::derive(cfg.seed, restart));
    Tensor z({model.w, model.l});
    for (double& v : z.data()) v = rng.normal();

    double f = objective(model, y, z);
    if (!std::isfinite(f)) throw ContractError("non-finite inversion objective at start");
    double step = cfg.lr;
    std::vector<double> trajectory = {f};

    for (std::size_t it = 0; it < cfg.steps && step > 0.0; ++it) {
      GradTape tape;
      GanVars vars = GanVars::bind(tape, model);
      auto z_id = tape.leaf(z);
      auto diff = tape.sub(tape.leaf(y), vars.generate(z_id));
      auto loss = tape.sum(tape.mul(diff, diff));
      auto grads = tape.backward(loss);
      const Tensor& dz = grads[z_id];

      // Backtracking: halve the step while it would increase the objective.
      bool accepted = false;
      for (int halvings = 0; halvings < 40; ++halvings) {
        Tensor cand = z;
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= step * dz[i];
        double f_cand = objective(model, y, cand);
        if (!std::isfinite(f_cand)) { step *= 0.5; continue; }
        if (f_cand <= f) {
          z = std::move(cand);
          f = f_cand;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;           // no descent direction progress left
      trajectory.push_back(f);
      step = std::min(step * 1.25, cfg.lr * 8.0);
    }

    if (f < best.objective) {
      best.objective = f;
      best.z = std::move(z);
      best.trajectory = std::move(trajectory);
    }
  }
  return best;
}

double score_window(const GanModel& model, const Tensor& y, const Tensor& z_prime, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
  Tensor recon = gan_generate(model, z_prime);
  double rec_sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = y[i] - recon[i];
    rec_sq += d * d;
  }
  double rec = std::sqrt(rec_sq);
  double disc = std::abs(gan_discriminate(model, y) - gan_discriminate(model, recon));
  return lambda * rec + (1.0 - lambda) * disc;
}

std::vector<double> aggregate_steps(const std::vector<double>& window_scores,
                                    const std::vector<std::size_t>& starts, std::size_t w,
                                    std::size_t n_steps, StepAggregation agg) {
  if (window_scores.size() != starts.size())
    throw ContractError("aggregate_steps: score/start count mismatch");
  std::vector<double> acc(n_steps, 0.0);
  std::vector<std::size_t> count(n_steps, 0);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    for (std::size_t t = starts[i]; t < std::min(starts[i] + w, n_steps); ++t) {
      if (agg == StepAggregation::kMean) acc[t] += window_scores[i];
      else acc[t] = count[t] == 0 ? window_scores[i] : std::max(acc[t], window_scores[i]);
      ++count[t];
    }
  }
  std::vector<double> out(n_steps, 0.0);
  for (std::size_t t = 0; t < n_steps; ++t)
    if (count[t] > 0)
      out[t] = agg == StepAggregation::kMean ? acc[t] / static_cast<double>(count[t]) : acc[t];

  // Uncovered steps inherit the nearest covered score (ties to the left).
  std::ptrdiff_t last_covered = -1;
  std::vector<std::ptrdiff_t> nearest(n_steps, -1);
  for (std::size_t t = 0; t < n_steps; ++t) {
    if (count[t] > 0) last_covered = static_cast<std::ptrdiff_t>(t);
    nearest[t] = last_covered;
  }
  std::ptrdiff_t next_covered = -1;
  for (std::ptrdiff_t t = static_cast<std::ptrdiff_t>(n_steps) - 1; t >= 0; --t) {
    if (count[t] > 0) next_covered = t;
    std::ptrdiff_t left = nearest[t];
    if (count[t] == 0) {
      bool use_left = left >= 0 && (next_covered < 0 || t - left <= next_covered - t);
      std::ptrdiff_t src = use_left ? left : next_covered;
      if (src < 0) throw ContractError("aggregate_steps: no window covers any step");
      out[t] = out[src];
    }
  }
  return out;
}

ScoreSeries score_series(const GanModel& model, const WindowSet& windows, std::size_t n_steps,
                         const ScoreConfig& cfg) {
  cfg.validate();
  std::size_t m = windows.count();
  ScoreSeries series;
  series.window_scores.assign(m, 0.0);
  series.latents.assign(m, Tensor());

  auto score_one = [&](std::size_t i) {
    InversionConfig inv = cfg.inversion;
    inv.seed = Rng::derive(cfg.inversion.seed, i);
    InversionResult res = invert_latent(model, windows.windows[i], inv);
    series.window_scores[i] = score_window(model, windows.windows[i], res.z, cfg.lambda);
    series.latents[i] = std::move(res.z);
  };

  std::size_t n_threads = std::max<std::size_t>(1, cfg.threads);
  if (n_threads == 1 || m < 2) {
    for (std::size_t i = 0; i < m; ++i) score_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, m); ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < m; i = next.fetch_add(1)) score_one(i);
      });
    for (auto& th : pool) th.join();
  }

  series.step_scores = aggregate_steps(series.window_scores, windows.start_indices, windows.w,
                                       n_steps, cfg.aggregation);
  return series;
}

std::vector<int> classify(const std::vector<std::vector<double>>& per_class_step_scores,
                          const std::vector<int>& class_ids, double threshold) {
  if (per_class_step_scores.empty()) throw ConfigError("classify: no class models supplied");
  if (per_class_step_scores.size() != class_ids.size())
    throw ContractError("classify: score/id count mismatch");
  std::size_t n = per_class_step_scores[0].size();
  for (const auto& s : per_class_step_scores)
    if (s.size() != n) throw ContractError("classify: inconsistent step counts");

  std::vector<int> labels(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (std::size_t c = 0; c < class_ids.size(); ++c) {
      double s = per_class_step_scores[c][t];
      if (s < best || (s == best && class_ids[c] < best_id)) {
        best = s;
        best_id = class_ids[c];
      }
    }
    labels[t] = best <= threshold ? best_id : 0;
  }
  return labels;
}

void save_score_csv(const ScoreSeries& series, const std::optional<std::vector<int>>& true_labels,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step,score,predicted_label";
  if (true_labels) out << ",true_label";
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < series.step_scores.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g", t, series.step_scores[t]);
    out << buf << ',' << (t < series.step_labels.size() ? series.step_labels[t] : -1);
    if (true_labels) out << ',' << (*true_labels)[t];
    out << '\n';
  }
}

}  // namespace satad

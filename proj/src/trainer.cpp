#include "satad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "satad/errors.hpp"
#include "satad/rng.hpp"

namespace satad {

namespace {
constexpr double kProbClampLo = 1e-7;
constexpr double kProbClampHi = 1.0 - 1e-7;
constexpr double kMomentum = 0.9;

GradTape::Id clamped_log(GradTape& t, GradTape::Id p) {
  return t.log(t.clamp(p, kProbClampLo, kProbClampHi));
}

// Mean of a list of scalar nodes.
GradTape::Id mean_of(GradTape& t, const std::vector<GradTape::Id>& ids) {
  GradTape::Id acc = ids[0];
  for (std::size_t i = 1; i < ids.size(); ++i) acc = t.add(acc, ids[i]);
  return t.scale(acc, 1.0 / static_cast<double>(ids.size()));
}

struct DLossGraph {
  GradTape::Id loss;
  double d_real_mean;
  double d_fake_mean;
};

// x and fake windows enter as constants; only D parameters get gradients.
DLossGraph build_d_loss(GradTape& t, const GanVars& vars, const std::vector<Tensor>& x_batch,
                        const std::vector<Tensor>& fake_batch) {
  std::vector<GradTape::Id> real_terms, fake_terms;
  double real_sum = 0.0, fake_sum = 0.0;
  for (const Tensor& x : x_batch) {
    auto d = vars.discriminate(t.leaf(x));
    real_sum += t.value(d)[0];
    real_terms.push_back(clamped_log(t, d));
  }
  for (const Tensor& f : fake_batch) {
    auto d = vars.discriminate(t.leaf(f));
    fake_sum += t.value(d)[0];
    fake_terms.push_back(clamped_log(t, t.affine(d, -1.0, 1.0)));
  }
  auto loss = t.sub(t.scale(mean_of(t, real_terms), -1.0), mean_of(t, fake_terms));
  return {loss, real_sum / static_cast<double>(x_batch.size()),
          fake_sum / static_cast<double>(fake_batch.size())};
}

GradTape::Id build_g_loss(GradTape& t, const GanVars& vars, const std::vector<GradTape::Id>& z_ids) {
  std::vector<GradTape::Id> terms;
  for (GradTape::Id z : z_ids)
    terms.push_back(clamped_log(t, vars.discriminate(vars.generate(z))));
  return t.scale(mean_of(t, terms), -1.0);
}

std::vector<Tensor> make_fakes(const GanModel& model, const std::vector<Tensor>& z_batch) {
  std::vector<Tensor> fakes;
  fakes.reserve(z_batch.size());
  for (const Tensor& z : z_batch) fakes.push_back(gan_generate(model, z));
  return fakes;
}

Tensor sample_latent(Rng& rng, std::size_t w, std::size_t l) {
  Tensor z({w, l});
  for (double& v : z.data()) v = rng.normal();
  return z;
}

class SgdMomentum {
 public:
  explicit SgdMomentum(const std::vector<Tensor*>& params) {
    for (Tensor* p : params) velocity_.emplace_back(Tensor::zeros(p->shape()));
  }

  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& v = velocity_[i];
      Tensor& p = *params[i];
      const Tensor& g = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        v[j] = kMomentum * v[j] + g[j];
        p[j] -= lr * v[j];
      }
    }
  }

 private:
  std::vector<Tensor> velocity_;
};

std::vector<Tensor> gather_grads(const std::vector<Tensor>& all_grads,
                                 const std::vector<GradTape::Id>& ids) {
  std::vector<Tensor> out;
  out.reserve(ids.size());
  for (GradTape::Id id : ids) out.push_back(all_grads[id]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (lr_g <= 0.0 || lr_d <= 0.0) throw ConfigError("learning rates must be positive");
  if (scheduler.decay_factor <= 0.0 || scheduler.decay_factor > 1.0)
    throw ConfigError("decay_factor must be in (0, 1]");
  if (scheduler.decay_every == 0) throw ConfigError("decay_every must be positive");
}

double scheduled_lr(double lr0, const SchedulerConfig& sched, std::size_t epoch) {
  return lr0 * std::pow(sched.decay_factor, static_cast<double>(epoch / sched.decay_every));
}

double d_loss(const GanModel& model, const std::vector<Tensor>& x_batch,
              const std::vector<Tensor>& z_batch) {
  if (x_batch.empty() || z_batch.empty()) throw ContractError("d_loss: empty batch");
  GradTape tape;
  GanVars vars = GanVars::bind(tape, model);
  return tape.value(build_d_loss(tape, vars, x_batch, make_fakes(model, z_batch)).loss)[0];
}

double g_loss(const GanModel& model, const std::vector<Tensor>& z_batch) {
  if (z_batch.empty()) throw ContractError("g_loss: empty batch");
  GradTape tape;
  GanVars vars = GanVars::bind(tape, model);
  std::vector<GradTape::Id> z_ids;
  for (const Tensor& z : z_batch) z_ids.push_back(tape.leaf(z));
  return tape.value(build_g_loss(tape, vars, z_ids))[0];
}

TrainLog train(GanModel& model, const WindowSet& windows, const TrainConfig& cfg) {
  cfg.validate();
  if (windows.count() == 0) throw ContractError("train: no windows");
  for (int lab : windows.window_labels)
    if (lab == 0) throw ContractError("train: training windows must be normal-only");

  TrainLog log;
  Rng rng(cfg.seed);
  SgdMomentum opt_g(model.generator_params());
  SgdMomentum opt_d(model.discriminator_params());

  std::vector<std::size_t> order(windows.count());
  std::iota(order.begin(), order.end(), 0);

  std::size_t global_batch = 0;
  std::vector<std::vector<Tensor>> recent_batches;  // for sample averaging

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr_g = scheduled_lr(cfg.lr_g, cfg.scheduler, epoch);
    double lr_d = scheduled_lr(cfg.lr_d, cfg.scheduler, epoch);
    std::shuffle(order.begin(), order.end(), rng.engine());

    for (std::size_t off = 0; off < windows.count(); off += cfg.batch_size) {
      std::size_t n = std::min(cfg.batch_size, windows.count() - off);
      std::vector<Tensor> x_batch;
      x_batch.reserve(n);
      for (std::size_t i = 0; i < n; ++i) x_batch.push_back(windows.windows[order[off + i]]);

      // Batch averaging: every n-th batch is replaced by the elementwise
      // mean of the last sample_average_every raw batches of equal size.
      if (cfg.sample_average_every > 0) {
        recent_batches.push_back(x_batch);
        if (recent_batches.size() > cfg.sample_average_every) recent_batches.erase(recent_batches.begin());
        if ((global_batch + 1) % cfg.sample_average_every == 0 &&
            recent_batches.size() == cfg.sample_average_every) {
          bool uniform = true;
          for (const auto& b : recent_batches)
            if (b.size() != x_batch.size()) uniform = false;
          if (uniform) {
            for (std::size_t i = 0; i < x_batch.size(); ++i) {
              Tensor mean = Tensor::zeros(x_batch[i].shape());
              for (const auto& b : recent_batches)
                for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += b[i][j];
              for (double& v : mean.data()) v /= static_cast<double>(recent_batches.size());
              x_batch[i] = std::move(mean);
            }
          }
        }
      }

      std::vector<Tensor> z_batch;
      z_batch.reserve(n);
      for (std::size_t i = 0; i < n; ++i) z_batch.push_back(sample_latent(rng, model.w, model.l));

      // D step: fakes held fixed.
      std::vector<Tensor> fakes = make_fakes(model, z_batch);
      double d_loss_val, d_real_mean, d_fake_mean;
      {
        GradTape tape;
        GanVars vars = GanVars::bind(tape, model);
        DLossGraph graph = build_d_loss(tape, vars, x_batch, fakes);
        d_loss_val = tape.value(graph.loss)[0];
        d_real_mean = graph.d_real_mean;
        d_fake_mean = graph.d_fake_mean;
        if (!std::isfinite(d_loss_val))
          throw ContractError("non-finite D loss at step " + std::to_string(global_batch));
        auto grads = tape.backward(graph.loss);
        opt_d.step(model.discriminator_params(), gather_grads(grads, vars.disc_ids), lr_d);
      }

      // G step: fresh graph through the just-updated D.
      double g_loss_val;
      {
        GradTape tape;
        GanVars vars = GanVars::bind(tape, model);
        std::vector<GradTape::Id> z_ids;
        for (const Tensor& z : z_batch) z_ids.push_back(tape.leaf(z));
        auto loss = build_g_loss(tape, vars, z_ids);
        g_loss_val = tape.value(loss)[0];
        if (!std::isfinite(g_loss_val))
          throw ContractError("non-finite G loss at step " + std::to_string(global_batch));
        auto grads = tape.backward(loss);
        opt_g.step(model.generator_params(), gather_grads(grads, vars.gen_ids), lr_g);
      }

      log.entries.push_back({global_batch, d_loss_val, g_loss_val, d_real_mean, d_fake_mean, lr_g, lr_d});
      ++global_batch;
    }
  }

  for (const Tensor* t : model.all_params())
    if (!t->all_finite()) throw ContractError("non-finite parameter after training");
  return log;
}

void TrainLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step,d_loss,g_loss,d_real_mean,d_fake_mean,lr_g,lr_d\n";
  char buf[256];
  for (const TrainLogEntry& e : entries) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.step, e.d_loss,
                  e.g_loss, e.d_real_mean, e.d_fake_mean, e.lr_g, e.lr_d);
    out << buf;
  }
}

}  // namespace satad

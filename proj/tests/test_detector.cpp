#include <doctest.h>

#include <cmath>
#include <limits>

#include "satad/detector.hpp"
#include "satad/rng.hpp"

using namespace satad;

namespace {

Tensor random_latent(Rng& rng, std::size_t w, std::size_t l) {
  Tensor z({w, l});
  for (double& v : z.data()) v = rng.normal();
  return z;
}

}  // namespace

TEST_CASE("invert_latent recovers generator outputs") {
  GanModel m = gan_init(10, 16, 2, 3, 8);
  Rng rng(4);
  int hits = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor z_star = random_latent(rng, 16, 3);
    Tensor y = gan_generate(m, z_star);

    InversionConfig cfg;
    cfg.steps = 200;
    cfg.restarts = 5;
    cfg.lr = 0.05;
    cfg.seed = static_cast<std::uint64_t>(trial);
    InversionResult res = invert_latent(m, y, cfg);
    double err = l2_norm(y) > 0 ? std::sqrt(res.objective) / l2_norm(y) : 0.0;
    if (std::sqrt(res.objective) <= 0.05 * l2_norm(y) + 1e-6) ++hits;
    CHECK(err < 0.5);  // even misses should be in the right basin
  }
  CHECK(hits >= 8);
}

TEST_CASE("steps=1 lr=0 returns the best initial sample") {
  GanModel m = gan_init(11, 8, 1, 2, 4);
  Rng rng(5);
  Tensor y = gan_generate(m, random_latent(rng, 8, 2));

  InversionConfig cfg;
  cfg.steps = 1;
  cfg.lr = 0.0;
  cfg.restarts = 4;
  cfg.seed = 77;
  InversionResult res = invert_latent(m, y, cfg);

  // oracle: enumerate the same restart starts directly
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < 4; ++r) {
    Rng rr(Rng::derive(77, r));
    Tensor z({8, 2});
    for (double& v : z.data()) v = rr.normal();
    Tensor out = gan_generate(m, z);
    double f = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      double d = y[i] - out[i];
      f += d * d;
    }
    best = std::min(best, f);
  }
  CHECK(res.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("inversion trajectory is monotone non-increasing") {
  GanModel m = gan_init(12, 12, 2, 2, 6);
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor y({12, 2});
    for (double& v : y.data()) v = rng.normal();
    InversionConfig cfg;
    cfg.steps = 50;
    cfg.restarts = 1;
    cfg.lr = 1e-3;
    cfg.seed = static_cast<std::uint64_t>(100 + trial);
    InversionResult res = invert_latent(m, y, cfg);
    REQUIRE(res.trajectory.size() >= 2);
    for (std::size_t i = 1; i < res.trajectory.size(); ++i)
      CHECK(res.trajectory[i] <= res.trajectory[i - 1]);
  }
}

TEST_CASE("score_window follows the blend law exactly") {
  GanModel m = gan_init(13, 8, 2, 2, 4);
  Rng rng(7);
  Tensor z = random_latent(rng, 8, 2);
  Tensor y({8, 2});
  for (double& v : y.data()) v = rng.normal();

  Tensor recon = gan_generate(m, z);
  double rec = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = y[i] - recon[i];
    rec += d * d;
  }
  rec = std::sqrt(rec);
  double disc = std::abs(gan_discriminate(m, y) - gan_discriminate(m, recon));

  double s0 = score_window(m, y, z, 0.0);
  double s_half = score_window(m, y, z, 0.5);
  double s1 = score_window(m, y, z, 1.0);
  CHECK(s0 == doctest::Approx(disc).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(rec).epsilon(1e-12));
  // linear in lambda: s(0.5) = 0.5*a + 0.5*b exactly
  CHECK(std::abs(s_half - 0.5 * (s0 + s1)) < 1e-12);
  CHECK(s0 >= 0.0);
  CHECK(s1 >= 0.0);

  // y == G(z') scores zero for every lambda
  for (double lambda : {0.0, 0.3, 1.0})
    CHECK(score_window(m, recon, z, lambda) == 0.0);
}

TEST_CASE("aggregate_steps examples") {
  // disjoint windows: each step gets its window's score
  auto scores = std::vector<double>{1.0, 3.0};
  auto out = aggregate_steps(scores, {0, 4}, 4, 8);
  for (std::size_t t = 0; t < 4; ++t) CHECK(out[t] == 1.0);
  for (std::size_t t = 4; t < 8; ++t) CHECK(out[t] == 3.0);

  // constant scores propagate
  auto flat = aggregate_steps({2.5, 2.5, 2.5}, {0, 2, 4}, 4, 8);
  for (double v : flat) CHECK(v == 2.5);

  // two overlapping windows score 1 and 3: overlap steps average to 2
  auto overlap = aggregate_steps({1.0, 3.0}, {0, 2}, 4, 6);
  CHECK(overlap[0] == 1.0);
  CHECK(overlap[1] == 1.0);
  CHECK(overlap[2] == 2.0);
  CHECK(overlap[3] == 2.0);
  CHECK(overlap[4] == 3.0);
  CHECK(overlap[5] == 3.0);

  // uncovered trailing steps inherit the nearest covered score
  auto tail = aggregate_steps({1.0}, {0}, 2, 5);
  CHECK(tail[4] == 1.0);
}

TEST_CASE("classify thresholding and tie-breaks") {
  std::vector<std::vector<double>> scores = {{0.1, 0.5, 0.9}};
  auto labels = classify(scores, {2}, 0.5);
  CHECK(labels == std::vector<int>{2, 2, 0});  // strict > threshold is anomalous

  std::vector<std::vector<double>> two = {{0.3, 0.2}, {0.3, 0.1}};
  auto multi = classify(two, {1, 2}, 0.5);
  CHECK(multi == std::vector<int>{1, 2});  // tie at step 0 goes to the lower id

  CHECK_THROWS_AS(classify({}, {}, 0.5), ConfigError);
}

TEST_CASE("score_series is deterministic and thread-count independent") {
  GanModel m = gan_init(14, 8, 2, 2, 4);
  Rng rng(8);
  TimeSeries ts;
  ts.values = Tensor({48, 2});
  for (double& v : ts.values.data()) v = rng.normal();
  WindowSet ws = make_windows(ts, {8, 4});

  ScoreConfig cfg;
  cfg.inversion.steps = 20;
  cfg.inversion.restarts = 2;
  cfg.inversion.seed = 5;
  cfg.threads = 1;
  ScoreSeries a = score_series(m, ws, ts.length(), cfg);
  cfg.threads = 4;
  ScoreSeries b = score_series(m, ws, ts.length(), cfg);

  REQUIRE(a.window_scores.size() == b.window_scores.size());
  for (std::size_t i = 0; i < a.window_scores.size(); ++i)
    CHECK(a.window_scores[i] == b.window_scores[i]);
  CHECK(a.step_scores.size() == ts.length());
  for (double v : a.step_scores) CHECK(std::isfinite(v));
}

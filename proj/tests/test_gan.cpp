#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fd_oracle.hpp"
#include "satad/gan.hpp"
#include "satad/rng.hpp"

using namespace satad;
using testutil::finite_diff;
using testutil::max_rel_err;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.normal();
  return t;
}

void zero_attention(AttentionParams& a) {
  for (Tensor* t : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo})
    for (double& v : t->data()) v = 0.0;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("satad_gan_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

}  // namespace

TEST_CASE("init determinism and minimal instance") {
  GanModel a = gan_init(7, 8, 2, 3, 4);
  GanModel b = gan_init(7, 8, 2, 3, 4);
  bool equal = true;
  auto pa = a.all_params();
  auto pb = b.all_params();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!(*pa[i] == *pb[i])) equal = false;
  CHECK(equal);

  GanModel c = gan_init(8, 8, 2, 3, 4);
  bool any_diff = false;
  auto pc = c.all_params();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!(*pa[i] == *pc[i])) any_diff = true;
  CHECK(any_diff);

  GanModel tiny = gan_init(1, 2, 1, 1, 1);
  Tensor z({2, 1});
  z[0] = 0.3;
  z[1] = -0.7;
  Tensor out = gan_generate(tiny, z);
  CHECK(out.rows() == 2);
  CHECK(out.cols() == 1);
  CHECK(out.all_finite());
}

TEST_CASE("attention block is identity when its parameters are zeroed") {
  GanModel m = gan_init(19, 3, 4, 2, 5);  // w=3, k=4, h=5
  zero_attention(m.g_attn);
  // with zero attention and zero biases downstream of input, generate reduces
  // to out_proj(tanh(ff(in_proj(z)))); check the attention block itself via a
  // model whose ff and out stages are identity-like is indirect, so probe the
  // block through the discriminator path instead: zero d_attn and compare
  // against a hand-built forward without attention.
  zero_attention(m.d_attn);
  Rng rng(5);
  Tensor x = random_tensor(rng, {3, 4});

  // hand forward: in_proj -> (identity attention) -> tanh ff -> pool -> head
  Tensor f({3, 5});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double v = m.d_in_b[j];
      for (std::size_t c = 0; c < 4; ++c) v += x(i, c) * m.d_in_w(c, j);
      f(i, j) = v;
    }
  Tensor g({3, 5});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double v = m.d_ff_b[j];
      for (std::size_t c = 0; c < 5; ++c) v += f(i, c) * m.d_ff_w(c, j);
      g(i, j) = std::tanh(v);
    }
  double logit = m.d_head_b[0];
  for (std::size_t j = 0; j < 5; ++j) {
    double pooled = (g(0, j) + g(1, j) + g(2, j)) / 3.0;
    logit += pooled * m.d_head_w(j, 0);
  }
  double expected = 1.0 / (1.0 + std::exp(-logit));
  CHECK(gan_discriminate(m, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero input with zero biases stays zero through the generator attention") {
  GanModel m = gan_init(11, 4, 2, 2, 6);
  for (Tensor* t : {&m.g_in_b, &m.g_ff_b, &m.g_out_b, &m.g_attn.bq, &m.g_attn.bk, &m.g_attn.bv,
                    &m.g_attn.bo})
    for (double& v : t->data()) v = 0.0;
  Tensor z = Tensor::zeros({4, 2});
  Tensor out = gan_generate(m, z);
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("w=1 attention weight is [[1]] and output adds the projected value") {
  GanModel m = gan_init(2, 1, 1, 3, 4);  // w=1, k=1, l=3, h=4
  Rng rng(17);
  Tensor z = random_tensor(rng, {1, 3});

  // by hand: x = in(z); v = x Wv + bv; out_attn = x + (v Wo + bo)
  Tensor x({1, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    double s = m.g_in_b[j];
    for (std::size_t c = 0; c < 3; ++c) s += z(0, c) * m.g_in_w(c, j);
    x(0, j) = s;
  }
  Tensor v({1, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    double s = m.g_attn.bv[j];
    for (std::size_t c = 0; c < 4; ++c) s += x(0, c) * m.g_attn.wv(c, j);
    v(0, j) = s;
  }
  Tensor attn_out({1, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    double s = m.g_attn.bo[j];
    for (std::size_t c = 0; c < 4; ++c) s += v(0, c) * m.g_attn.wo(c, j);
    attn_out(0, j) = x(0, j) + s;
  }
  Tensor ff({1, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    double s = m.g_ff_b[j];
    for (std::size_t c = 0; c < 4; ++c) s += attn_out(0, c) * m.g_ff_w(c, j);
    ff(0, j) = std::tanh(s);
  }
  double expected = m.g_out_b[0];
  for (std::size_t c = 0; c < 4; ++c) expected += ff(0, c) * m.g_out_w(c, 0);

  Tensor out = gan_generate(m, z);
  CHECK(out[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward passes are deterministic, bounded-input safe, and shaped") {
  GanModel m = gan_init(23, 6, 3, 2, 8);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor z({6, 2});
    for (double& v : z.data()) v = rng.uniform(-10.0, 10.0);
    Tensor out1 = gan_generate(m, z);
    Tensor out2 = gan_generate(m, z);
    CHECK(out1 == out2);
    CHECK(out1.rows() == 6);
    CHECK(out1.cols() == 3);
    CHECK(out1.all_finite());

    Tensor x({6, 3});
    for (double& v : x.data()) v = rng.uniform(-10.0, 10.0);
    double d = gan_discriminate(m, x);
    CHECK(d > 0.0);
    CHECK(d < 1.0);
    CHECK(gan_discriminate(m, x) == d);
  }
}

TEST_CASE("discriminator is permutation invariant over time steps") {
  // Content-based attention is equivariant under row permutation and mean
  // pooling erases row order, so D must score a shuffled window identically
  // (up to floating-point reassociation). This pins the structural property
  // of the pooling head.
  GanModel m = gan_init(31, 8, 2, 2, 6);
  Tensor x({8, 2});
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t c = 0; c < 2; ++c) x(i, c) = std::sin(0.8 * static_cast<double>(i) + static_cast<double>(c));
  Tensor shuffled = x;
  std::vector<std::size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t c = 0; c < 2; ++c) shuffled(i, c) = x(perm[i], c);
  CHECK(std::abs(gan_discriminate(m, x) - gan_discriminate(m, shuffled)) < 1e-12);
}

TEST_CASE("network input gradients match finite differences on 100 seeded instances") {
  GanModel m = gan_init(3, 4, 2, 3, 5);  // w=4, k=2, l=3, h=5
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor z = random_tensor(rng, {4, 3});
    {
      GradTape t;
      GanVars vars = GanVars::bind(t, m);
      auto zid = t.leaf(z);
      auto analytic = t.backward(t.l2_norm(vars.generate(zid)))[zid];
      Tensor numeric = finite_diff(
          [&](const Tensor& pz) { return l2_norm(gan_generate(m, pz)); }, z);
      CHECK(max_rel_err(analytic, numeric) < 1e-4);
    }
    {
      Tensor x = random_tensor(rng, {4, 2});
      GradTape t;
      GanVars vars = GanVars::bind(t, m);
      auto xid = t.leaf(x);
      auto analytic = t.backward(vars.discriminate(xid))[xid];
      Tensor numeric = finite_diff(
          [&](const Tensor& px) { return gan_discriminate(m, px); }, x);
      CHECK(max_rel_err(analytic, numeric) < 1e-4);
    }
  }
}

TEST_CASE("checkpoint round trip and error paths") {
  GanModel m = gan_init(3, 5, 2, 3, 4);
  std::string path = temp_path("ok.ckpt");
  gan_save(m, path);
  GanModel back = gan_load(path);
  auto pa = m.all_params();
  auto pb = back.all_params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);

  // truncated file: error, no partial model
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string tpath = temp_path("trunc.ckpt");
  std::ofstream(tpath, std::ios::binary)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  CHECK_THROWS_AS(gan_load(tpath), ParseError);

  // bad magic
  std::string bpath = temp_path("magic.ckpt");
  std::ofstream(bpath, std::ios::binary).write("XXXX0000", 8);
  CHECK_THROWS_AS(gan_load(bpath), ParseError);

  // version mismatch
  std::string vpath = temp_path("ver.ckpt");
  std::string mutated = bytes;
  mutated[4] = 9;  // bump version byte
  std::ofstream(vpath, std::ios::binary)
      .write(mutated.data(), static_cast<std::streamsize>(mutated.size()));
  CHECK_THROWS_WITH_AS(gan_load(vpath), doctest::Contains("version"), ParseError);

  for (const std::string& p : {path, tpath, bpath, vpath}) std::filesystem::remove(p);
}

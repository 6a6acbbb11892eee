#include "satad/gan.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "satad/errors.hpp"
#include "satad/rng.hpp"

namespace satad {

namespace {

std::vector<Tensor*> attn_params(AttentionParams& a) {
  return {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo};
}

}  // namespace

std::vector<Tensor*> GanModel::generator_params() {
  std::vector<Tensor*> out = {&g_in_w, &g_in_b};
  for (Tensor* t : attn_params(g_attn)) out.push_back(t);
  out.insert(out.end(), {&g_ff_w, &g_ff_b, &g_out_w, &g_out_b});
  return out;
}

std::vector<Tensor*> GanModel::discriminator_params() {
  std::vector<Tensor*> out = {&d_in_w, &d_in_b};
  for (Tensor* t : attn_params(d_attn)) out.push_back(t);
  out.insert(out.end(), {&d_ff_w, &d_ff_b, &d_head_w, &d_head_b});
  return out;
}

std::vector<Tensor*> GanModel::all_params() {
  std::vector<Tensor*> out = generator_params();
  for (Tensor* t : discriminator_params()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> GanModel::all_params() const {
  auto mutable_params = const_cast<GanModel*>(this)->all_params();
  return {mutable_params.begin(), mutable_params.end()};
}

namespace {

Tensor glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

AttentionParams init_attention(Rng& rng, std::size_t h) {
  AttentionParams a;
  a.wq = glorot(rng, h, h);
  a.wk = glorot(rng, h, h);
  a.wv = glorot(rng, h, h);
  a.wo = glorot(rng, h, h);
  a.bq = Tensor({h});
  a.bk = Tensor({h});
  a.bv = Tensor({h});
  a.bo = Tensor({h});
  return a;
}

}  // namespace

GanModel gan_init(std::uint64_t seed, std::size_t w, std::size_t k, std::size_t l, std::size_t h) {
  if (w == 0 || k == 0 || l == 0 || h == 0) throw ConfigError("gan_init: dimensions must be positive");
  Rng rng(seed);
  GanModel m;
  m.w = w;
  m.k = k;
  m.l = l;
  m.h = h;

  m.g_in_w = glorot(rng, l, h);
  m.g_in_b = Tensor({h});
  m.g_attn = init_attention(rng, h);
  m.g_ff_w = glorot(rng, h, h);
  m.g_ff_b = Tensor({h});
  m.g_out_w = glorot(rng, h, k);
  m.g_out_b = Tensor({k});

  m.d_in_w = glorot(rng, k, h);
  m.d_in_b = Tensor({h});
  m.d_attn = init_attention(rng, h);
  m.d_ff_w = glorot(rng, h, h);
  m.d_ff_b = Tensor({h});
  m.d_head_w = glorot(rng, h, 1);
  m.d_head_b = Tensor({1});
  return m;
}

GanVars GanVars::bind(GradTape& tape, const GanModel& model) {
  GanVars v;
  v.tape = &tape;
  v.w = model.w;
  v.k = model.k;
  v.l = model.l;
  v.h = model.h;
  auto& mut = const_cast<GanModel&>(model);
  for (Tensor* t : mut.generator_params()) v.gen_ids.push_back(tape.leaf(*t));
  for (Tensor* t : mut.discriminator_params()) v.disc_ids.push_back(tape.leaf(*t));
  return v;
}

namespace {

// Parameter layout inside gen_ids / disc_ids (matches *_params() order):
// 0 in_w, 1 in_b, 2..9 attention (wq bq wk bk wv bv wo bo), 10 ff_w,
// 11 ff_b, 12 out_w/head_w, 13 out_b/head_b.
GradTape::Id attention_block(GradTape& t, GradTape::Id x, const std::vector<GradTape::Id>& p,
                             std::size_t h) {
  auto q = t.add_row_bias(t.matmul(x, p[2]), p[3]);
  auto k = t.add_row_bias(t.matmul(x, p[4]), p[5]);
  auto v = t.add_row_bias(t.matmul(x, p[6]), p[7]);
  auto scores = t.scale(t.matmul(q, t.transpose(k)), 1.0 / std::sqrt(static_cast<double>(h)));
  auto weights = t.softmax_rows(scores);
  auto attended = t.matmul(weights, v);
  auto projected = t.add_row_bias(t.matmul(attended, p[8]), p[9]);
  return t.add(x, projected);
}

}  // namespace

GradTape::Id GanVars::generate(GradTape::Id z) const {
  GradTape& t = *tape;
  const Tensor& tz = t.value(z);
  if (tz.rows() != w || tz.cols() != l) throw ShapeError("generate: z must be w x l");
  auto x = t.add_row_bias(t.matmul(z, gen_ids[0]), gen_ids[1]);
  x = attention_block(t, x, gen_ids, h);
  x = t.tanh(t.add_row_bias(t.matmul(x, gen_ids[10]), gen_ids[11]));
  return t.add_row_bias(t.matmul(x, gen_ids[12]), gen_ids[13]);
}

GradTape::Id GanVars::discriminate(GradTape::Id x) const {
  GradTape& t = *tape;
  const Tensor& tx = t.value(x);
  if (tx.rows() != w || tx.cols() != k) throw ShapeError("discriminate: x must be w x k");
  auto f = t.add_row_bias(t.matmul(x, disc_ids[0]), disc_ids[1]);
  f = attention_block(t, f, disc_ids, h);
  f = t.tanh(t.add_row_bias(t.matmul(f, disc_ids[10]), disc_ids[11]));
  auto pooled = t.mean_rows(f);
  auto logit = t.add_row_bias(t.matmul(pooled, disc_ids[12]), disc_ids[13]);
  return t.sigmoid(logit);
}

Tensor gan_generate(const GanModel& model, const Tensor& z) {
  GradTape tape;
  GanVars vars = GanVars::bind(tape, model);
  return tape.value(vars.generate(tape.leaf(z)));
}

double gan_discriminate(const GanModel& model, const Tensor& x) {
  GradTape tape;
  GanVars vars = GanVars::bind(tape, model);
  return tape.value(vars.discriminate(tape.leaf(x)))[0];
}

namespace {
constexpr char kCkptMagic[4] = {'S', 'A', 'T', 'G'};
constexpr std::uint16_t kCkptVersion = 1;
}  // namespace

void gan_save(const GanModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kCkptMagic, 4);
  out.write(reinterpret_cast<const char*>(&kCkptVersion), sizeof kCkptVersion);
  std::uint32_t dims[4] = {static_cast<std::uint32_t>(model.w), static_cast<std::uint32_t>(model.k),
                           static_cast<std::uint32_t>(model.l), static_cast<std::uint32_t>(model.h)};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  for (const Tensor* t : model.all_params())
    out.write(reinterpret_cast<const char*>(t->data().data()),
              static_cast<std::streamsize>(t->size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

GanModel gan_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0)
    throw ParseError("bad magic in checkpoint: " + path);
  std::uint16_t version;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in) throw ParseError("truncated checkpoint header: " + path);
  if (version != kCkptVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  std::uint32_t dims[4];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in) throw ParseError("truncated checkpoint dims: " + path);

  GanModel m = gan_init(0, dims[0], dims[1], dims[2], dims[3]);
  for (Tensor* t : m.all_params()) {
    in.read(reinterpret_cast<char*>(t->data().data()),
            static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (!in) throw ParseError("truncated checkpoint parameters: " + path);
  }
  char extra;
  if (in.read(&extra, 1)) throw ParseError("trailing bytes in checkpoint: " + path);
  return m;
}

}  // namespace satad

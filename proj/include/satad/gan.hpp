#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satad/tape.hpp"
#include "satad/tensor.hpp"

namespace satad {

struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
};

// Generator (latent window -> data window) and discriminator (data window ->
// realness score), each with one single-head self-attention block over the
// time axis and a residual connection around it.
struct GanModel {
  std::size_t w = 0;  // window length
  std::size_t k = 0;  // feature count
  std::size_t l = 0;  // latent dim per step
  std::size_t h = 0;  // hidden width

  Tensor g_in_w, g_in_b;  // l -> h
  AttentionParams g_attn;
  Tensor g_ff_w, g_ff_b;    // h -> h, tanh
  Tensor g_out_w, g_out_b;  // h -> k

  Tensor d_in_w, d_in_b;  // k -> h
  AttentionParams d_attn;
  Tensor d_ff_w, d_ff_b;      // h -> h, tanh
  Tensor d_head_w, d_head_b;  // h -> 1 after mean pooling

  std::vector<Tensor*> generator_params();
  std::vector<Tensor*> discriminator_params();
  std::vector<Tensor*> all_params();
  std::vector<const Tensor*> all_params() const;
};

GanModel gan_init(std::uint64_t seed, std::size_t w, std::size_t k, std::size_t l, std::size_t h);

// Forward builders over a tape: parameters are registered as leaves so the
// same graph serves training (grads w.r.t. parameters) and latent inversion
// (grads w.r.t. z).
struct GanVars {
  GradTape* tape = nullptr;
  std::size_t w = 0, k = 0, l = 0, h = 0;
  std::vector<GradTape::Id> gen_ids;   // leaf ids, generator_params() order
  std::vector<GradTape::Id> disc_ids;  // leaf ids, discriminator_params() order

  static GanVars bind(GradTape& tape, const GanModel& model);

  GradTape::Id generate(GradTape::Id z) const;      // w x l -> w x k
  GradTape::Id discriminate(GradTape::Id x) const;  // w x k -> scalar in (0,1)
};

// Eager single-shot forwards (build and discard a local tape).
Tensor gan_generate(const GanModel& model, const Tensor& z);
double gan_discriminate(const GanModel& model, const Tensor& x);

// Checkpoint: magic "SATG", u16 version, u32 dims (w, k, l, h), parameter
// tensors in declared order as little-endian f64. Round-trips bit-exactly.
void gan_save(const GanModel& model, const std::string& path);
GanModel gan_load(const std::string& path);

}  // namespace satad

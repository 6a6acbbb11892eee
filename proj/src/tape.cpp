#include "satad/tape.hpp"

#include <cmath>

namespace satad {

namespace {

void matmul_into(const Tensor& a, const Tensor& b, Tensor& c, bool transpose_a, bool transpose_b,
                 bool accumulate) {
  // c (+)= op(a) * op(b), all rank-2
  std::size_t p = transpose_a ? a.cols() : a.rows();
  std::size_t q = transpose_a ? a.rows() : a.cols();
  std::size_t r = transpose_b ? b.rows() : b.cols();
  if (!accumulate)
    for (double& v : c.data()) v = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < q; ++k) {
      double aik = transpose_a ? a(k, i) : a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < r; ++j) {
        double bkj = transpose_b ? b(j, k) : b(k, j);
        c(i, j) += aik * bkj;
      }
    }
  }
}

}  // namespace

GradTape::Id GradTape::leaf(Tensor value) {
  return push({Op::kLeaf, std::move(value)});
}

GradTape::Id GradTape::matmul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows())
    throw ShapeError("matmul: inner dimensions do not match");
  Tensor out({ta.rows(), tb.cols()});
  matmul_into(ta, tb, out, false, false, false);
  return push({Op::kMatMul, std::move(out), a, b});
}

GradTape::Id GradTape::transpose(Id a) {
  const Tensor& ta = value(a);
  if (ta.rank() != 2) throw ShapeError("transpose: rank-2 only");
  Tensor out({ta.cols(), ta.rows()});
  for (std::size_t i = 0; i < ta.rows(); ++i)
    for (std::size_t j = 0; j < ta.cols(); ++j) out(j, i) = ta(i, j);
  return push({Op::kTranspose, std::move(out), a});
}

GradTape::Id GradTape::add(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) throw ShapeError("add: shapes differ");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  return push({Op::kAdd, std::move(out), a, b});
}

GradTape::Id GradTape::sub(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) throw ShapeError("sub: shapes differ");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  return push({Op::kSub, std::move(out), a, b});
}

GradTape::Id GradTape::mul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb)) throw ShapeError("mul: shapes differ");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return push({Op::kMul, std::move(out), a, b});
}

GradTape::Id GradTape::add_row_bias(Id a, Id bias) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(bias);
  if (tb.size() != ta.cols()) throw ShapeError("add_row_bias: bias length != columns");
  Tensor out = ta;
  for (std::size_t i = 0; i < ta.rows(); ++i)
    for (std::size_t j = 0; j < ta.cols(); ++j) out(i, j) += tb[j];
  return push({Op::kAddRowBias, std::move(out), a, bias});
}

GradTape::Id GradTape::affine(Id a, double s, double shift) {
  Tensor out = value(a);
  for (double& v : out.data()) v = s * v + shift;
  return push({Op::kAffine, std::move(out), a, -1, s, shift});
}

GradTape::Id GradTape::tanh(Id a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = std::tanh(v);
  return push({Op::kTanh, std::move(out), a});
}

GradTape::Id GradTape::sigmoid(Id a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  return push({Op::kSigmoid, std::move(out), a});
}

GradTape::Id GradTape::relu(Id a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return push({Op::kRelu, std::move(out), a});
}

GradTape::Id GradTape::log(Id a) {
  Tensor out = value(a);
  for (double& v : out.data()) v = std::log(v);
  return push({Op::kLog, std::move(out), a});
}

GradTape::Id GradTape::clamp(Id a, double lo, double hi) {
  Tensor out = value(a);
  for (double& v : out.data()) v = v < lo ? lo : (v > hi ? hi : v);
  return push({Op::kClamp, std::move(out), a, -1, lo, hi});
}

GradTape::Id GradTape::softmax_rows(Id a) {
  const Tensor& ta = value(a);
  if (ta.rank() != 2) throw ShapeError("softmax_rows: rank-2 only");
  Tensor out = ta;
  for (std::size_t i = 0; i < ta.rows(); ++i) {
    double mx = out(i, 0);
    for (std::size_t j = 1; j < ta.cols(); ++j) mx = std::max(mx, out(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < ta.cols(); ++j) {
      out(i, j) = std::exp(out(i, j) - mx);
      denom += out(i, j);
    }
    for (std::size_t j = 0; j < ta.cols(); ++j) out(i, j) /= denom;
  }
  return push({Op::kSoftmaxRows, std::move(out), a});
}

GradTape::Id GradTape::l2_norm(Id a) {
  return push({Op::kL2Norm, Tensor::scalar(satad::l2_norm(value(a))), a});
}

GradTape::Id GradTape::sum(Id a) {
  double s = 0.0;
  for (double v : value(a).data()) s += v;
  return push({Op::kSum, Tensor::scalar(s), a});
}

GradTape::Id GradTape::mean_rows(Id a) {
  const Tensor& ta = value(a);
  if (ta.rank() != 2) throw ShapeError("mean_rows: rank-2 only");
  Tensor out({1, ta.cols()});
  for (std::size_t i = 0; i < ta.rows(); ++i)
    for (std::size_t j = 0; j < ta.cols(); ++j) out(0, j) += ta(i, j);
  for (double& v : out.data()) v /= static_cast<double>(ta.rows());
  return push({Op::kMeanRows, std::move(out), a});
}

std::vector<Tensor> GradTape::backward(Id loss) const {
  if (value(loss).size() != 1) throw ContractError("backward: loss must be scalar");

  std::vector<Tensor> grads;
  grads.reserve(nodes_.size());
  for (const Node& n : nodes_) grads.emplace_back(Tensor::zeros(n.value.shape()));
  grads[loss][0] = 1.0;

  for (Id id = loss; id >= 0; --id) {
    const Node& n = nodes_[id];
    const Tensor& g = grads[id];
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        // dA += G * B^T, dB += A^T * G
        matmul_into(g, value(n.b), grads[n.a], false, true, true);
        matmul_into(value(n.a), g, grads[n.b], true, false, true);
        break;
      }
      case Op::kTranspose: {
        Tensor& da = grads[n.a];
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) da(j, i) += g(i, j);
        break;
      }
      case Op::kAdd:
        for (std::size_t i = 0; i < g.size(); ++i) {
          grads[n.a][i] += g[i];
          grads[n.b][i] += g[i];
        }
        break;
      case Op::kSub:
        for (std::size_t i = 0; i < g.size(); ++i) {
          grads[n.a][i] += g[i];
          grads[n.b][i] -= g[i];
        }
        break;
      case Op::kMul:
        for (std::size_t i = 0; i < g.size(); ++i) {
          grads[n.a][i] += g[i] * value(n.b)[i];
          grads[n.b][i] += g[i] * value(n.a)[i];
        }
        break;
      case Op::kAddRowBias: {
        Tensor& da = grads[n.a];
        Tensor& db = grads[n.b];
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) {
            da(i, j) += g(i, j);
            db[j] += g(i, j);
          }
        break;
      }
      case Op::kAffine:
        for (std::size_t i = 0; i < g.size(); ++i) grads[n.a][i] += n.c0 * g[i];
        break;
      case Op::kTanh:
        for (std::size_t i = 0; i < g.size(); ++i)
          grads[n.a][i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      case Op::kSigmoid:
        for (std::size_t i = 0; i < g.size(); ++i)
          grads[n.a][i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      case Op::kRelu:
        for (std::size_t i = 0; i < g.size(); ++i)
          if (value(n.a)[i] > 0.0) grads[n.a][i] += g[i];
        break;
      case Op::kLog:
        for (std::size_t i = 0; i < g.size(); ++i) grads[n.a][i] += g[i] / value(n.a)[i];
        break;
      case Op::kClamp:
        for (std::size_t i = 0; i < g.size(); ++i) {
          double x = value(n.a)[i];
          if (x > n.c0 && x < n.c1) grads[n.a][i] += g[i];
        }
        break;
      case Op::kSoftmaxRows: {
        // per row: dx = s .* (g - <g, s>)
        Tensor& da = grads[n.a];
        for (std::size_t i = 0; i < g.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * n.value(i, j);
          for (std::size_t j = 0; j < g.cols(); ++j)
            da(i, j) += n.value(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case Op::kL2Norm: {
        double norm = n.value[0];
        if (norm > 0.0) {
          double gg = g[0] / norm;
          for (std::size_t i = 0; i < grads[n.a].size(); ++i)
            grads[n.a][i] += gg * value(n.a)[i];
        }
        break;
      }
      case Op::kSum:
        for (std::size_t i = 0; i < grads[n.a].size(); ++i) grads[n.a][i] += g[0];
        break;
      case Op::kMeanRows: {
        Tensor& da = grads[n.a];
        double inv = 1.0 / static_cast<double>(da.rows());
        for (std::size_t i = 0; i < da.rows(); ++i)
          for (std::size_t j = 0; j < da.cols(); ++j) da(i, j) += g(0, j) * inv;
        break;
      }
    }
  }
  return grads;
}

}  // namespace satad

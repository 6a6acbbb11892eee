#pragma once

#include <vector>

#include "satad/tensor.hpp"

namespace satad {

// Reverse-mode tape. Every primitive records its inputs/output; backward()
// replays the record once in reverse, accumulating gradients additively when
// a tensor feeds several consumers. A tape lives on one thread and is freed
// (or clear()ed) after each backward pass.
class GradTape {
 public:
  using Id = int;

  enum class Op {
    kLeaf,
    kMatMul,
    kTranspose,
    kAdd,
    kSub,
    kMul,
    kAddRowBias,  // a[p x q] + b[q], b added to every row
    kAffine,      // c0 * a + c1, elementwise
    kTanh,
    kSigmoid,
    kRelu,
    kLog,
    kClamp,  // clamp to [c0, c1]; zero gradient outside the open interval
    kSoftmaxRows,
    kL2Norm,    // scalar output
    kSum,       // scalar output
    kMeanRows,  // a[p x q] -> [1 x q]
  };

  Id leaf(Tensor value);

  Id matmul(Id a, Id b);
  Id transpose(Id a);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id add_row_bias(Id a, Id bias);
  Id affine(Id a, double scale, double shift);
  Id scale(Id a, double s) { return affine(a, s, 0.0); }
  Id tanh(Id a);
  Id sigmoid(Id a);
  Id relu(Id a);
  Id log(Id a);
  Id clamp(Id a, double lo, double hi);
  Id softmax_rows(Id a);
  Id l2_norm(Id a);
  Id sum(Id a);
  Id mean_rows(Id a);

  const Tensor& value(Id id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  // Gradients of `loss` (a scalar node) with respect to every node, indexed
  // by node id. Unreached nodes get zero tensors of their own shape.
  std::vector<Tensor> backward(Id loss) const;

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Op op;
    Tensor value;
    Id a = -1;
    Id b = -1;
    double c0 = 0.0;
    double c1 = 0.0;
  };

  Id push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace satad

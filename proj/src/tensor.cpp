#include "satad/tensor.hpp"

#include <cmath>
#include <numeric>

namespace satad {

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("zero dimension");
    n *= d;
  }
  data_.assign(shape_.empty() ? 0 : n, 0.0);
}

Tensor Tensor::scalar(double v) {
  Tensor t({1});
  t.data_[0] = v;
  return t;
}

Tensor Tensor::vector(std::initializer_list<double> vals) {
  Tensor t({vals.size()});
  std::size_t i = 0;
  for (double v : vals) t.data_[i++] = v;
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = rows.begin()->size();
  Tensor t({r, c});
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on non-scalar tensor");
  return data_[0];
}

double l2_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double mse(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("mse on mismatched shapes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

}  // namespace satad

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "satad/errors.hpp"

namespace satad {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything the
// models need; a scalar is shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(double v);
  static Tensor vector(std::initializer_list<double> vals);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.size(); }

  // 2-D accessors; rank-1 tensors behave as a single row.
  std::size_t rows() const { return rank() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const { return rank() >= 2 ? shape_[1] : shape_.empty() ? 0 : shape_[0]; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  double item() const;  // value of a scalar tensor; throws ContractError otherwise

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Eager helpers used outside the tape (data prep, baselines).
double l2_norm(const Tensor& a);
double mse(const Tensor& a, const Tensor& b);

}  // namespace satad

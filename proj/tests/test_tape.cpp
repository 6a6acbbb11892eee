#include <doctest.h>

#include <cmath>

#include "fd_oracle.hpp"
#include "satad/rng.hpp"
#include "satad/tape.hpp"

using namespace satad;
using testutil::close_rel;
using testutil::finite_diff;
using testutil::max_rel_err;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo = -2.0, double hi = 2.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Generic scalar head: loss = sum(weights .* node), so gradients are
// exercised with a non-uniform upstream signal.
double weighted_loss(GradTape& t, GradTape::Id node, const Tensor& weights) {
  auto w = t.leaf(weights);
  return t.value(t.sum(t.mul(node, w)))[0];
}

}  // namespace

TEST_CASE("matmul basic examples") {
  GradTape t;
  auto identity = t.leaf(Tensor::matrix({{1, 0}, {0, 1}}));
  auto a = t.leaf(Tensor::matrix({{1, 2}, {3, 4}}));
  CHECK(t.value(t.matmul(identity, a)) == t.value(a));
  CHECK(t.value(t.matmul(a, identity)) == t.value(a));

  auto row = t.leaf(Tensor::matrix({{1, 2}}));
  auto col = t.leaf(Tensor::matrix({{3}, {4}}));
  CHECK(t.value(t.matmul(row, col))[0] == doctest::Approx(11.0));

  CHECK_THROWS_AS(t.matmul(col, a), ShapeError);  // 2x1 times 2x2: inner dims differ
}

TEST_CASE("softmax_rows examples and contracts") {
  GradTape t;
  auto even = t.softmax_rows(t.leaf(Tensor::matrix({{0, 0}})));
  CHECK(t.value(even)[0] == doctest::Approx(0.5).epsilon(1e-12));

  auto flat = t.softmax_rows(t.leaf(Tensor::matrix({{7.3, 7.3, 7.3}})));
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(t.value(flat)[i] - 1.0 / 3.0) < 1e-12);

  auto closed = t.softmax_rows(t.leaf(Tensor::matrix({{std::log(1.0), std::log(3.0)}})));
  CHECK(std::abs(t.value(closed)[0] - 0.25) < 1e-12);
  CHECK(std::abs(t.value(closed)[1] - 0.75) < 1e-12);
}

TEST_CASE("softmax_rows rows sum to one and are shift invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x = random_tensor(rng, {4, 5}, -50.0, 50.0);
    GradTape t;
    auto s = t.softmax_rows(t.leaf(x));
    for (std::size_t i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 5; ++j) sum += t.value(s)(i, j);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    double c = rng.uniform(-10.0, 10.0);
    Tensor shifted = x;
    for (std::size_t j = 0; j < 5; ++j) shifted(2, j) += c;
    auto s2 = t.softmax_rows(t.leaf(shifted));
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(t.value(s2)(2, j) - t.value(s)(2, j)) < 1e-12);
  }
}

TEST_CASE("l2_norm examples and homogeneity") {
  GradTape t;
  CHECK(t.value(t.l2_norm(t.leaf(Tensor::vector({3, 4}))))[0] == doctest::Approx(5.0));
  CHECK(t.value(t.l2_norm(t.leaf(Tensor::zeros({4}))))[0] == 0.0);
  CHECK(t.value(t.l2_norm(t.leaf(Tensor::vector({1, 1, 1, 1}))))[0] == doctest::Approx(2.0));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a = random_tensor(rng, {6});
    double c = rng.uniform(-3.0, 3.0);
    Tensor scaled = a;
    for (double& v : scaled.data()) v *= c;
    double lhs = l2_norm(scaled);
    double rhs = std::abs(c) * l2_norm(a);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
  }
}

TEST_CASE("elementwise examples") {
  GradTape t;
  CHECK(t.value(t.sigmoid(t.leaf(Tensor::scalar(0))))[0] == doctest::Approx(0.5));
  CHECK(t.value(t.tanh(t.leaf(Tensor::scalar(0))))[0] == 0.0);
  auto sum = t.add(t.leaf(Tensor::vector({1, 2})), t.leaf(Tensor::vector({3, 4})));
  CHECK(t.value(sum)[0] == 4.0);
  CHECK(t.value(sum)[1] == 6.0);
  CHECK_THROWS_AS(t.add(t.leaf(Tensor::vector({1})), t.leaf(Tensor::vector({1, 2}))), ShapeError);
}

TEST_CASE("backward analytic examples") {
  {
    GradTape t;
    auto x = t.leaf(Tensor::scalar(3.0));
    auto loss = t.mul(x, x);
    auto grads = t.backward(loss);
    CHECK(grads[x][0] == doctest::Approx(6.0));
  }
  {
    GradTape t;
    auto v = t.leaf(Tensor::vector({3, 4}));
    auto grads = t.backward(t.l2_norm(v));
    CHECK(grads[v][0] == doctest::Approx(0.6));
    CHECK(grads[v][1] == doctest::Approx(0.8));
  }
  {
    GradTape t;
    auto v = t.leaf(Tensor::vector({1, 2, 3}));
    CHECK_THROWS_AS(t.backward(t.affine(v, 2.0, 0.0)), ContractError);
  }
}

TEST_CASE("backward accumulates across multiple uses of a leaf") {
  GradTape t;
  auto x = t.leaf(Tensor::vector({1.5, -0.5, 2.0}));
  auto single = t.sum(t.tanh(x));
  auto grads_single = t.backward(single);

  GradTape t2;
  auto x2 = t2.leaf(Tensor::vector({1.5, -0.5, 2.0}));
  auto twice = t2.add(t2.sum(t2.tanh(x2)), t2.sum(t2.tanh(x2)));
  auto grads_twice = t2.backward(twice);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(grads_twice[x2][i] == doctest::Approx(2.0 * grads_single[x][i]));
}

TEST_CASE("unused leaves get zero gradients") {
  GradTape t;
  auto used = t.leaf(Tensor::vector({1, 2}));
  auto unused = t.leaf(Tensor::vector({5, 6, 7}));
  auto grads = t.backward(t.sum(used));
  CHECK(grads[unused].size() == 3);
  for (double v : grads[unused].data()) CHECK(v == 0.0);
}

// Finite-difference oracle over every differentiable primitive, 100 seeded
// random instances each, inputs in [-2, 2] (shifted where the domain needs
// it), h = 1e-5, relative error < 1e-4.
TEST_CASE("primitive gradients match central finite differences") {
  struct Primitive {
    const char* name;
    std::vector<std::size_t> shape;
    std::function<GradTape::Id(GradTape&, GradTape::Id)> build;
    double lo = -2.0, hi = 2.0;
  };

  Rng shape_rng(99);
  Tensor other = random_tensor(shape_rng, {4, 3});
  Tensor bias_base = random_tensor(shape_rng, {3, 4});

  std::vector<Primitive> prims = {
      {"matmul_lhs", {3, 4}, [&](GradTape& t, GradTape::Id x) { return t.matmul(x, t.leaf(other)); }},
      {"matmul_rhs", {4, 3}, [&](GradTape& t, GradTape::Id x) { return t.matmul(t.leaf(bias_base), x); }},
      {"transpose", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.transpose(x); }},
      {"add", {3, 4}, [&](GradTape& t, GradTape::Id x) { return t.add(x, t.leaf(bias_base)); }},
      {"sub", {3, 4}, [&](GradTape& t, GradTape::Id x) { return t.sub(x, t.leaf(bias_base)); }},
      {"mul", {3, 4}, [&](GradTape& t, GradTape::Id x) { return t.mul(x, t.leaf(bias_base)); }},
      {"add_row_bias_arg", {3, 4}, [&](GradTape& t, GradTape::Id x) {
         return t.add_row_bias(x, t.leaf(Tensor::vector({0.3, -1.1, 0.7, 2.0})));
       }},
      {"add_row_bias_bias", {4}, [&](GradTape& t, GradTape::Id x) {
         return t.add_row_bias(t.leaf(bias_base), x);
       }},
      {"affine", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.affine(x, -1.7, 0.4); }},
      {"tanh", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.tanh(x); }},
      {"sigmoid", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.sigmoid(x); }},
      {"relu", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.relu(x); }},
      {"log", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.log(x); }, 0.1, 2.0},
      {"clamp", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.clamp(x, -5.0, 5.0); }},
      {"softmax_rows", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.softmax_rows(x); }},
      {"l2_norm", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.l2_norm(x); }, 0.5, 2.0},
      {"sum", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.sum(x); }},
      {"mean_rows", {3, 4}, [](GradTape& t, GradTape::Id x) { return t.mean_rows(x); }},
  };

  for (const Primitive& prim : prims) {
    CAPTURE(prim.name);
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
      Tensor x = random_tensor(rng, prim.shape, prim.lo, prim.hi);
      // keep relu inputs away from the kink
      if (std::string(prim.name) == "relu")
        for (double& v : x.data())
          if (std::abs(v) < 1e-2) v += v >= 0 ? 2e-2 : -2e-2;

      GradTape probe;
      Tensor weights = random_tensor(rng, probe.value(prim.build(probe, probe.leaf(x))).shape());

      GradTape t;
      auto xid = t.leaf(x);
      auto loss = t.sum(t.mul(prim.build(t, xid), t.leaf(weights)));
      auto analytic = t.backward(loss)[xid];

      auto f = [&](const Tensor& probe_x) {
        GradTape ft;
        return weighted_loss(ft, prim.build(ft, ft.leaf(probe_x)), weights);
      };
      Tensor numeric = finite_diff(f, x);
      CHECK(max_rel_err(analytic, numeric) < 1e-4);
    }
  }
}

TEST_CASE("composite matmul/softmax/tanh gradient matches finite differences") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor(rng, {3, 3});
    Tensor w = random_tensor(rng, {3, 3});

    auto build = [&](GradTape& t, GradTape::Id xid) {
      auto y = t.tanh(t.matmul(t.softmax_rows(t.matmul(xid, t.leaf(w))), xid));
      return t.l2_norm(y);
    };

    GradTape t;
    auto xid = t.leaf(x);
    auto analytic = t.backward(build(t, xid))[xid];
    Tensor numeric = finite_diff(
        [&](const Tensor& px) {
          GradTape ft;
          return ft.value(build(ft, ft.leaf(px)))[0];
        },
        x);
    CHECK(max_rel_err(analytic, numeric) < 1e-4);
  }
}

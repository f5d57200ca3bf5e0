// Copyright 2026 The modpol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modpol/errors.hpp"
#include "modpol/gradcore/tensor.hpp"
#include "testutil.hpp"

using namespace modpol;
using namespace modpol::gradcore;
using modpol::testutil::gradcheck;
using modpol::testutil::random_tensor;

TEST_CASE("matmul basics") {
  Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor out = matmul(eye, a);
  CHECK(out.values()[0] == 1.0);
  CHECK(out.values()[1] == 2.0);
  CHECK(out.values()[2] == 3.0);
  CHECK(out.values()[3] == 4.0);

  Tensor b = Tensor::from({2, 1}, {5, 6});
  Tensor prod = matmul(a, b);
  CHECK(prod.at(0, 0) == 17.0);  // 1*5 + 2*6
  CHECK(prod.at(1, 0) == 39.0);  // 3*5 + 4*6

  // Empty contraction: [1x0] @ [0x1] -> [[0]]
  Tensor e1 = Tensor::from({1, 0}, {});
  Tensor e2 = Tensor::from({0, 1}, {});
  Tensor z = matmul(e1, e2);
  CHECK(z.size() == 1);
  CHECK(z.values()[0] == 0.0);

  CHECK_THROWS_WITH_AS(matmul(a, Tensor::zeros({3, 2})),
                       doctest::Contains("[2x2]"), ShapeError);
}

TEST_CASE("elementwise values") {
  CHECK(gelu(Tensor::scalar(0.0)).item() == 0.0);
  Tensor s = add(Tensor::from({2}, {1, 2}), Tensor::from({2}, {3, 4}));
  CHECK(s.values()[0] == 4.0);
  CHECK(s.values()[1] == 6.0);

  // Independent evaluation of the tanh approximation at x = 3.
  const double x = 3.0;
  const double expect =
      0.5 * x *
      (1.0 + std::tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
  CHECK(gelu(Tensor::scalar(x)).item() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(gelu(Tensor::scalar(x)).item() == doctest::Approx(2.9964).epsilon(1e-4));

  CHECK_THROWS_AS(add(Tensor::zeros({3}), Tensor::zeros({2})), ShapeError);

  // Leading-dim broadcast: [2x3] + [3]
  Tensor m = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor row = Tensor::from({3}, {10, 20, 30});
  Tensor bc = add(m, row);
  CHECK(bc.at(1, 2) == 36.0);
  CHECK(bc.at(0, 0) == 11.0);

  Tensor viaenum = elementwise(EwOp::kMul, m, &m);
  CHECK(viaenum.at(1, 1) == 25.0);
  CHECK_THROWS_AS(elementwise(EwOp::kAdd, m, nullptr), ContractError);
}

TEST_CASE("layernorm values") {
  Tensor gain = Tensor::full({4}, 1.0);
  Tensor bias = Tensor::zeros({4});
  Tensor c = Tensor::full({1, 4}, 3.7);
  Tensor out = layernorm(c, gain, bias);
  for (double v : out.values()) CHECK(v == 0.0);

  // Hand evaluation for x = [1, -1]: mean 0, var 1.
  Tensor g2 = Tensor::full({2}, 1.0);
  Tensor b2 = Tensor::zeros({2});
  Tensor x = Tensor::from({1, 2}, {1.0, -1.0});
  Tensor y = layernorm(x, g2, b2, 1e-5);
  const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(y.values()[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(y.values()[1] == doctest::Approx(-expect).epsilon(1e-12));

  // gain = 0 collapses to the bias.
  Rng rng(7);
  Tensor b4 = Tensor::from({4}, {5, 6, 7, 8});
  Tensor out2 = layernorm(random_tensor({3, 4}, rng), Tensor::zeros({4}), b4);
  CHECK(out2.at(2, 1) == 6.0);
  CHECK(out2.at(0, 3) == 8.0);
}

TEST_CASE("softmax values and invariants") {
  Tensor u = softmax(Tensor::from({3}, {0, 0, 0}));
  for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Tensor big = softmax(Tensor::from({2}, {1000.0, 0.0}));
  CHECK(big.values()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(big.values()[1] < 1e-300);
  CHECK(std::isfinite(big.values()[0]));

  // Independent evaluation for [1,2,3].
  Tensor t = softmax(Tensor::from({3}, {1, 2, 3}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(t.values()[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(t.values()[0] == doctest::Approx(0.0900).epsilon(1e-3));
  CHECK(t.values()[1] == doctest::Approx(0.2447).epsilon(1e-3));
  CHECK(t.values()[2] == doctest::Approx(0.6652).epsilon(1e-3));

  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Tensor r = softmax(random_tensor({4, 5}, rng, -50, 50, false));
    for (int row = 0; row < 4; ++row) {
      double sum = 0.0;
      for (int j = 0; j < 5; ++j) sum += r.at(row, j);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("backward basics") {
  Tensor w = Tensor::from({2}, {1, 2}, true);
  Tensor loss = sum_all(mul(w, w));
  backward(loss);
  CHECK(w.grad()[0] == 2.0);
  CHECK(w.grad()[1] == 4.0);
  // Repeated backward accumulates.
  backward(loss);
  CHECK(w.grad()[0] == 4.0);
  CHECK(w.grad()[1] == 8.0);

  // Constant graph: no-op.
  Tensor c = Tensor::scalar(3.0);
  backward(sum_all(mul(c, c)));  // nothing requires grad

  CHECK_THROWS_AS(backward(Tensor::zeros({2}, true)), ContractError);
}

TEST_CASE("matmul chain matches finite differences") {
  Rng rng(42);
  std::vector<Tensor> leaves = {random_tensor({3, 4}, rng),
                                random_tensor({4, 2}, rng),
                                random_tensor({2, 2}, rng)};
  auto fwd = [&] {
    return sum_all(matmul(matmul(leaves[0], leaves[1]), leaves[2]));
  };
  CHECK(gradcheck(fwd, leaves) < 1e-4);
}

TEST_CASE("finite differences across all differentiable ops") {
  Rng rng(123);
  const int reps = 8;  // the acceptance suite runs the 100-instance version
  for (int rep = 0; rep < reps; ++rep) {
    {
      std::vector<Tensor> ls = {random_tensor({2, 3}, rng),
                                random_tensor({3, 4}, rng)};
      auto fwd = [&] { return sum_all(matmul(ls[0], ls[1])); };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({2, 4}, rng),
                                random_tensor({4}, rng)};
      auto fwd = [&] { return sum_all(mul(add(ls[0], ls[1]), ls[0])); };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({3, 3}, rng)};
      Tensor w = random_tensor({3, 3}, rng, -1, 1, false);
      auto fwd = [&] { return sum_all(mul(gelu(ls[0]), w)); };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({2, 3}, rng)};
      Tensor w = random_tensor({2, 3}, rng, -1, 1, false);
      auto fwd = [&] {
        return sum_all(mul(tanh_op(sigmoid(ls[0])), w));
      };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({3, 4}, rng),
                                random_tensor({4}, rng),
                                random_tensor({4}, rng)};
      Tensor w = random_tensor({3, 4}, rng, -1, 1, false);
      auto fwd = [&] {
        return sum_all(mul(layernorm(ls[0], ls[1], ls[2]), w));
      };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({2, 5}, rng)};
      Tensor w = random_tensor({2, 5}, rng, -1, 1, false);
      auto fwd = [&] { return sum_all(mul(softmax(ls[0]), w)); };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({3, 4}, rng)};
      auto fwd = [&] {
        Tensor t = transpose(ls[0]);
        Tensor s = slice_cols(slice_rows(t, 1, 4), 0, 2);
        return mean_all(mul(s, s));
      };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
    {
      std::vector<Tensor> ls = {random_tensor({2, 2}, rng),
                                random_tensor({2, 3}, rng)};
      auto fwd = [&] {
        Tensor c = concat_cols({ls[0], ls[1]});
        Tensor r = concat_rows({c, c});
        return sum_all(mul(reshape(scale(r, 0.5), {2, 10}), sub(reshape(r, {2, 10}), Tensor::scalar(0.25))));
      };
      CHECK(gradcheck(fwd, ls) < 1e-4);
    }
  }
}

TEST_CASE("forward pass is bit-deterministic") {
  Rng r1(9), r2(9);
  Tensor a1 = random_tensor({8, 8}, r1, -2, 2, false);
  Tensor a2 = random_tensor({8, 8}, r2, -2, 2, false);
  Tensor y1 = softmax(matmul(gelu(a1), transpose(a1)));
  Tensor y2 = softmax(matmul(gelu(a2), transpose(a2)));
  for (int64_t i = 0; i < y1.size(); ++i) {
    CHECK(y1.values()[i] == y2.values()[i]);
  }
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  Tensor t = Tensor::zeros({2, 3}, true);
  CHECK(t.size() == 6);
  CHECK(t.grad().empty());
  auto g = t.grad_mut();
  CHECK(g.size() == 6);
}

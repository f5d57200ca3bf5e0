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

#ifndef MODPOL_GRADCORE_TENSOR_HPP_
#define MODPOL_GRADCORE_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "modpol/rng.hpp"

namespace modpol::gradcore {

// Dense row-major f64 tensor with reverse-mode autodiff.
//
// A Tensor is a cheap value handle onto a graph node. Each op appends a new
// node whose parents are its inputs, so the graph is acyclic by construction
// and inputs always precede consumers. Values are immutable after creation
// except for the grad buffer (and explicit parameter updates through
// values_mut(), which only the optimizer and initializers use).
//
// Graph construction and backward() are single-threaded per graph; disjoint
// graphs may live on different threads.

class Tensor;

namespace detail {

struct Node {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized lazily to value.size(), zero-filled
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pulls this node's grad into the parents' grads. Empty for leaves and for
  // nodes whose inputs all have requires_grad == false.
  std::function<void(Node&)> backprop;
  const char* op = "leaf";

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
  bool is_leaf() const { return parents.empty(); }
};

}  // namespace detail

enum class EwOp { kAdd, kMul, kGelu, kTanh, kSigmoid };

class Tensor {
 public:
  Tensor() = default;

  // --- constructors -------------------------------------------------------
  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double v,
                     bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  /// Gaussian init, entries ~ N(0, std^2).
  static Tensor randn(std::vector<int> shape, Rng& rng, double std_dev,
                      bool requires_grad = true);

  // --- access --------------------------------------------------------------
  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  int64_t size() const;
  int rows() const { return shape().at(0); }
  int cols() const { return shape().at(1); }
  bool requires_grad() const;
  std::span<const double> values() const;
  std::span<const double> grad() const;  // empty until backward touched it
  /// Mutable value access; reserved for parameter init and optimizer steps.
  std::span<double> values_mut();
  std::span<double> grad_mut();
  double item() const;  // scalar tensors only
  double at(int r, int c) const;
  void zero_grad();

  std::shared_ptr<detail::Node> node() const { return node_; }
  static Tensor wrap(std::shared_ptr<detail::Node> n);

 private:
  std::shared_ptr<detail::Node> node_;
};

// --- ops -------------------------------------------------------------------
// Every op is differentiable w.r.t. every floating input unless noted.

/// [m x k] @ [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise dispatch over the op enum; unary ops ignore b.
Tensor elementwise(EwOp op, const Tensor& a, const Tensor* b = nullptr);

/// add/mul accept equal shapes, or one operand whose shape is a trailing
/// suffix of the other's (broadcast across leading dims), or a scalar.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor gelu(const Tensor& x);   // tanh approximation, see kGeluC
Tensor tanh_op(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Normalizes the last dim to zero mean / unit variance, then applies the
/// affine (gain, bias), both shaped [d].
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);

/// Last-dim softmax with max subtraction.
Tensor softmax(const Tensor& x);

Tensor transpose(const Tensor& x);  // 2-D only
Tensor reshape(const Tensor& x, std::vector<int> shape);
Tensor slice_rows(const Tensor& x, int r0, int r1);
Tensor slice_cols(const Tensor& x, int c0, int c1);
Tensor concat_rows(const std::vector<Tensor>& xs);
Tensor concat_cols(const std::vector<Tensor>& xs);
Tensor scale(const Tensor& x, double s);
Tensor sum_all(const Tensor& x);   // -> scalar
Tensor mean_all(const Tensor& x);  // -> scalar

/// Runs reverse-mode accumulation from a scalar loss. Every reachable tensor
/// with requires_grad receives grad += d(loss)/d(tensor); repeated calls
/// accumulate into leaf grads.
void backward(const Tensor& loss);

/// GELU tanh-approximation constant sqrt(2/pi).
inline constexpr double kGeluC = 0.7978845608028654;

std::string shape_str(const std::vector<int>& shape);

}  // namespace modpol::gradcore

#endif  // MODPOL_GRADCORE_TENSOR_HPP_

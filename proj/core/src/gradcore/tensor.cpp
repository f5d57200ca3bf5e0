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

#include "modpol/gradcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "modpol/errors.hpp"

namespace modpol::gradcore {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

int64_t shape_product(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

NodePtr make_node(std::vector<int> shape, std::vector<double> value,
                  bool requires_grad, const char* op) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->op = op;
  return n;
}

NodePtr result_node(std::vector<int> shape, std::vector<double> value,
                    std::vector<NodePtr> parents, const char* op,
                    std::function<void(Node&)> backprop) {
  bool req = false;
  for (const auto& p : parents) req = req || p->requires_grad;
  auto n = make_node(std::move(shape), std::move(value), req, op);
  n->parents = std::move(parents);
  if (req) n->backprop = std::move(backprop);
  return n;
}

// C[m x n] += A[m x k] @ B[k x n]
void gemm_acc(double* c, const double* a, const double* b, int m, int k,
              int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const double av = ai[l];
      if (av == 0.0) continue;
      const double* bl = b + static_cast<int64_t>(l) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

// C[m x p] += A[m x q] @ B^T where B is [p x q]
void gemm_nt_acc(double* c, const double* a, const double* b, int m, int p,
                 int q) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * q;
    double* ci = c + static_cast<int64_t>(i) * p;
    for (int j = 0; j < p; ++j) {
      const double* bj = b + static_cast<int64_t>(j) * q;
      double acc = 0.0;
      for (int l = 0; l < q; ++l) acc += ai[l] * bj[l];
      ci[j] += acc;
    }
  }
}

// C[k x n] += A^T @ B where A is [m x k], B is [m x n]
void gemm_tn_acc(double* c, const double* a, const double* b, int m, int k,
                 int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    const double* bi = b + static_cast<int64_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const double av = ai[l];
      if (av == 0.0) continue;
      double* cl = c + static_cast<int64_t>(l) * n;
      for (int j = 0; j < n; ++j) cl[j] += av * bi[j];
    }
  }
}

std::vector<int> strip_leading_ones(const std::vector<int>& s) {
  size_t i = 0;
  while (i + 1 < s.size() && s[i] == 1) ++i;
  return {s.begin() + static_cast<long>(i), s.end()};
}

bool is_suffix(const std::vector<int>& small, const std::vector<int>& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

// --- Tensor ------------------------------------------------------------

Tensor Tensor::wrap(NodePtr n) {
  Tensor t;
  t.node_ = std::move(n);
  return t;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto n = shape_product(shape);
  return wrap(make_node(std::move(shape), std::vector<double>(n, 0.0),
                        requires_grad, "leaf"));
}

Tensor Tensor::full(std::vector<int> shape, double v, bool requires_grad) {
  auto n = shape_product(shape);
  return wrap(make_node(std::move(shape), std::vector<double>(n, v),
                        requires_grad, "leaf"));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data,
                    bool requires_grad) {
  if (shape_product(shape) != static_cast<int64_t>(data.size())) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
  return wrap(make_node(std::move(shape), std::move(data), requires_grad,
                        "leaf"));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double std_dev,
                     bool requires_grad) {
  auto n = shape_product(shape);
  std::vector<double> data(n);
  for (auto& v : data) v = rng.normal(0.0, std_dev);
  return wrap(make_node(std::move(shape), std::move(data), requires_grad,
                        "leaf"));
}

const std::vector<int>& Tensor::shape() const { return node_->shape; }
int64_t Tensor::size() const { return node_->size(); }
bool Tensor::requires_grad() const { return node_->requires_grad; }

std::span<const double> Tensor::values() const {
  return {node_->value.data(), node_->value.size()};
}

std::span<const double> Tensor::grad() const {
  return {node_->grad.data(), node_->grad.size()};
}

std::span<double> Tensor::values_mut() {
  return {node_->value.data(), node_->value.size()};
}

std::span<double> Tensor::grad_mut() {
  node_->ensure_grad();
  return {node_->grad.data(), node_->grad.size()};
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_str(shape()));
  }
  return node_->value[0];
}

double Tensor::at(int r, int c) const {
  if (shape().size() != 2) throw ShapeError("at(r,c) needs a 2-D tensor");
  return node_->value[static_cast<int64_t>(r) * cols() + c];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// --- matmul -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2) {
    throw ShapeError("matmul needs 2-D tensors, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
  const int m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2) {
    throw ShapeError("matmul inner dimensions disagree: " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<double> out(static_cast<int64_t>(m) * n, 0.0);
  gemm_acc(out.data(), a.values().data(), b.values().data(), m, k, n);

  auto an = a.node();
  auto bn = b.node();
  auto node = result_node(
      {m, n}, std::move(out), {an, bn}, "matmul",
      [an, bn, m, k, n](Node& self) {
        if (an->requires_grad) {
          an->ensure_grad();
          gemm_nt_acc(an->grad.data(), self.grad.data(), bn->value.data(), m,
                      k, n);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          gemm_tn_acc(bn->grad.data(), an->value.data(), self.grad.data(), m,
                      k, n);
        }
      });
  return Tensor::wrap(node);
}

// --- elementwise binary with leading-dim broadcast ----------------------

namespace {

enum class BinKind { kAdd, kSub, kMul };

Tensor binary_op(BinKind kind, const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  // big carries the output shape; small repeats along leading dims.
  bool b_small;
  if (sa == sb) {
    b_small = true;
  } else if (b.size() == 1 || is_suffix(strip_leading_ones(sb), sa)) {
    b_small = true;
  } else if (a.size() == 1 || is_suffix(strip_leading_ones(sa), sb)) {
    b_small = false;
  } else {
    throw ShapeError("shapes not broadcastable: " + shape_str(sa) + " vs " +
                     shape_str(sb));
  }
  const Tensor& big = b_small ? a : b;
  const Tensor& small = b_small ? b : a;
  const int64_t nbig = big.size();
  const int64_t nsmall = small.size();
  if (nsmall == 0 || nbig % nsmall != 0) {
    throw ShapeError("shapes not broadcastable: " + shape_str(sa) + " vs " +
                     shape_str(sb));
  }

  const double* pa = a.values().data();
  const double* pb = b.values().data();
  const int64_t na = a.size(), nb = b.size();
  std::vector<double> out(nbig);
  for (int64_t i = 0; i < nbig; ++i) {
    const double va = pa[na == nbig ? i : i % na];
    const double vb = pb[nb == nbig ? i : i % nb];
    switch (kind) {
      case BinKind::kAdd: out[i] = va + vb; break;
      case BinKind::kSub: out[i] = va - vb; break;
      case BinKind::kMul: out[i] = va * vb; break;
    }
  }

  auto an = a.node();
  auto bn = b.node();
  auto node = result_node(
      big.shape(), std::move(out), {an, bn},
      kind == BinKind::kAdd ? "add" : (kind == BinKind::kSub ? "sub" : "mul"),
      [an, bn, kind](Node& self) {
        const int64_t n = self.size();
        const int64_t na2 = an->size(), nb2 = bn->size();
        if (an->requires_grad) {
          an->ensure_grad();
          for (int64_t i = 0; i < n; ++i) {
            const double g = self.grad[i];
            const double w =
                kind == BinKind::kMul ? bn->value[nb2 == n ? i : i % nb2] : 1.0;
            an->grad[na2 == n ? i : i % na2] += g * w;
          }
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          for (int64_t i = 0; i < n; ++i) {
            const double g = self.grad[i];
            double w = 1.0;
            if (kind == BinKind::kMul) {
              w = an->value[na2 == n ? i : i % na2];
            } else if (kind == BinKind::kSub) {
              w = -1.0;
            }
            bn->grad[nb2 == n ? i : i % nb2] += g * w;
          }
        }
      });
  return Tensor::wrap(node);
}

Tensor unary_op(const char* name, const Tensor& x,
                double (*fwd)(double), double (*dydx)(double)) {
  std::vector<double> out(x.size());
  const double* px = x.values().data();
  for (int64_t i = 0; i < x.size(); ++i) out[i] = fwd(px[i]);
  auto xn = x.node();
  auto node = result_node(
      x.shape(), std::move(out), {xn}, name, [xn, dydx](Node& self) {
        xn->ensure_grad();
        for (int64_t i = 0; i < self.size(); ++i) {
          xn->grad[i] += self.grad[i] * dydx(xn->value[i]);
        }
      });
  return Tensor::wrap(node);
}

double gelu_fwd(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

double tanh_fwd(double x) { return std::tanh(x); }
double tanh_grad(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

double sigmoid_fwd(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double sigmoid_grad(double x) {
  const double s = sigmoid_fwd(x);
  return s * (1.0 - s);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::kAdd, a, b);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::kSub, a, b);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(BinKind::kMul, a, b);
}
Tensor gelu(const Tensor& x) { return unary_op("gelu", x, gelu_fwd, gelu_grad); }
Tensor tanh_op(const Tensor& x) {
  return unary_op("tanh", x, tanh_fwd, tanh_grad);
}
Tensor sigmoid(const Tensor& x) {
  return unary_op("sigmoid", x, sigmoid_fwd, sigmoid_grad);
}

Tensor elementwise(EwOp op, const Tensor& a, const Tensor* b) {
  const bool binary = (op == EwOp::kAdd || op == EwOp::kMul);
  if (binary && b == nullptr) {
    throw ContractError("elementwise: binary op needs a second operand");
  }
  switch (op) {
    case EwOp::kAdd: return add(a, *b);
    case EwOp::kMul: return mul(a, *b);
    case EwOp::kGelu: return gelu(a);
    case EwOp::kTanh: return tanh_op(a);
    case EwOp::kSigmoid: return sigmoid(a);
  }
  throw ContractError("elementwise: unknown op");
}

// --- layernorm ----------------------------------------------------------

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  if (x.shape().empty()) throw ShapeError("layernorm on empty shape");
  const int d = x.shape().back();
  if (d < 1) throw ShapeError("layernorm last dim must be >= 1");
  if (gain.size() != d || bias.size() != d) {
    throw ShapeError("layernorm gain/bias must have length " +
                     std::to_string(d));
  }
  const int64_t rows = x.size() / d;
  const double* px = x.values().data();
  const double* pg = gain.values().data();
  const double* pb = bias.values().data();

  std::vector<double> out(x.size());
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv = std::make_shared<std::vector<double>>(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = px + r * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = row[j] - mean;
      var += c * c;
    }
    var /= d;
    const double iv = 1.0 / std::sqrt(var + eps);
    (*inv)[r] = iv;
    for (int j = 0; j < d; ++j) {
      const double xh = (row[j] - mean) * iv;
      (*xhat)[r * d + j] = xh;
      out[r * d + j] = pg[j] * xh + pb[j];
    }
  }

  auto xn = x.node();
  auto gn = gain.node();
  auto bn = bias.node();
  auto node = result_node(
      x.shape(), std::move(out), {xn, gn, bn}, "layernorm",
      [xn, gn, bn, d, rows, xhat, inv](Node& self) {
        for (int64_t r = 0; r < rows; ++r) {
          const double* dy = self.grad.data() + r * d;
          const double* xh = xhat->data() + r * d;
          if (gn->requires_grad) {
            gn->ensure_grad();
            for (int j = 0; j < d; ++j) gn->grad[j] += dy[j] * xh[j];
          }
          if (bn->requires_grad) {
            bn->ensure_grad();
            for (int j = 0; j < d; ++j) bn->grad[j] += dy[j];
          }
          if (xn->requires_grad) {
            xn->ensure_grad();
            double m1 = 0.0, m2 = 0.0;  // mean(dxhat), mean(dxhat * xhat)
            for (int j = 0; j < d; ++j) {
              const double dxh = dy[j] * gn->value[j];
              m1 += dxh;
              m2 += dxh * xh[j];
            }
            m1 /= d;
            m2 /= d;
            const double iv = (*inv)[r];
            for (int j = 0; j < d; ++j) {
              const double dxh = dy[j] * gn->value[j];
              xn->grad[r * d + j] += iv * (dxh - m1 - xh[j] * m2);
            }
          }
        }
      });
  return Tensor::wrap(node);
}

// --- softmax -------------------------------------------------------------

Tensor softmax(const Tensor& x) {
  if (x.shape().empty()) throw ShapeError("softmax on empty shape");
  const int n = x.shape().back();
  if (n < 1) throw ShapeError("softmax last dim must be >= 1");
  const int64_t rows = x.size() / n;
  const double* px = x.values().data();
  std::vector<double> out(x.size());
  for (int64_t r = 0; r < rows; ++r) {
    const double* row = px + r * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = std::exp(row[j] - mx);
      out[r * n + j] = e;
      sum += e;
    }
    const double is = 1.0 / sum;
    for (int j = 0; j < n; ++j) out[r * n + j] *= is;
  }

  auto xn = x.node();
  auto node = result_node(
      x.shape(), std::move(out), {xn}, "softmax", [xn, n, rows](Node& self) {
        xn->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
          const double* y = self.value.data() + r * n;
          const double* dy = self.grad.data() + r * n;
          double dot = 0.0;
          for (int j = 0; j < n; ++j) dot += dy[j] * y[j];
          for (int j = 0; j < n; ++j) {
            xn->grad[r * n + j] += y[j] * (dy[j] - dot);
          }
        }
      });
  return Tensor::wrap(node);
}

// --- structural ops --------------------------------------------------------

Tensor transpose(const Tensor& x) {
  if (x.shape().size() != 2) throw ShapeError("transpose needs a 2-D tensor");
  const int m = x.rows(), n = x.cols();
  std::vector<double> out(x.size());
  const double* px = x.values().data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out[static_cast<int64_t>(j) * m + i] = px[static_cast<int64_t>(i) * n + j];
  }
  auto xn = x.node();
  auto node = result_node(
      {n, m}, std::move(out), {xn}, "transpose", [xn, m, n](Node& self) {
        xn->ensure_grad();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            xn->grad[static_cast<int64_t>(i) * n + j] +=
                self.grad[static_cast<int64_t>(j) * m + i];
          }
        }
      });
  return Tensor::wrap(node);
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (shape_product(shape) != x.size()) {
    throw ShapeError("reshape " + shape_str(x.shape()) + " -> " +
                     shape_str(shape) + " changes element count");
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  auto xn = x.node();
  auto node = result_node(std::move(shape), std::move(out), {xn}, "reshape",
                          [xn](Node& self) {
                            xn->ensure_grad();
                            for (int64_t i = 0; i < self.size(); ++i) {
                              xn->grad[i] += self.grad[i];
                            }
                          });
  return Tensor::wrap(node);
}

Tensor slice_rows(const Tensor& x, int r0, int r1) {
  if (x.shape().size() != 2) throw ShapeError("slice_rows needs a 2-D tensor");
  const int m = x.rows(), n = x.cols();
  if (r0 < 0 || r1 > m || r0 >= r1) {
    throw ShapeError("slice_rows range [" + std::to_string(r0) + ", " +
                     std::to_string(r1) + ") invalid for " +
                     shape_str(x.shape()));
  }
  const double* px = x.values().data();
  std::vector<double> out(px + static_cast<int64_t>(r0) * n,
                          px + static_cast<int64_t>(r1) * n);
  auto xn = x.node();
  auto node = result_node(
      {r1 - r0, n}, std::move(out), {xn}, "slice_rows",
      [xn, r0, n](Node& self) {
        xn->ensure_grad();
        for (int64_t i = 0; i < self.size(); ++i) {
          xn->grad[static_cast<int64_t>(r0) * n + i] += self.grad[i];
        }
      });
  return Tensor::wrap(node);
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
  if (x.shape().size() != 2) throw ShapeError("slice_cols needs a 2-D tensor");
  const int m = x.rows(), n = x.cols();
  if (c0 < 0 || c1 > n || c0 >= c1) {
    throw ShapeError("slice_cols range [" + std::to_string(c0) + ", " +
                     std::to_string(c1) + ") invalid for " +
                     shape_str(x.shape()));
  }
  const int w = c1 - c0;
  std::vector<double> out(static_cast<int64_t>(m) * w);
  const double* px = x.values().data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < w; ++j) {
      out[static_cast<int64_t>(i) * w + j] = px[static_cast<int64_t>(i) * n + c0 + j];
    }
  }
  auto xn = x.node();
  auto node = result_node(
      {m, w}, std::move(out), {xn}, "slice_cols",
      [xn, m, n, c0, w](Node& self) {
        xn->ensure_grad();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < w; ++j) {
            xn->grad[static_cast<int64_t>(i) * n + c0 + j] +=
                self.grad[static_cast<int64_t>(i) * w + j];
          }
        }
      });
  return Tensor::wrap(node);
}

Tensor concat_rows(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ContractError("concat_rows on empty list");
  const int n = xs[0].cols();
  int m = 0;
  for (const auto& x : xs) {
    if (x.shape().size() != 2 || x.cols() != n) {
      throw ShapeError("concat_rows: column counts disagree");
    }
    m += x.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<int64_t>(m) * n);
  std::vector<NodePtr> parents;
  parents.reserve(xs.size());
  for (const auto& x : xs) {
    out.insert(out.end(), x.values().begin(), x.values().end());
    parents.push_back(x.node());
  }
  auto ps = parents;
  auto node = result_node(
      {m, n}, std::move(out), std::move(parents), "concat_rows",
      [ps](Node& self) {
        int64_t off = 0;
        for (const auto& p : ps) {
          if (p->requires_grad) {
            p->ensure_grad();
            for (int64_t i = 0; i < p->size(); ++i) {
              p->grad[i] += self.grad[off + i];
            }
          }
          off += p->size();
        }
      });
  return Tensor::wrap(node);
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ContractError("concat_cols on empty list");
  const int m = xs[0].rows();
  int n = 0;
  for (const auto& x : xs) {
    if (x.shape().size() != 2 || x.rows() != m) {
      throw ShapeError("concat_cols: row counts disagree");
    }
    n += x.cols();
  }
  std::vector<double> out(static_cast<int64_t>(m) * n);
  std::vector<NodePtr> parents;
  parents.reserve(xs.size());
  int off = 0;
  for (const auto& x : xs) {
    const int w = x.cols();
    const double* px = x.values().data();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < w; ++j) {
        out[static_cast<int64_t>(i) * n + off + j] = px[static_cast<int64_t>(i) * w + j];
      }
    }
    off += w;
    parents.push_back(x.node());
  }
  auto ps = parents;
  auto node = result_node(
      {m, n}, std::move(out), std::move(parents), "concat_cols",
      [ps, m, n](Node& self) {
        int off2 = 0;
        for (const auto& p : ps) {
          const int w = p->shape[1];
          if (p->requires_grad) {
            p->ensure_grad();
            for (int i = 0; i < m; ++i) {
              for (int j = 0; j < w; ++j) {
                p->grad[static_cast<int64_t>(i) * w + j] +=
                    self.grad[static_cast<int64_t>(i) * n + off2 + j];
              }
            }
          }
          off2 += w;
        }
      });
  return Tensor::wrap(node);
}

Tensor scale(const Tensor& x, double s) {
  std::vector<double> out(x.size());
  const double* px = x.values().data();
  for (int64_t i = 0; i < x.size(); ++i) out[i] = px[i] * s;
  auto xn = x.node();
  auto node = result_node(x.shape(), std::move(out), {xn}, "scale",
                          [xn, s](Node& self) {
                            xn->ensure_grad();
                            for (int64_t i = 0; i < self.size(); ++i) {
                              xn->grad[i] += self.grad[i] * s;
                            }
                          });
  return Tensor::wrap(node);
}

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  auto xn = x.node();
  auto node = result_node({1}, {acc}, {xn}, "sum_all", [xn](Node& self) {
    xn->ensure_grad();
    const double g = self.grad[0];
    for (int64_t i = 0; i < xn->size(); ++i) xn->grad[i] += g;
  });
  return Tensor::wrap(node);
}

Tensor mean_all(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("mean_all on empty tensor");
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  acc /= n;
  auto xn = x.node();
  auto node = result_node({1}, {acc}, {xn}, "mean_all", [xn, n](Node& self) {
    xn->ensure_grad();
    const double g = self.grad[0] / n;
    for (int64_t i = 0; i < xn->size(); ++i) xn->grad[i] += g;
  });
  return Tensor::wrap(node);
}

// --- backward ----------------------------------------------------------

void backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(loss.shape()));
  }
  auto root = loss.node();
  if (!root->requires_grad) return;  // constant graph

  // Iterative post-order DFS over the requires_grad subgraph; the reversed
  // list is a topological order with consumers before producers.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Interior grads are scratch for this pass; leaf grads accumulate across
  // backward calls.
  for (Node* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
    n->ensure_grad();
  }
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

}  // namespace modpol::gradcore

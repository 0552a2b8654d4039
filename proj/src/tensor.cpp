// SPDX-License-Identifier: Apache-2.0
#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace canweave {

using detail::Node;

std::string shape_string(const Shape &shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

thread_local Tape g_tape;
thread_local bool g_grad_enabled = true;

void check_shape_valid(const Shape &shape) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
  }
}

void check_finite(const char *op, const std::vector<double> &values) {
  for (double x : values) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + ": non-finite output");
  }
}

[[noreturn]] void shape_fail(const char *op, const Tensor &a, const Tensor &b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                   shape_string(b.shape()));
}

[[noreturn]] void shape_fail(const char *op, const Tensor &a, const std::string &expected) {
  throw ShapeError(std::string(op) + ": got " + shape_string(a.shape()) + ", expected " + expected);
}

void require_rank(const char *op, const Tensor &a, std::size_t rank) {
  if (!a.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
  if (a.rank() != rank) shape_fail(op, a, "rank " + std::to_string(rank));
}

void require_same(const char *op, const Tensor &a, const Tensor &b) {
  if (!a.defined() || !b.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
  if (a.shape() != b.shape()) shape_fail(op, a, b);
}

// Builds an op output. When recording is enabled and any input needs a
// gradient, the output is linked to its inputs and put on the tape.
Tensor make_result(const char *op, Shape shape, std::vector<double> value,
                   std::initializer_list<const Tensor *> inputs, std::function<void(Node &)> backward) {
  check_finite(op, value);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const Tensor *t : inputs) needs_grad = needs_grad || t->requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    for (const Tensor *t : inputs) node->parents.push_back(t->node());
    node->backward = std::move(backward);
    g_tape.record(node);
  }
  return Tensor(std::move(node));
}

Tensor make_result(const char *op, Shape shape, std::vector<double> value, std::span<const Tensor> inputs,
                   std::function<void(Node &)> backward) {
  check_finite(op, value);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const Tensor &t : inputs) needs_grad = needs_grad || t.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    for (const Tensor &t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(backward);
    g_tape.record(node);
  }
  return Tensor(std::move(node));
}

// Gradient buffer of parent i, or nullptr when it does not take one.
std::vector<double> *parent_grad(Node &self, std::size_t i) {
  Node &p = *self.parents[i];
  return p.requires_grad ? &p.ensure_grad() : nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double fill, bool requires_grad) {
  check_shape_valid(shape);
  std::vector<double> values(shape_size(shape), fill);
  return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape_valid(shape);
  if (shape_size(shape) != values.size()) {
    throw ShapeError("tensor: shape " + shape_string(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  check_finite("tensor", values);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), 0.0);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return from({n}, std::move(values), requires_grad);
}

const Shape &Tensor::shape() const {
  if (!node_) throw ShapeError("tensor: undefined");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape &s = shape();
  if (axis >= s.size()) throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  return s[axis];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor of shape " + shape_string(shape()) + " is not a scalar");
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const { return node_->value[row * node_->shape[1] + col]; }

std::vector<double> Tensor::grad() const {
  if (!node_->grad.empty()) return node_->grad;
  return std::vector<double>(node_->value.size(), 0.0);
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::span<double> Tensor::mutable_values() { return node_->value; }

std::span<double> Tensor::mutable_grad() { return node_->ensure_grad(); }

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

Tensor Tensor::clone() const { return from(shape(), node_->value, node_->requires_grad); }

// ---------------------------------------------------------------------------
// Tape

void Tape::backward(const Tensor &loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " +
                     (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) {
    clear();
    throw InvalidArgument("backward: loss does not depend on any tensor that requires a gradient");
  }
  Node &root = *loss.node();
  if (root.parents.empty()) {
    // The loss is itself a leaf parameter.
    root.ensure_grad()[0] += 1.0;
    clear();
    return;
  }
  if (ops_.empty()) throw InvalidArgument("backward: tape is empty");
  root.ensure_grad()[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    Node &node = **it;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(node);
  }
  // Release the graph so intermediate buffers do not outlive the step.
  for (auto &node : ops_) {
    node->backward = nullptr;
    node->parents.clear();
  }
  clear();
}

Tape &current_tape() { return g_tape; }

void backward(const Tensor &loss) { g_tape.backward(loss); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Linear algebra and shape ops

Tensor matmul(const Tensor &a, const Tensor &b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_fail("matmul", a, b);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double *row = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double *brow = &bv[p * n];
      for (std::size_t j = 0; j < n; ++j) row[j] += x * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {&a, &b}, [m, k, n](Node &self) {
    const auto &g = self.grad;
    const auto &av = self.parents[0]->value;
    const auto &bv = self.parents[1]->value;
    if (auto *ga = parent_grad(self, 0)) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          (*ga)[i * k + p] += acc;
        }
    }
    if (auto *gb = parent_grad(self, 1)) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double x = av[i * k + p];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += x * g[i * n + j];
        }
    }
  });
}

Tensor transpose(const Tensor &a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto av = a.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return make_result("transpose", {n, m}, std::move(out), {&a}, [m, n](Node &self) {
    if (auto *ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j * m + i];
    }
  });
}

Tensor reshape(const Tensor &a, Shape shape) {
  check_shape_valid(shape);
  if (shape_size(shape) != a.size()) shape_fail("reshape", a, shape_string(shape) + "-compatible");
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_result("reshape", std::move(shape), std::move(out), {&a}, [](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Elementwise

namespace {

template <typename Forward, typename DA, typename DB>
Tensor binary_elementwise(const char *op, const Tensor &a, const Tensor &b, Forward f, DA da, DB db) {
  require_same(op, a, b);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  return make_result(op, a.shape(), std::move(out), {&a, &b}, [da, db](Node &self) {
    const auto &av = self.parents[0]->value;
    const auto &bv = self.parents[1]->value;
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * da(av[i], bv[i]);
    if (auto *gb = parent_grad(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i] += self.grad[i] * db(av[i], bv[i]);
  });
}

// `derivative(x, y)` receives the input and output values.
template <typename Forward, typename Derivative>
Tensor unary_elementwise(const char *op, const Tensor &a, Forward f, Derivative derivative) {
  if (!a.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return make_result(op, a.shape(), std::move(out), {&a}, [derivative](Node &self) {
    if (auto *ga = parent_grad(self, 0)) {
      const auto &x = self.parents[0]->value;
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        (*ga)[i] += self.grad[i] * derivative(x[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor &a, const Tensor &b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor add_row_vector(const Tensor &a, const Tensor &row) {
  require_rank("add_row_vector", a, 2);
  require_rank("add_row_vector", row, 1);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (row.dim(0) != n) shape_fail("add_row_vector", a, row);
  const auto av = a.values();
  const auto rv = row.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + rv[j];
  return make_result("add_row_vector", {m, n}, std::move(out), {&a, &row}, [m, n](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < m * n; ++i) (*ga)[i] += self.grad[i];
    if (auto *gr = parent_grad(self, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gr)[j] += self.grad[i * n + j];
  });
}

Tensor scale(const Tensor &a, double factor) {
  return unary_elementwise(
      "scale", a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor &a, double offset) {
  return unary_elementwise(
      "add_scalar", a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor &a) { return scale(a, -1.0); }

Tensor tanh(const Tensor &a) {
  return unary_elementwise(
      "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor &a) {
  return unary_elementwise(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor &a) {
  return unary_elementwise(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor &a, double eps) {
  return unary_elementwise(
      "log", a, [eps](double x) { return std::log(x + eps); }, [eps](double x, double) { return 1.0 / (x + eps); });
}

Tensor sqrt(const Tensor &a) {
  return unary_elementwise(
      "sqrt", a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor clamp_max(const Tensor &a, double ceiling) {
  return unary_elementwise(
      "clamp_max", a, [ceiling](double x) { return std::min(x, ceiling); },
      [ceiling](double x, double) { return x <= ceiling ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Reductions

Tensor sum(const Tensor &a) {
  const auto av = a.values();
  double total = 0.0;
  for (double x : av) total += x;
  return make_result("sum", {1}, {total}, {&a}, [](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (double &g : *ga) g += self.grad[0];
  });
}

Tensor mean(const Tensor &a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor sum_rows(const Tensor &a) {
  require_rank("sum_rows", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto av = a.values();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += av[i * n + j];
  return make_result("sum_rows", {n}, std::move(out), {&a}, [m, n](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j];
  });
}

Tensor mean_rows(const Tensor &a) {
  require_rank("mean_rows", a, 2);
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.dim(0)));
}

Tensor max_rows(const Tensor &a, std::size_t rows) {
  require_rank("max_rows", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (rows == 0) rows = m;
  if (rows > m) shape_fail("max_rows", a, "at least " + std::to_string(rows) + " rows");
  const auto av = a.values();
  std::vector<double> out(n);
  std::vector<std::size_t> argmax(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double best = av[j];
    for (std::size_t i = 1; i < rows; ++i) {
      if (av[i * n + j] > best) {
        best = av[i * n + j];
        argmax[j] = i;
      }
    }
    out[j] = best;
  }
  return make_result("max_rows", {n}, std::move(out), {&a}, [n, argmax = std::move(argmax)](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t j = 0; j < n; ++j) (*ga)[argmax[j] * n + j] += self.grad[j];
  });
}

// ---------------------------------------------------------------------------
// Softmax

namespace {

Tensor softmax_impl(const char *op, const Tensor &a, std::span<const bool> mask) {
  if (!a.defined() || (a.rank() != 1 && a.rank() != 2)) shape_fail(op, a, "rank 1 or 2");
  const std::size_t cols = a.shape().back();
  const std::size_t rows = a.size() / cols;
  if (!mask.empty() && mask.size() != cols)
    shape_fail(op, a, "last extent " + std::to_string(mask.size()) + " to match the mask");
  const bool any_valid = mask.empty() || std::any_of(mask.begin(), mask.end(), [](bool v) { return v; });
  if (!any_valid) throw InvalidArgument(std::string(op) + ": mask has no valid position");
  auto valid = [&mask](std::size_t j) { return mask.empty() || mask[j]; };

  const auto av = a.values();
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double *x = &av[r * cols];
    double *y = &out[r * cols];
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols; ++j)
      if (valid(j)) peak = std::max(peak, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!valid(j)) continue;
      y[j] = std::exp(x[j] - peak);
      z += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= z;
  }
  return make_result(op, a.shape(), std::move(out), {&a}, [rows, cols](Node &self) {
    if (auto *ga = parent_grad(self, 0)) {
      // dx = y * (g - <g, y>); masked outputs are constant zero.
      for (std::size_t r = 0; r < rows; ++r) {
        const double *y = &self.value[r * cols];
        const double *g = &self.grad[r * cols];
        double inner = 0.0;
        for (std::size_t j = 0; j < cols; ++j) inner += g[j] * y[j];
        for (std::size_t j = 0; j < cols; ++j) (*ga)[r * cols + j] += y[j] * (g[j] - inner);
      }
    }
  });
}

}  // namespace

Tensor softmax(const Tensor &a) { return softmax_impl("softmax", a, {}); }

Tensor masked_softmax(const Tensor &a, std::span<const bool> mask) {
  if (mask.empty()) throw InvalidArgument("masked_softmax: empty mask");
  return softmax_impl("masked_softmax", a, mask);
}

// ---------------------------------------------------------------------------
// Assembly and indexing

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const Tensor &p : parts) {
    require_rank("concat", p, 1);
    offsets.push_back(out.size());
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  const std::size_t total = out.size();
  return make_result("concat", {total}, std::move(out), parts, [offsets = std::move(offsets)](Node &self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (auto *gp = parent_grad(self, i))
        for (std::size_t j = 0; j < gp->size(); ++j) (*gp)[j] += self.grad[offsets[i] + j];
    }
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  require_rank("stack_rows", rows[0], 1);
  const std::size_t n = rows[0].dim(0);
  std::vector<double> out;
  out.reserve(rows.size() * n);
  for (const Tensor &r : rows) {
    require_rank("stack_rows", r, 1);
    if (r.dim(0) != n) shape_fail("stack_rows", rows[0], r);
    out.insert(out.end(), r.values().begin(), r.values().end());
  }
  return make_result("stack_rows", {rows.size(), n}, std::move(out), rows, [n](Node &self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (auto *gp = parent_grad(self, i))
        for (std::size_t j = 0; j < n; ++j) (*gp)[j] += self.grad[i * n + j];
    }
  });
}

Tensor gather_rows(const Tensor &table, std::span<const std::size_t> ids) {
  require_rank("gather_rows", table, 2);
  if (ids.empty()) throw ShapeError("gather_rows: empty index list");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  const auto tv = table.values();
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows) {
      throw InvalidArgument("gather_rows: id " + std::to_string(ids[i]) + " out of range for table " +
                            shape_string(table.shape()));
    }
    std::copy_n(&tv[ids[i] * d], d, &out[i * d]);
  }
  std::vector<std::size_t> index(ids.begin(), ids.end());
  return make_result("gather_rows", {ids.size(), d}, std::move(out), {&table},
                     [d, index = std::move(index)](Node &self) {
                       if (auto *gt = parent_grad(self, 0))
                         for (std::size_t i = 0; i < index.size(); ++i)
                           for (std::size_t j = 0; j < d; ++j) (*gt)[index[i] * d + j] += self.grad[i * d + j];
                     });
}

Tensor slice_rows(const Tensor &a, std::size_t begin, std::size_t end) {
  require_rank("slice_rows", a, 2);
  if (begin >= end || end > a.dim(0))
    shape_fail("slice_rows", a, "rows [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  const std::size_t n = a.dim(1);
  const auto av = a.values();
  std::vector<double> out(av.begin() + begin * n, av.begin() + end * n);
  return make_result("slice_rows", {end - begin, n}, std::move(out), {&a}, [begin, n](Node &self) {
    if (auto *ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[begin * n + i] += self.grad[i];
  });
}

Tensor pick(const Tensor &a, std::size_t index) {
  require_rank("pick", a, 1);
  if (index >= a.size()) shape_fail("pick", a, "index " + std::to_string(index) + " in range");
  return make_result("pick", {1}, {a.at(index)}, {&a}, [index](Node &self) {
    if (auto *ga = parent_grad(self, 0)) (*ga)[index] += self.grad[0];
  });
}

Tensor dot(const Tensor &a, const Tensor &b) {
  require_rank("dot", a, 1);
  require_same("dot", a, b);
  return sum(mul(a, b));
}

Tensor norm(const Tensor &a) {
  double sq = 0.0;
  for (double x : a.values()) sq += x * x;
  const double n = std::sqrt(sq);
  return make_result("norm", {1}, {n}, {&a}, [](Node &self) {
    const double n = self.value[0];
    if (n == 0.0) return;
    if (auto *ga = parent_grad(self, 0)) {
      const auto &x = self.parents[0]->value;
      for (std::size_t i = 0; i < x.size(); ++i) (*ga)[i] += self.grad[0] * x[i] / n;
    }
  });
}

double cosine_value(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  // Exactly 1 for a vector against itself.
  const double prod = aa * bb;
  if (std::isfinite(prod) && prod > 0.0) return ab / std::sqrt(prod);
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Tensor cosine(const Tensor &a, const Tensor &b) {
  require_rank("cosine", a, 1);
  require_same("cosine", a, b);
  const double c = cosine_value(a.values(), b.values());
  return make_result("cosine", {1}, {c}, {&a, &b}, [](Node &self) {
    const auto &x = self.parents[0]->value;
    const auto &y = self.parents[1]->value;
    double xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    if (xx == 0.0 || yy == 0.0) return;
    const double nx = std::sqrt(xx), ny = std::sqrt(yy), c = self.value[0], g = self.grad[0];
    // d cos / dx = y / (|x||y|) - cos * x / |x|^2
    if (auto *gx = parent_grad(self, 0))
      for (std::size_t i = 0; i < x.size(); ++i) (*gx)[i] += g * (y[i] / (nx * ny) - c * x[i] / xx);
    if (auto *gy = parent_grad(self, 1))
      for (std::size_t i = 0; i < y.size(); ++i) (*gy)[i] += g * (x[i] / (nx * ny) - c * y[i] / yy);
  });
}

// ---------------------------------------------------------------------------
// Convolution

Tensor conv1d(const Tensor &input, const Tensor &filters, const Tensor &bias, std::size_t width,
              std::size_t windows) {
  require_rank("conv1d", input, 2);
  require_rank("conv1d", filters, 2);
  require_rank("conv1d", bias, 1);
  const std::size_t n = input.dim(0), d = input.dim(1), t = filters.dim(0);
  if (width == 0 || windows == 0) throw ShapeError("conv1d: width and window count must be positive");
  if (filters.dim(1) != width * d) shape_fail("conv1d", input, filters);
  if (bias.dim(0) != t) shape_fail("conv1d", filters, bias);

  const auto xv = input.values();
  const auto fv = filters.values();
  const auto bv = bias.values();
  std::vector<double> out(windows * t);
  for (std::size_t s = 0; s < windows; ++s) {
    // Window rows available before running off the input.
    const std::size_t span = s < n ? std::min(width, n - s) : 0;
    const double *x = &xv[0] + s * d;
    for (std::size_t f = 0; f < t; ++f) {
      const double *w = &fv[f * width * d];
      double acc = bv[f];
      for (std::size_t i = 0; i < span * d; ++i) acc += w[i] * x[i];
      out[s * t + f] = acc;
    }
  }
  return make_result("conv1d", {windows, t}, std::move(out), {&input, &filters, &bias},
                     [n, d, t, width, windows](Node &self) {
                       const auto &xv = self.parents[0]->value;
                       const auto &fv = self.parents[1]->value;
                       auto *gx = parent_grad(self, 0);
                       auto *gf = parent_grad(self, 1);
                       auto *gb = parent_grad(self, 2);
                       for (std::size_t s = 0; s < windows; ++s) {
                         const std::size_t span = s < n ? std::min(width, n - s) : 0;
                         for (std::size_t f = 0; f < t; ++f) {
                           const double g = self.grad[s * t + f];
                           if (g == 0.0) continue;
                           if (gb) (*gb)[f] += g;
                           const std::size_t wbase = f * width * d;
                           for (std::size_t i = 0; i < span * d; ++i) {
                             if (gf) (*gf)[wbase + i] += g * xv[s * d + i];
                             if (gx) (*gx)[s * d + i] += g * fv[wbase + i];
                           }
                         }
                       }
                     });
}

}  // namespace canweave

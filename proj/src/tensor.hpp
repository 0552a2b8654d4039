// SPDX-License-Identifier: Apache-2.0
//
// Dense float64 tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle to an immutable value buffer plus an optional
// gradient buffer. Ops that see at least one input requiring a gradient
// record their output on the calling thread's Tape together with a closure
// that pushes the output gradient back into the inputs. backward() replays
// the tape once in reverse and clears it.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace canweave {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape &shape);
std::size_t shape_size(const Shape &shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents' grads.
  std::function<void(Node &)> backward;

  std::vector<double> &ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double fill, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// 1-D tensor.
  static Tensor vector(std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape &shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  double item() const;
  double at(std::size_t i) const { return node_->value[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  /// Gradient accumulated by backward(); all zeros when nothing has flowed.
  std::vector<double> grad() const;
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  void zero_grad();

  /// In-place access for parameter updates. Only valid on leaves that are
  /// not part of a live tape.
  std::span<double> mutable_values();
  std::span<double> mutable_grad();

  /// Value copy that does not share storage or gradient.
  Tensor detach() const;
  /// Deep copy preserving requires_grad, without gradient history.
  Tensor clone() const;

  bool same_node(const Tensor &other) const noexcept { return node_ == other.node_; }
  const std::shared_ptr<detail::Node> &node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

class Tape {
 public:
  void record(std::shared_ptr<detail::Node> node) { ops_.push_back(std::move(node)); }
  std::size_t size() const noexcept { return ops_.size(); }
  bool empty() const noexcept { return ops_.empty(); }
  void clear() { ops_.clear(); }

  /// Replays recorded ops in reverse order starting from `loss`, then clears.
  void backward(const Tensor &loss);

 private:
  std::vector<std::shared_ptr<detail::Node>> ops_;
};

/// The tape used by ops on the calling thread.
Tape &current_tape();

/// Backward pass on the current thread's tape. `loss` must be scalar.
void backward(const Tensor &loss);

/// Disables recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---------------------------------------------------------------------------
// Ops. All of them validate shapes (ShapeError) and reject non-finite
// outputs (NumericError).

Tensor matmul(const Tensor &a, const Tensor &b);  // [m,k] x [k,n]
Tensor transpose(const Tensor &a);                // 2-D only
Tensor reshape(const Tensor &a, Shape shape);

Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
/// [m,n] + [n], bias broadcast over rows.
Tensor add_row_vector(const Tensor &a, const Tensor &row);
Tensor scale(const Tensor &a, double factor);
Tensor add_scalar(const Tensor &a, double offset);
Tensor neg(const Tensor &a);

Tensor tanh(const Tensor &a);
Tensor relu(const Tensor &a);
Tensor exp(const Tensor &a);
/// log(a + eps); eps = 0 gives the plain logarithm.
Tensor log(const Tensor &a, double eps = 0.0);
Tensor sqrt(const Tensor &a);
/// min(a, ceiling) elementwise; at equality the gradient passes through.
Tensor clamp_max(const Tensor &a, double ceiling);

Tensor sum(const Tensor &a);        // -> scalar
Tensor mean(const Tensor &a);       // -> scalar
Tensor sum_rows(const Tensor &a);   // [m,n] -> [n]
Tensor mean_rows(const Tensor &a);  // [m,n] -> [n]
/// Column-wise maximum over the first `rows` rows (all rows when 0).
/// Ties pick the lowest row; only that row receives gradient.
Tensor max_rows(const Tensor &a, std::size_t rows = 0);

/// Softmax over the last axis (1-D, or each row of a 2-D tensor).
Tensor softmax(const Tensor &a);
/// Softmax over the last axis restricted to positions where mask is true;
/// masked positions are exactly zero. At least one position must be valid.
Tensor masked_softmax(const Tensor &a, std::span<const bool> mask);

/// Concatenation of 1-D tensors.
Tensor concat(std::span<const Tensor> parts);
/// Stacks equal-length 1-D tensors into [n, len].
Tensor stack_rows(std::span<const Tensor> rows);
/// Rows `ids` of a 2-D table; repeated ids accumulate gradient.
Tensor gather_rows(const Tensor &table, std::span<const std::size_t> ids);
Tensor slice_rows(const Tensor &a, std::size_t begin, std::size_t end);
/// Element i of a 1-D tensor as a scalar.
Tensor pick(const Tensor &a, std::size_t index);

Tensor dot(const Tensor &a, const Tensor &b);  // 1-D -> scalar
/// Euclidean norm; the gradient at the origin is taken as zero.
Tensor norm(const Tensor &a);
/// Cosine similarity of 1-D tensors; 0 when either has zero norm.
Tensor cosine(const Tensor &a, const Tensor &b);

/// Sliding-window convolution. `input` is [n,d]; `filters` is [T, h*d]
/// (row-major window of h rows); output is [windows, T] where row s is
/// filters * input[s .. s+h) + bias. Rows at or beyond n read as zero.
Tensor conv1d(const Tensor &input, const Tensor &filters, const Tensor &bias, std::size_t width,
              std::size_t windows);

// Plain (non-recording) helpers used by selection logic.
double cosine_value(std::span<const double> a, std::span<const double> b);

}  // namespace canweave

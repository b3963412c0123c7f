#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssc/rng.hpp"

namespace ssc {

using Shape = std::vector<std::size_t>;

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on first accumulation
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major tensor of 64-bit floats. Cheap to copy: a Tensor is a
/// shared handle onto its storage, so gradient accumulation written through
/// one handle is visible through all of them.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  /// Entries from Normal(0, stddev) truncated at +/-2 sigma.
  static Tensor randn(Shape shape, double stddev, Rng& rng,
                      bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t ndim() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->value.size(); }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }

  /// Storage is shared between handles, so a const handle still reaches the
  /// mutable buffers (same contract as a shared_ptr).
  std::vector<double>& data() const { return impl_->value; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool b) { impl_->requires_grad = b; }

  /// Gradient buffer, allocated to zeros on first access.
  std::vector<double>& grad() const;
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad() const;

  /// Value of a scalar (1-element) tensor.
  double value() const;

  double at(std::size_t i) const { return impl_->value[i]; }
  double at(std::size_t i, std::size_t j) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Records the forward pass in execution order; backward() replays the
/// recorded operations in exact reverse order. Constructing the tape with
/// grad disabled turns every operation into a pure forward computation.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return enabled_; }
  std::size_t size() const { return ops_.size(); }

  /// Appends one backward rule; called by operation implementations.
  void record(std::function<void()> backward_rule) {
    ops_.push_back(std::move(backward_rule));
  }

  /// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
  /// requires_grad tensor reachable from the recorded operations.
  void backward(Tensor loss);

 private:
  bool enabled_;
  std::vector<std::function<void()>> ops_;
};

// ---- operations ------------------------------------------------------------

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
/// [r x c] + [c] broadcast over rows.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul_scalar(Tape& tape, const Tensor& x, double c);
Tensor sum(Tape& tape, const Tensor& x);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// Rows of x gathered in order; duplicate indices accumulate gradient.
Tensor gather_rows(Tape& tape, const Tensor& x,
                   const std::vector<std::size_t>& rows);
Tensor concat_rows(Tape& tape, const std::vector<Tensor>& parts);
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);
Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t count);

/// Softmax along `axis`, stabilized by max subtraction.
Tensor softmax(Tape& tape, const Tensor& x, std::size_t axis);
/// Row softmax of a matrix restricted to columns with col_mask != 0;
/// masked columns get exactly zero weight.
Tensor masked_softmax_rows(Tape& tape, const Tensor& x,
                           const std::vector<std::uint8_t>& col_mask);
/// Normalizes each row of the trailing dimension to mean 0 / variance 1
/// (eps added to the variance), then applies gain and bias.
Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain,
                  const Tensor& bias, double eps);
/// x * Phi(x) via the tanh approximation
/// 0.5 * x * (1 + tanh(sqrt(2/pi) * (x + 0.044715 x^3))).
Tensor gelu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
/// Zeroes each element with probability `rate` and scales survivors by
/// 1/(1-rate) while training; identity otherwise.
Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training,
               Rng& rng);

/// Mean negative log-softmax of the gold entries of an [n x L] logit matrix.
Tensor cross_entropy(Tape& tape, const Tensor& logits,
                     const std::vector<std::size_t>& gold);
/// Mean squared difference between pred (any shape) and target, elementwise.
Tensor mse(Tape& tape, const Tensor& pred, const std::vector<double>& target);

}  // namespace ssc

#include "ssc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ssc {

namespace {

constexpr double kGeluCoeff = 0.044715;
const double kGeluRoot = std::sqrt(2.0 / std::numbers::pi);

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) {
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

#ifndef NDEBUG
void check_finite(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(op) +
                               ": non-finite value in result");
    }
  }
}
#define SSC_CHECK_FINITE(t, op) check_finite((t), (op))
#else
#define SSC_CHECK_FINITE(t, op) (void)0
#endif

bool track(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.grad_enabled()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.ndim() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got " +
                                shape_str(t.shape()));
  }
}

}  // namespace

// ---- Tensor ----------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorImpl>();
  t.impl_->shape = std::move(shape);
  t.impl_->value.assign(shape_numel(t.impl_->shape), 0.0);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), v);
  return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data,
                         bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("Tensor::from_data: " + shape_str(shape) +
                                " does not hold " +
                                std::to_string(data.size()) + " values");
  }
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorImpl>();
  t.impl_->shape = std::move(shape);
  t.impl_->value = std::move(data);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

Tensor Tensor::randn(Shape shape, double stddev, Rng& rng, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  for (double& v : t.data()) {
    v = rng.truncated_normal(stddev);
  }
  return t;
}

std::vector<double>& Tensor::grad() const {
  if (impl_->grad.empty()) {
    impl_->grad.assign(impl_->value.size(), 0.0);
  }
  return impl_->grad;
}

void Tensor::zero_grad() const {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::value() const {
  if (numel() != 1) {
    throw std::invalid_argument("Tensor::value: tensor is not a scalar, " +
                                shape_str(impl_->shape));
  }
  return impl_->value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return impl_->value[i * impl_->shape[1] + j];
}

// ---- Tape ------------------------------------------------------------------

void Tape::backward(Tensor loss) {
  if (loss.numel() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar");
  }
  loss.grad()[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    (*it)();
  }
}

// ---- operations ------------------------------------------------------------

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                shape_str(a.shape()) + " * " +
                                shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
  SSC_CHECK_FINITE(out, "matmul");
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out, m, k, n]() mutable {
      const std::vector<double>& g = out.grad();
      if (a.requires_grad()) {
        std::vector<double>& ga = a.grad();
        const double* pb2 = b.data().data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double gv = g[i * n + j];
            if (gv == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p) {
              ga[i * k + p] += gv * pb2[p * n + j];
            }
          }
        }
      }
      if (b.requires_grad()) {
        std::vector<double>& gb = b.grad();
        const double* pa2 = a.data().data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double av = pa2[i * k + p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
              gb[p * n + j] += av * g[i * n + j];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.data()[j * m + i] = a.data()[i * n + j];
    }
  }
  if (track(tape, {&a})) {
    out.set_requires_grad(true);
    tape.record([a, out, m, n]() mutable {
      if (!a.requires_grad()) return;
      std::vector<double>& ga = a.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          ga[i * n + j] += g[j * m + i];
        }
      }
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("add: shape mismatch, " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out.data()[i] = a.data()[i] + b.data()[i];
  }
  SSC_CHECK_FINITE(out, "add");
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out]() mutable {
      const std::vector<double>& g = out.grad();
      if (a.requires_grad()) {
        std::vector<double>& ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        std::vector<double>& gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_bias");
  if (bias.ndim() != 1 || bias.dim(0) != x.dim(1)) {
    throw std::invalid_argument("add_bias: bias " + shape_str(bias.shape()) +
                                " does not match columns of " +
                                shape_str(x.shape()));
  }
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor out = Tensor::zeros({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out.data()[i * c + j] = x.data()[i * c + j] + bias.data()[j];
    }
  }
  SSC_CHECK_FINITE(out, "add_bias");
  if (track(tape, {&x, &bias})) {
    out.set_requires_grad(true);
    tape.record([x, bias, out, r, c]() mutable {
      const std::vector<double>& g = out.grad();
      if (x.requires_grad()) {
        std::vector<double>& gx = x.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        std::vector<double>& gb = bias.grad();
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            gb[j] += g[i * c + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("mul: shape mismatch, " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) {
    out.data()[i] = a.data()[i] * b.data()[i];
  }
  SSC_CHECK_FINITE(out, "mul");
  if (track(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out]() mutable {
      const std::vector<double>& g = out.grad();
      if (a.requires_grad()) {
        std::vector<double>& ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.data()[i];
      }
      if (b.requires_grad()) {
        std::vector<double>& gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.data()[i];
      }
    });
  }
  return out;
}

Tensor mul_scalar(Tape& tape, const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    out.data()[i] = x.data()[i] * c;
  }
  SSC_CHECK_FINITE(out, "mul_scalar");
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, c]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * c;
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor out = Tensor::scalar(total);
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out]() mutable {
      if (!x.requires_grad()) return;
      const double g = out.grad()[0];
      std::vector<double>& gx = x.grad();
      for (double& v : gx) v += g;
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw std::invalid_argument("reshape: element count mismatch");
  }
  Tensor out = Tensor::from_data(std::move(shape), x.data());
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& x,
                   const std::vector<std::size_t>& rows) {
  require_matrix(x, "gather_rows");
  const std::size_t c = x.dim(1);
  for (std::size_t r : rows) {
    if (r >= x.dim(0)) {
      throw std::out_of_range("gather_rows: row " + std::to_string(r) +
                              " out of range for " + shape_str(x.shape()));
    }
  }
  Tensor out = Tensor::zeros({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(x.data().begin() + rows[i] * c, c, out.data().begin() + i * c);
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, rows, c]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          gx[rows[i] * c + j] += g[i * c + j];
        }
      }
    });
  }
  return out;
}

Tensor concat_rows(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_rows: no parts");
  }
  const std::size_t c = parts[0].dim(1);
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.dim(1) != c) {
      throw std::invalid_argument("concat_rows: column count mismatch");
    }
    rows += p.dim(0);
  }
  Tensor out = Tensor::zeros({rows, c});
  std::size_t at = 0;
  for (const Tensor& p : parts) {
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + at);
    at += p.numel();
  }
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (tape.grad_enabled() && any) {
    out.set_requires_grad(true);
    tape.record([parts, out]() mutable {
      const std::vector<double>& g = out.grad();
      std::size_t at2 = 0;
      for (const Tensor& p : parts) {
        if (p.requires_grad()) {
          std::vector<double>& gp = p.grad();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[at2 + i];
        }
        at2 += p.numel();
      }
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: no parts");
  }
  const std::size_t r = parts[0].dim(0);
  std::size_t cols = 0;
  for (const Tensor& p : parts) {
    require_matrix(p, "concat_cols");
    if (p.dim(0) != r) {
      throw std::invalid_argument("concat_cols: row count mismatch");
    }
    cols += p.dim(1);
  }
  Tensor out = Tensor::zeros({r, cols});
  std::size_t col_at = 0;
  for (const Tensor& p : parts) {
    const std::size_t pc = p.dim(1);
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(p.data().begin() + i * pc, pc,
                  out.data().begin() + i * cols + col_at);
    }
    col_at += pc;
  }
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (tape.grad_enabled() && any) {
    out.set_requires_grad(true);
    tape.record([parts, out, r, cols]() mutable {
      const std::vector<double>& g = out.grad();
      std::size_t col_at2 = 0;
      for (const Tensor& p : parts) {
        const std::size_t pc = p.dim(1);
        if (p.requires_grad()) {
          std::vector<double>& gp = p.grad();
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < pc; ++j) {
              gp[i * pc + j] += g[i * cols + col_at2 + j];
            }
          }
        }
        col_at2 += pc;
      }
    });
  }
  return out;
}

Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t count) {
  require_matrix(x, "slice_cols");
  const std::size_t r = x.dim(0), c = x.dim(1);
  if (begin + count > c) {
    throw std::out_of_range("slice_cols: slice past last column");
  }
  Tensor out = Tensor::zeros({r, count});
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(x.data().begin() + i * c + begin, count,
                out.data().begin() + i * count);
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, begin, count, r, c]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
          gx[i * c + begin + j] += g[i * count + j];
        }
      }
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& x, std::size_t axis) {
  if (axis >= x.ndim()) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) +
                                " out of range for " + shape_str(x.shape()));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];

  Tensor out = Tensor::zeros(s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = x.data()[base];
      for (std::size_t k = 1; k < len; ++k) {
        mx = std::max(mx, x.data()[base + k * inner]);
      }
      double z = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        double e = std::exp(x.data()[base + k * inner] - mx);
        out.data()[base + k * inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < len; ++k) {
        out.data()[base + k * inner] /= z;
      }
    }
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, outer, inner, len]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      const std::vector<double>& y = out.data();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * len * inner + in;
          double dot = 0.0;
          for (std::size_t k = 0; k < len; ++k) {
            dot += g[base + k * inner] * y[base + k * inner];
          }
          for (std::size_t k = 0; k < len; ++k) {
            gx[base + k * inner] +=
                y[base + k * inner] * (g[base + k * inner] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor masked_softmax_rows(Tape& tape, const Tensor& x,
                           const std::vector<std::uint8_t>& col_mask) {
  require_matrix(x, "masked_softmax_rows");
  const std::size_t r = x.dim(0), c = x.dim(1);
  if (col_mask.size() != c) {
    throw std::invalid_argument("masked_softmax_rows: mask length mismatch");
  }
  bool any_valid = false;
  for (std::uint8_t m : col_mask) any_valid = any_valid || (m != 0);
  if (!any_valid) {
    throw std::invalid_argument("masked_softmax_rows: all columns masked");
  }
  Tensor out = Tensor::zeros({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (col_mask[j]) mx = std::max(mx, x.data()[i * c + j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (col_mask[j]) {
        double e = std::exp(x.data()[i * c + j] - mx);
        out.data()[i * c + j] = e;
        z += e;
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (col_mask[j]) out.data()[i * c + j] /= z;
    }
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, col_mask, r, c]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      const std::vector<double>& y = out.data();
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          if (col_mask[j]) dot += g[i * c + j] * y[i * c + j];
        }
        for (std::size_t j = 0; j < c; ++j) {
          if (col_mask[j]) {
            gx[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain,
                  const Tensor& bias, double eps) {
  if (x.ndim() < 1) {
    throw std::invalid_argument("layer_norm: scalar input");
  }
  const std::size_t n = x.shape().back();
  if (gain.numel() != n || bias.numel() != n) {
    throw std::invalid_argument(
        "layer_norm: gain/bias do not match the last dimension");
  }
  const std::size_t rows = x.numel() / n;
  Tensor out = Tensor::zeros(x.shape());
  // x_hat cached for backward
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* px = x.data().data() + i * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += px[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = px[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[i] = istd;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (px[j] - mean) * istd;
      xhat[i * n + j] = h;
      out.data()[i * n + j] = h * gain.data()[j] + bias.data()[j];
    }
  }
  SSC_CHECK_FINITE(out, "layer_norm");
  if (track(tape, {&x, &gain, &bias})) {
    out.set_requires_grad(true);
    tape.record([x, gain, bias, out, xhat = std::move(xhat),
                 inv_std = std::move(inv_std), rows, n]() mutable {
      const std::vector<double>& g = out.grad();
      if (gain.requires_grad()) {
        std::vector<double>& gg = gain.grad();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            gg[j] += g[i * n + j] * xhat[i * n + j];
          }
        }
      }
      if (bias.requires_grad()) {
        std::vector<double>& gb = bias.grad();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            gb[j] += g[i * n + j];
          }
        }
      }
      if (x.requires_grad()) {
        std::vector<double>& gx = x.grad();
        for (std::size_t i = 0; i < rows; ++i) {
          double mean_gy = 0.0, mean_gyx = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double gy = g[i * n + j] * gain.data()[j];
            mean_gy += gy;
            mean_gyx += gy * xhat[i * n + j];
          }
          mean_gy /= static_cast<double>(n);
          mean_gyx /= static_cast<double>(n);
          for (std::size_t j = 0; j < n; ++j) {
            const double gy = g[i * n + j] * gain.data()[j];
            gx[i * n + j] +=
                (gy - mean_gy - xhat[i * n + j] * mean_gyx) * inv_std[i];
          }
        }
      }
    });
  }
  return out;
}

Tensor gelu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double v = x.data()[i];
    const double t = std::tanh(kGeluRoot * (v + kGeluCoeff * v * v * v));
    out.data()[i] = 0.5 * v * (1.0 + t);
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = x.data()[i];
        const double u = kGeluRoot * (v + kGeluCoeff * v * v * v);
        const double t = std::tanh(u);
        const double du = kGeluRoot * (1.0 + 3.0 * kGeluCoeff * v * v);
        const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
        gx[i] += g[i] * d;
      }
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double v = x.data()[i];
    out.data()[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                             : std::exp(v) / (1.0 + std::exp(v));
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      const std::vector<double>& y = out.data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] += g[i] * y[i] * (1.0 - y[i]);
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, bool training,
               Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) {
    return x;
  }
  const double scale = 1.0 / (1.0 - rate);
  std::vector<double> keep(x.numel());
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    keep[i] = rng.bernoulli(rate) ? 0.0 : scale;
    out.data()[i] = x.data()[i] * keep[i];
  }
  if (track(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, keep = std::move(keep)]() mutable {
      if (!x.requires_grad()) return;
      std::vector<double>& gx = x.grad();
      const std::vector<double>& g = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] += g[i] * keep[i];
      }
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits,
                     const std::vector<std::size_t>& gold) {
  require_matrix(logits, "cross_entropy");
  const std::size_t n = logits.dim(0), L = logits.dim(1);
  if (gold.size() != n) {
    throw std::invalid_argument("cross_entropy: label count mismatch");
  }
  if (n == 0) {
    throw std::invalid_argument("cross_entropy: empty batch");
  }
  for (std::size_t y : gold) {
    if (y >= L) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(y) +
                              " out of range, L=" + std::to_string(L));
    }
  }
  // probabilities cached for backward
  std::vector<double> probs(n * L);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data().data() + i * L;
    double mx = row[0];
    for (std::size_t j = 1; j < L; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      probs[i * L + j] = std::exp(row[j] - mx);
      z += probs[i * L + j];
    }
    for (std::size_t j = 0; j < L; ++j) probs[i * L + j] /= z;
    loss -= std::log(probs[i * L + gold[i]]);
  }
  loss /= static_cast<double>(n);
  Tensor out = Tensor::scalar(loss);
  if (track(tape, {&logits})) {
    out.set_requires_grad(true);
    tape.record(
        [logits, out, gold, probs = std::move(probs), n, L]() mutable {
          if (!logits.requires_grad()) return;
          const double g = out.grad()[0] / static_cast<double>(n);
          std::vector<double>& gl = logits.grad();
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < L; ++j) {
              const double ind = (j == gold[i]) ? 1.0 : 0.0;
              gl[i * L + j] += g * (probs[i * L + j] - ind);
            }
          }
        });
  }
  return out;
}

Tensor mse(Tape& tape, const Tensor& pred, const std::vector<double>& target) {
  if (pred.numel() != target.size()) {
    throw std::invalid_argument("mse: length mismatch, " +
                                std::to_string(pred.numel()) + " vs " +
                                std::to_string(target.size()));
  }
  if (target.empty()) {
    throw std::invalid_argument("mse: empty input");
  }
  const std::size_t n = target.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.data()[i] - target[i];
    loss += d * d;
  }
  loss /= static_cast<double>(n);
  Tensor out = Tensor::scalar(loss);
  if (track(tape, {&pred})) {
    out.set_requires_grad(true);
    tape.record([pred, out, target, n]() mutable {
      if (!pred.requires_grad()) return;
      const double g = out.grad()[0] * 2.0 / static_cast<double>(n);
      std::vector<double>& gp = pred.grad();
      for (std::size_t i = 0; i < n; ++i) {
        gp[i] += g * (pred.data()[i] - target[i]);
      }
    });
  }
  return out;
}

}  // namespace ssc

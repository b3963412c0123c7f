#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "ssc/rng.hpp"
#include "ssc/tensor.hpp"

namespace ssct {

using ssc::Rng;
using ssc::Shape;
using ssc::Tape;
using ssc::Tensor;

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0,
                            bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.data()) {
    v = (rng.uniform01() * 2.0 - 1.0) * scale;
  }
  return t;
}

struct GradCheckResult {
  double max_error = 0.0;       // scaled error, should stay <= tol
  std::size_t checked = 0;
  bool ok(double tol = 1e-4) const { return checked > 0 && max_error <= tol; }
};

/// Central finite differences against reverse-mode gradients. The loss
/// builder must be deterministic in the inputs (re-seed any rng inside).
inline GradCheckResult finite_difference_check(
    const std::vector<Tensor>& inputs,
    const std::function<Tensor(Tape&)>& loss_fn, double step = 1e-5) {
  for (const Tensor& input : inputs) {
    input.grad();  // allocate
    input.zero_grad();
  }
  Tape tape;
  Tensor loss = loss_fn(tape);
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const Tensor& input : inputs) {
    analytic.push_back(input.grad());
  }

  GradCheckResult result;
  for (std::size_t which = 0; which < inputs.size(); ++which) {
    const Tensor& input = inputs[which];
    for (std::size_t i = 0; i < input.numel(); ++i) {
      const double saved = input.data()[i];
      input.data()[i] = saved + step;
      Tape up_tape(false);
      const double up = loss_fn(up_tape).value();
      input.data()[i] = saved - step;
      Tape down_tape(false);
      const double down = loss_fn(down_tape).value();
      input.data()[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double a = analytic[which][i];
      const double denom = std::max({std::abs(a), std::abs(fd), 0.01});
      result.max_error = std::max(result.max_error, std::abs(a - fd) / denom);
      ++result.checked;
    }
  }
  return result;
}

/// Fresh scratch directory under the current working directory.
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path("test_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

inline bool bytes_equal(const std::string& path_a, const std::string& path_b) {
  std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
  if (!a || !b) return false;
  std::vector<char> ba((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  std::vector<char> bb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  return ba == bb;
}

}  // namespace ssct

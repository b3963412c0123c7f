#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssc/tensor.hpp"

namespace ssc {

/// Ordered registry of named parameter tensors. The order is the checkpoint
/// and optimizer-state order, so registration must be deterministic.
class ParamSet {
 public:
  void add(std::string name, Tensor t);
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;

  std::size_t size() const { return items_.size(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::pair<std::string, Tensor>& at(std::size_t i) const {
    return items_[i];
  }

  void zero_grads();
  /// Deep copy of the parameter values (detached from gradients).
  std::vector<std::vector<double>> snapshot_values() const;
  void restore_values(const std::vector<std::vector<double>>& values);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

}  // namespace ssc

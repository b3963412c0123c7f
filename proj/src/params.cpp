#include "ssc/params.hpp"

#include <stdexcept>

namespace ssc {

void ParamSet::add(std::string name, Tensor t) {
  if (find(name) != nullptr) {
    throw std::invalid_argument("ParamSet: duplicate name '" + name + "'");
  }
  items_.emplace_back(std::move(name), std::move(t));
}

Tensor* ParamSet::find(const std::string& name) {
  for (auto& [n, t] : items_) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return &t;
  }
  return nullptr;
}

void ParamSet::zero_grads() {
  for (auto& [n, t] : items_) {
    t.zero_grad();
  }
}

std::vector<std::vector<double>> ParamSet::snapshot_values() const {
  std::vector<std::vector<double>> out;
  out.reserve(items_.size());
  for (const auto& [n, t] : items_) {
    out.push_back(t.data());
  }
  return out;
}

void ParamSet::restore_values(const std::vector<std::vector<double>>& values) {
  if (values.size() != items_.size()) {
    throw std::invalid_argument("ParamSet: snapshot size mismatch");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (values[i].size() != items_[i].second.numel()) {
      throw std::invalid_argument("ParamSet: snapshot shape mismatch at '" +
                                  items_[i].first + "'");
    }
    items_[i].second.data() = values[i];
  }
}

}  // namespace ssc

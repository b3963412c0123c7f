#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "ssc/crf.hpp"

namespace ssct {

struct CrfEnumeration {
  double log_partition = 0.0;
  std::vector<std::size_t> best_path;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> path_scores;
};

inline double crf_path_score(const ssc::Tensor& em, const ssc::CrfParams& p,
                             const std::vector<std::size_t>& path) {
  const std::size_t L = em.dim(1);
  double score = p.start.data()[path[0]] + em.data()[path[0]];
  for (std::size_t t = 1; t < path.size(); ++t) {
    score += p.transitions.data()[path[t - 1] * L + path[t]] +
             em.data()[t * L + path[t]];
  }
  return score + p.end.data()[path.back()];
}

/// Brute force over all L^T label paths. Argmax ties keep the first
/// enumerated path (the all-zeros path comes first).
inline CrfEnumeration crf_enumerate(const ssc::Tensor& em,
                                    const ssc::CrfParams& p) {
  const std::size_t T = em.dim(0), L = em.dim(1);
  CrfEnumeration result;
  std::vector<std::size_t> path(T, 0);
  std::size_t total = 1;
  for (std::size_t t = 0; t < T; ++t) total *= L;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < T; ++t) {
      path[t] = c % L;
      c /= L;
    }
    const double s = crf_path_score(em, p, path);
    result.path_scores.push_back(s);
    if (s > result.best_score) {
      result.best_score = s;
      result.best_path = path;
    }
  }
  double mx = result.best_score;
  double sum = 0.0;
  for (double s : result.path_scores) sum += std::exp(s - mx);
  result.log_partition = mx + std::log(sum);
  return result;
}

}  // namespace ssct

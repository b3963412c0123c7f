#pragma once

#include <vector>

#include "ssc/tensor.hpp"

namespace ssc {

/// Linear-chain CRF parameters: pairwise transition scores plus explicit
/// start and end scores. A path y scores
///   start[y_0] + sum_t em[t][y_t] + sum_t transitions[y_t][y_t+1] + end[y_T-1].
struct CrfParams {
  Tensor transitions;  // [L x L], row = previous label
  Tensor start;        // [L]
  Tensor end;          // [L]

  static CrfParams init(std::size_t num_labels);
  std::size_t num_labels() const { return start.dim(0); }
};

/// log sum over all label paths of exp(path score); log-space recursion.
/// Differentiable w.r.t. emissions and all CRF parameters.
Tensor crf_log_partition(Tape& tape, const Tensor& emissions,
                         const CrfParams& params);

/// log_partition - score(gold): the negative log-likelihood of the gold path.
Tensor crf_nll(Tape& tape, const Tensor& emissions, const CrfParams& params,
               const std::vector<std::size_t>& gold);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

/// Highest-scoring path; backpointer ties resolve to the lower label index.
ViterbiResult viterbi(const std::vector<std::vector<double>>& emissions,
                      const std::vector<std::vector<double>>& transitions,
                      const std::vector<double>& start,
                      const std::vector<double>& end);

ViterbiResult viterbi(const Tensor& emissions, const CrfParams& params);

}  // namespace ssc

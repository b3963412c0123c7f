#include "ssc/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssc {

namespace {

double logsumexp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct ForwardBackward {
  std::vector<std::vector<double>> alpha;  // [T][L]
  std::vector<std::vector<double>> beta;   // [T][L]
  double log_z = 0.0;
};

void check_shapes(const Tensor& emissions, const CrfParams& params) {
  if (emissions.ndim() != 2 || emissions.dim(0) == 0) {
    throw std::invalid_argument("crf: emissions must be a [T x L] matrix");
  }
  const std::size_t L = emissions.dim(1);
  if (params.transitions.ndim() != 2 || params.transitions.dim(0) != L ||
      params.transitions.dim(1) != L || params.start.numel() != L ||
      params.end.numel() != L) {
    throw std::invalid_argument("crf: parameter shapes do not match L=" +
                                std::to_string(L));
  }
}

ForwardBackward run_forward_backward(const Tensor& emissions,
                                     const CrfParams& params) {
  const std::size_t T = emissions.dim(0), L = emissions.dim(1);
  const auto& em = emissions.data();
  const auto& tr = params.transitions.data();
  const auto& st = params.start.data();
  const auto& en = params.end.data();

  ForwardBackward fb;
  fb.alpha.assign(T, std::vector<double>(L, 0.0));
  fb.beta.assign(T, std::vector<double>(L, 0.0));

  for (std::size_t l = 0; l < L; ++l) {
    fb.alpha[0][l] = st[l] + em[l];
  }
  std::vector<double> scratch(L);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t b = 0; b < L; ++b) {
      for (std::size_t a = 0; a < L; ++a) {
        scratch[a] = fb.alpha[t - 1][a] + tr[a * L + b];
      }
      fb.alpha[t][b] = em[t * L + b] + logsumexp(scratch);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    scratch[l] = fb.alpha[T - 1][l] + en[l];
  }
  fb.log_z = logsumexp(scratch);

  for (std::size_t l = 0; l < L; ++l) {
    fb.beta[T - 1][l] = en[l];
  }
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t a = 0; a < L; ++a) {
      for (std::size_t b = 0; b < L; ++b) {
        scratch[b] = tr[a * L + b] + em[(t + 1) * L + b] + fb.beta[t + 1][b];
      }
      fb.beta[t][a] = logsumexp(scratch);
    }
  }
  return fb;
}

/// Accumulates g * d(logZ)/d(inputs) into the gradients of emissions and
/// CRF parameters using the marginals from one forward-backward pass.
void accumulate_partition_grads(Tensor emissions, CrfParams params,
                                const ForwardBackward& fb, double g) {
  const std::size_t T = emissions.dim(0), L = emissions.dim(1);
  const auto& em = emissions.data();
  const auto& tr = params.transitions.data();

  std::vector<double> unary(T * L);  // gamma[t][l]
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      unary[t * L + l] = std::exp(fb.alpha[t][l] + fb.beta[t][l] - fb.log_z);
    }
  }
  if (emissions.requires_grad()) {
    auto& ge = emissions.grad();
    for (std::size_t i = 0; i < T * L; ++i) {
      ge[i] += g * unary[i];
    }
  }
  if (params.start.requires_grad()) {
    auto& gs = params.start.grad();
    for (std::size_t l = 0; l < L; ++l) {
      gs[l] += g * unary[l];
    }
  }
  if (params.end.requires_grad()) {
    auto& gn = params.end.grad();
    for (std::size_t l = 0; l < L; ++l) {
      gn[l] += g * unary[(T - 1) * L + l];
    }
  }
  if (params.transitions.requires_grad()) {
    auto& gt = params.transitions.grad();
    for (std::size_t t = 0; t + 1 < T; ++t) {
      for (std::size_t a = 0; a < L; ++a) {
        for (std::size_t b = 0; b < L; ++b) {
          const double pair =
              std::exp(fb.alpha[t][a] + tr[a * L + b] + em[(t + 1) * L + b] +
                       fb.beta[t + 1][b] - fb.log_z);
          gt[a * L + b] += g * pair;
        }
      }
    }
  }
}

}  // namespace

CrfParams CrfParams::init(std::size_t num_labels) {
  CrfParams p;
  p.transitions = Tensor::zeros({num_labels, num_labels}, true);
  p.start = Tensor::zeros({num_labels}, true);
  p.end = Tensor::zeros({num_labels}, true);
  return p;
}

Tensor crf_log_partition(Tape& tape, const Tensor& emissions,
                         const CrfParams& params) {
  check_shapes(emissions, params);
  const ForwardBackward fb = run_forward_backward(emissions, params);
  Tensor out = Tensor::scalar(fb.log_z);
  const bool needs = tape.grad_enabled() &&
                     (emissions.requires_grad() ||
                      params.transitions.requires_grad() ||
                      params.start.requires_grad() ||
                      params.end.requires_grad());
  if (needs) {
    out.set_requires_grad(true);
    tape.record([emissions, params, fb, out]() mutable {
      accumulate_partition_grads(emissions, params, fb, out.grad()[0]);
    });
  }
  return out;
}

Tensor crf_nll(Tape& tape, const Tensor& emissions, const CrfParams& params,
               const std::vector<std::size_t>& gold) {
  check_shapes(emissions, params);
  const std::size_t T = emissions.dim(0), L = emissions.dim(1);
  if (gold.size() != T) {
    throw std::invalid_argument("crf_nll: gold path length mismatch");
  }
  for (std::size_t y : gold) {
    if (y >= L) {
      throw std::out_of_range("crf_nll: label " + std::to_string(y) +
                              " out of range, L=" + std::to_string(L));
    }
  }
  const ForwardBackward fb = run_forward_backward(emissions, params);
  const auto& em = emissions.data();
  const auto& tr = params.transitions.data();
  double gold_score = params.start.data()[gold[0]] + em[gold[0]];
  for (std::size_t t = 1; t < T; ++t) {
    gold_score += tr[gold[t - 1] * L + gold[t]] + em[t * L + gold[t]];
  }
  gold_score += params.end.data()[gold[T - 1]];

  Tensor out = Tensor::scalar(fb.log_z - gold_score);
  const bool needs = tape.grad_enabled() &&
                     (emissions.requires_grad() ||
                      params.transitions.requires_grad() ||
                      params.start.requires_grad() ||
                      params.end.requires_grad());
  if (needs) {
    out.set_requires_grad(true);
    tape.record([emissions, params, fb, out, gold, T, L]() mutable {
      const double g = out.grad()[0];
      accumulate_partition_grads(emissions, params, fb, g);
      // gold-path indicators enter with opposite sign
      if (emissions.requires_grad()) {
        auto& ge = emissions.grad();
        for (std::size_t t = 0; t < T; ++t) {
          ge[t * L + gold[t]] -= g;
        }
      }
      if (params.start.requires_grad()) {
        params.start.grad()[gold[0]] -= g;
      }
      if (params.end.requires_grad()) {
        params.end.grad()[gold[T - 1]] -= g;
      }
      if (params.transitions.requires_grad()) {
        auto& gt = params.transitions.grad();
        for (std::size_t t = 1; t < T; ++t) {
          gt[gold[t - 1] * L + gold[t]] -= g;
        }
      }
    });
  }
  return out;
}

ViterbiResult viterbi(const std::vector<std::vector<double>>& emissions,
                      const std::vector<std::vector<double>>& transitions,
                      const std::vector<double>& start,
                      const std::vector<double>& end) {
  const std::size_t T = emissions.size();
  if (T == 0) {
    throw std::invalid_argument("viterbi: empty emission sequence");
  }
  const std::size_t L = emissions[0].size();
  std::vector<std::vector<double>> best(T, std::vector<double>(L, 0.0));
  std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(L, 0));

  for (std::size_t l = 0; l < L; ++l) {
    best[0][l] = start[l] + emissions[0][l];
  }
  for (std::size_t t = 1; t < T; ++t) {
    if (emissions[t].size() != L) {
      throw std::invalid_argument("viterbi: ragged emission matrix");
    }
    for (std::size_t b = 0; b < L; ++b) {
      double best_score = best[t - 1][0] + transitions[0][b];
      std::size_t best_prev = 0;
      for (std::size_t a = 1; a < L; ++a) {
        const double s = best[t - 1][a] + transitions[a][b];
        if (s > best_score) {  // strict: ties keep the lower label index
          best_score = s;
          best_prev = a;
        }
      }
      best[t][b] = best_score + emissions[t][b];
      back[t][b] = best_prev;
    }
  }

  ViterbiResult result;
  double final_score = best[T - 1][0] + end[0];
  std::size_t final_label = 0;
  for (std::size_t l = 1; l < L; ++l) {
    const double s = best[T - 1][l] + end[l];
    if (s > final_score) {
      final_score = s;
      final_label = l;
    }
  }
  result.score = final_score;
  result.path.assign(T, 0);
  result.path[T - 1] = final_label;
  for (std::size_t t = T - 1; t > 0; --t) {
    result.path[t - 1] = back[t][result.path[t]];
  }
  return result;
}

ViterbiResult viterbi(const Tensor& emissions, const CrfParams& params) {
  check_shapes(emissions, params);
  const std::size_t T = emissions.dim(0), L = emissions.dim(1);
  std::vector<std::vector<double>> em(T, std::vector<double>(L));
  std::vector<std::vector<double>> tr(L, std::vector<double>(L));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) em[t][l] = emissions.at(t, l);
  }
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < L; ++b) tr[a][b] = params.transitions.at(a, b);
  }
  return viterbi(em, tr, params.start.data(), params.end.data());
}

}  // namespace ssc

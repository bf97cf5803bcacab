#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "czlm/nn/tensor.hpp"

namespace czlm::heads {

class InvalidTagSequenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Which labels may start a sequence and which transitions are allowed.
struct CrfConstraints {
  std::size_t labels = 0;
  std::vector<char> allowed_start;  // labels
  std::vector<char> allowed;        // labels x labels, [from * labels + to]

  static CrfConstraints none(std::size_t labels);
  // Tags "O", "B-X", "I-X": I-X only at a continuation of B-X or I-X.
  static CrfConstraints bio(const std::vector<std::string>& tags);

  bool permits(const std::vector<int>& path) const;
};

// Linear chain: score(y) = sum_t E[t, y_t] + sum_{t>0} T[y_{t-1}, y_t].
// emissions: (n, L) row-major, transitions: (L, L).
double crf_path_score(const std::vector<double>& emissions, const std::vector<double>& transitions, std::size_t labels,
                      const std::vector<int>& path);
double crf_log_partition(const std::vector<double>& emissions, const std::vector<double>& transitions,
                         std::size_t labels, const CrfConstraints& constraints);
std::vector<int> crf_viterbi(const std::vector<double>& emissions, const std::vector<double>& transitions,
                             std::size_t labels, const CrfConstraints& constraints);

// Negative log-likelihood of `gold`; differentiable in both score tensors.
nn::Tensor crf_nll(const nn::Tensor& emissions, const nn::Tensor& transitions, const std::vector<int>& gold,
                   const CrfConstraints& constraints);

}  // namespace czlm::heads

#pragma once

#include <vector>

#include "czlm/nn/tensor.hpp"

namespace czlm::heads {

// Biaffine scores for m head candidates H (m, p) and n dependents D (n, q) with R
// relations: U (R, p, q), u (R, p), v (R, q), b (R). Returns (n, m*R) where entry
// [j, i*R + r] = H_i^T U_r D_j + u_r.H_i + v_r.D_j + b_r, so with R = 1 each row holds
// one dependent's scores over all head candidates.
nn::Tensor biaffine(const nn::Tensor& H, const nn::Tensor& D, const nn::Tensor& U, const nn::Tensor& u,
                    const nn::Tensor& v, const nn::Tensor& b);

// Head-major scores: arc(i, j) scores head i (0 = root) for dependent j (1-based).
struct DepArcScores {
  std::size_t n = 0;
  std::size_t relations = 0;
  std::vector<double> arc;    // (n+1) x n
  std::vector<double> label;  // (n+1) x n x relations; may be empty

  double arc_score(std::size_t head, std::size_t dep) const { return arc[head * n + (dep - 1)]; }
  double label_score(std::size_t head, std::size_t dep, std::size_t r) const {
    return label[(head * n + (dep - 1)) * relations + r];
  }

  // From biaffine outputs: arcs (n, n+1) and labels (n, (n+1)*R).
  static DepArcScores from_biaffine(const nn::Tensor& arcs, const nn::Tensor& labels);
};

struct DecodedTree {
  std::vector<std::size_t> heads;   // heads[j-1] for dependent j
  std::vector<std::size_t> labels;  // relation index per dependent; empty without label scores
  double score = 0.0;               // sum of selected arc scores
};

// Maximum spanning arborescence (Chu-Liu/Edmonds). With single_root, exactly one
// token attaches to the root. Ties prefer the smaller head index.
DecodedTree decode_tree(const DepArcScores& scores, bool single_root = true);

// True when heads form a tree rooted at 0 (acyclic, every token reaches the root).
bool is_valid_tree(const std::vector<std::size_t>& heads);

}  // namespace czlm::heads

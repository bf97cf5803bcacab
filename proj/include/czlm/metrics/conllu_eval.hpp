#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "czlm/corpus.hpp"
#include "czlm/metrics/basic.hpp"

namespace czlm::metrics {

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Universal features kept for UFeats and MLAS.
const std::vector<std::string>& universal_features();
// Deprels (universal part) whose words count for MLAS/BLEX.
const std::vector<std::string>& content_deprels();
// Deprels of function words checked as children in MLAS.
const std::vector<std::string>& functional_deprels();

struct ConlluEvalReport {
  PrfCounts words;  // aligned words
  PrfCounts upos, xpos, ufeats, lemmas, uas, las, mlas, blex;

  // (name, counts) in the order UPOS, XPOS, UFeats, Lemmas, UAS, LAS, MLAS, BLEX.
  std::vector<std::pair<std::string, PrfCounts>> metrics() const;
};

// Words are aligned on character spans of the whitespace-free text; inside multiword
// token regions by longest common subsequence of lowercased forms.
ConlluEvalReport eval_conllu(const Corpus& gold, const Corpus& system);

}  // namespace czlm::metrics

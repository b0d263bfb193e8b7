#pragma once

#include <span>

#include "semamark/lm.hpp"
#include "semamark/sequence.hpp"

namespace semamark {

// Probability that a random positive outscores a random negative, ties
// counted half (rank-based Mann-Whitney estimate, computed exactly).
double roc_auc(std::span<const double> pos_scores, std::span<const double> neg_scores);

struct F1Result {
  double f1 = 0.0;
  double threshold = 0.0;
};

// Best F1 over thresholds at all observed score values, classifying
// score >= t as positive. Equal F1 resolves to the lowest threshold.
F1Result f1_best_threshold(std::span<const double> pos_scores,
                           std::span<const double> neg_scores);

struct MetricReport {
  double roc_auc = 0.0;
  double f1_best = 0.0;
  double best_threshold = 0.0;
  long n_pos = 0;
  long n_neg = 0;
};

MetricReport compute_metrics(std::span<const double> pos_scores,
                             std::span<const double> neg_scores);

// Mean per-token negative log-likelihood of non-prompt tokens under the
// model's unbiased logits.
double mean_nll(const LMInterface& lm, std::span<const TokenSequence> seqs);

}  // namespace semamark

#include "semamark/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semamark {

double roc_auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("roc_auc needs non-empty score sets");
  }

  std::vector<std::pair<double, bool>> all;  // (score, is_positive)
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) {
    all.emplace_back(s, true);
  }
  for (double s : neg_scores) {
    all.emplace_back(s, false);
  }
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks across ties, then the Mann-Whitney identity.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second) {
        pos_rank_sum += avg_rank;
      }
    }
    i = j;
  }

  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

F1Result f1_best_threshold(std::span<const double> pos_scores,
                           std::span<const double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("f1_best_threshold needs non-empty score sets");
  }

  std::vector<double> pos(pos_scores.begin(), pos_scores.end());
  std::vector<double> neg(neg_scores.begin(), neg_scores.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size());
  thresholds.insert(thresholds.end(), pos.begin(), pos.end());
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double n_pos = static_cast<double>(pos.size());
  F1Result best{-1.0, 0.0};
  for (const double t : thresholds) {
    // score >= t classified positive; sorted arrays give counts directly.
    const double tp = static_cast<double>(pos.end() - std::lower_bound(pos.begin(), pos.end(), t));
    const double fp = static_cast<double>(neg.end() - std::lower_bound(neg.begin(), neg.end(), t));
    const double fn = n_pos - tp;
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = t;
    }
  }
  return best;
}

MetricReport compute_metrics(std::span<const double> pos_scores,
                             std::span<const double> neg_scores) {
  MetricReport report;
  report.roc_auc = roc_auc(pos_scores, neg_scores);
  const F1Result f1 = f1_best_threshold(pos_scores, neg_scores);
  report.f1_best = f1.f1;
  report.best_threshold = f1.threshold;
  report.n_pos = static_cast<long>(pos_scores.size());
  report.n_neg = static_cast<long>(neg_scores.size());
  return report;
}

double mean_nll(const LMInterface& lm, std::span<const TokenSequence> seqs) {
  if (seqs.empty()) {
    throw std::invalid_argument("mean_nll needs at least one sequence");
  }
  double total = 0.0;
  long count = 0;
  for (const auto& seq : seqs) {
    const int start = std::max(1, seq.prompt_len);
    for (int i = start; i < seq.length(); ++i) {
      const std::vector<double> logits =
          lm.next_logits(std::span<const TokenId>(seq.tokens.data(), static_cast<std::size_t>(i)));
      double max_logit = logits[0];
      for (double x : logits) {
        max_logit = std::max(max_logit, x);
      }
      double z = 0.0;
      for (double x : logits) {
        z += std::exp(x - max_logit);
      }
      const double logp =
          logits[static_cast<std::size_t>(seq.tokens[static_cast<std::size_t>(i)])] -
          max_logit - std::log(z);
      total -= logp;
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument("no scorable tokens for NLL");
  }
  return total / static_cast<double>(count);
}

}  // namespace semamark

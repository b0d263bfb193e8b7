#pragma once

#include <span>
#include <vector>

#include "semamark/config.hpp"
#include "semamark/generate.hpp"
#include "semamark/nering.hpp"
#include "semamark/partition.hpp"
#include "semamark/sequence.hpp"

namespace semamark {

struct DetectionResult {
  double z = 0.0;
  long green_count = 0;   // G at the best offset
  long positions = 0;     // L at the best offset
  int best_q = 0;
  double gamma_used = 0.0;
  Policy policy = Policy::Semamark;

  nlohmann::json to_json(const WatermarkConfig& cfg) const;
};

// One-sided test statistic against "text is unwatermarked":
// (G - gamma * L) / sqrt(L * gamma * (1 - gamma)).
double z_score(long green, long positions, double gamma);

struct GreenCount {
  long green = 0;
  long positions = 0;
};

// Replays the generator's seed path and counts seed/token matches at seed
// stream offset q: the seed computed from the window ending before position
// i is checked against the token at i + q. Target indices must fall inside
// the sequence and past the prompt. Membership uses the generation-time
// partition (gamma_gen); q = 0 reproduces the generator's green pattern.
GreenCount count_green(const TokenSequence& seq, int q, const NERingModel* model,
                       const EmbeddingProvider& embed, const WatermarkConfig& cfg,
                       Policy policy, PartitionCache* cache = nullptr);

// (G, L) for every offset q in [-max_q, max_q], indexed by q + max_q. The
// seed stream is computed once and shared across offsets; entries whose
// offset leaves no scorable positions have L = 0. Sweeps over Q and gamma
// reuse this table instead of re-deriving seeds.
std::vector<GreenCount> count_green_all_offsets(const TokenSequence& seq, int max_q,
                                                const NERingModel* model,
                                                const EmbeddingProvider& embed,
                                                const WatermarkConfig& cfg, Policy policy,
                                                PartitionCache* cache = nullptr);

// Maximal z over q in [-Q, Q] from a precomputed offset table. Ties prefer
// the smallest |q|, negative before positive. Throws when no offset in
// range has scorable positions.
DetectionResult best_offset_z(std::span<const GreenCount> counts, int table_max_q, int Q,
                              double gamma, Policy policy);

// Q-offset detection: maximal z over q in [-Q, Q], with gamma_detect in the
// z formula. Ties prefer the smallest |q|, negative before positive.
DetectionResult detect(const TokenSequence& seq, const NERingModel* model,
                       const EmbeddingProvider& embed, const WatermarkConfig& cfg,
                       Policy policy, PartitionCache* cache = nullptr);

}  // namespace semamark

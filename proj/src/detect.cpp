#include "semamark/detect.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "semamark/lm.hpp"
#include "semamark/semantic.hpp"

namespace semamark {

double z_score(long green, long positions, double gamma) {
  if (positions < 1) {
    throw std::invalid_argument("no scorable positions");
  }
  if (green < 0 || green > positions) {
    throw std::invalid_argument("green count outside [0, L]");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  const double l = static_cast<double>(positions);
  return (static_cast<double>(green) - gamma * l) / std::sqrt(l * gamma * (1.0 - gamma));
}

nlohmann::json DetectionResult::to_json(const WatermarkConfig& cfg) const {
  return nlohmann::json{{"z", z},
                        {"G", green_count},
                        {"L", positions},
                        {"best_q", best_q},
                        {"gamma_used", gamma_used},
                        {"policy", to_string(policy)},
                        {"config_hash", config_hash_hex(cfg)}};
}

namespace {

// Green lists of the seeds at every seedable position i in [1, len).
std::vector<const GreenList*> seed_partitions(const TokenSequence& seq,
                                              const NERingModel* model,
                                              const EmbeddingProvider& embed,
                                              const WatermarkConfig& cfg, Policy policy,
                                              PartitionCache& cache) {
  const int len = seq.length();
  std::vector<const GreenList*> lists(static_cast<std::size_t>(len), nullptr);
  for (int i = 1; i < len; ++i) {
    std::uint64_t seed = 0;
    if (policy == Policy::Semamark) {
      seed = static_cast<std::uint64_t>(semantic_value_at(seq.tokens, i, embed, *model, cfg));
    } else {
      seed = lefthash_seed(seq.tokens[static_cast<std::size_t>(i - 1)], cfg.key);
    }
    lists[static_cast<std::size_t>(i)] = &cache.get(seed);
  }
  return lists;
}

GreenCount count_at_offset(const TokenSequence& seq,
                           const std::vector<const GreenList*>& lists, int q) {
  const int len = seq.length();
  const int scoring_start = std::max(1, seq.prompt_len);
  GreenCount counts;
  for (int i = 1; i < len; ++i) {
    const int target = i + q;
    if (target < scoring_start || target >= len) {
      continue;
    }
    ++counts.positions;
    if (lists[static_cast<std::size_t>(i)]->contains(
            seq.tokens[static_cast<std::size_t>(target)])) {
      ++counts.green;
    }
  }
  return counts;
}

// The partition vocab size comes from the embedding provider when it is a
// language model; otherwise it is derived from the largest token id seen.
int partition_vocab_size(const TokenSequence& seq, const EmbeddingProvider& embed) {
  if (const auto* lm = dynamic_cast<const LMInterface*>(&embed)) {
    return lm->vocab_size();
  }
  int vocab = 2;
  for (TokenId t : seq.tokens) {
    vocab = std::max(vocab, static_cast<int>(t) + 1);
  }
  return vocab;
}

void check_detect_inputs(const TokenSequence& seq, const NERingModel* model,
                         const WatermarkConfig& cfg, Policy policy) {
  cfg.validate();
  if (seq.length() < 2) {
    throw std::invalid_argument("sequence too short to detect");
  }
  if (policy == Policy::None) {
    throw std::invalid_argument("detection needs a seed policy (semamark or lefthash)");
  }
  if (policy == Policy::Semamark && model == nullptr) {
    throw std::invalid_argument("semamark detection requires a NE-Ring model");
  }
}

}  // namespace

GreenCount count_green(const TokenSequence& seq, int q, const NERingModel* model,
                       const EmbeddingProvider& embed, const WatermarkConfig& cfg,
                       Policy policy, PartitionCache* cache) {
  check_detect_inputs(seq, model, cfg, policy);
  if (q < -cfg.Q || q > cfg.Q) {
    throw std::invalid_argument("offset q outside [-Q, Q]");
  }
  std::optional<PartitionCache> local_cache;
  if (cache == nullptr) {
    local_cache.emplace(cfg.key, partition_vocab_size(seq, embed), cfg.gamma_gen);
    cache = &*local_cache;
  }

  const auto lists = seed_partitions(seq, model, embed, cfg, policy, *cache);
  const GreenCount counts = count_at_offset(seq, lists, q);
  if (counts.positions == 0) {
    throw std::runtime_error("no scorable positions");
  }
  return counts;
}

std::vector<GreenCount> count_green_all_offsets(const TokenSequence& seq, int max_q,
                                                const NERingModel* model,
                                                const EmbeddingProvider& embed,
                                                const WatermarkConfig& cfg, Policy policy,
                                                PartitionCache* cache) {
  check_detect_inputs(seq, model, cfg, policy);
  if (max_q < 0) {
    throw std::invalid_argument("max_q must be non-negative");
  }
  std::optional<PartitionCache> local_cache;
  if (cache == nullptr) {
    local_cache.emplace(cfg.key, partition_vocab_size(seq, embed), cfg.gamma_gen);
    cache = &*local_cache;
  }
  const auto lists = seed_partitions(seq, model, embed, cfg, policy, *cache);

  std::vector<GreenCount> table(static_cast<std::size_t>(2 * max_q + 1));
  for (int q = -max_q; q <= max_q; ++q) {
    table[static_cast<std::size_t>(q + max_q)] = count_at_offset(seq, lists, q);
  }
  return table;
}

DetectionResult best_offset_z(std::span<const GreenCount> counts, int table_max_q, int Q,
                              double gamma, Policy policy) {
  if (counts.size() != static_cast<std::size_t>(2 * table_max_q + 1)) {
    throw std::invalid_argument("offset table size does not match table_max_q");
  }
  if (Q > table_max_q || Q < 0) {
    throw std::invalid_argument("Q outside precomputed offset table");
  }

  DetectionResult best;
  best.gamma_used = gamma;
  best.policy = policy;
  bool found = false;

  // q = 0, -1, +1, -2, +2, ... with strict improvement implements the tie
  // rule (smallest |q| first, negative before positive).
  for (int mag = 0; mag <= Q; ++mag) {
    const int offsets[2] = {-mag, mag};
    const int offset_count = mag == 0 ? 1 : 2;
    for (int qi = 0; qi < offset_count; ++qi) {
      const int q = offsets[static_cast<std::size_t>(qi)];
      const GreenCount& c = counts[static_cast<std::size_t>(q + table_max_q)];
      if (c.positions == 0) {
        continue;
      }
      const double z = z_score(c.green, c.positions, gamma);
      if (!found || z > best.z) {
        best.z = z;
        best.green_count = c.green;
        best.positions = c.positions;
        best.best_q = q;
        found = true;
      }
    }
  }
  if (!found) {
    throw std::runtime_error("no scorable positions");
  }
  return best;
}

DetectionResult detect(const TokenSequence& seq, const NERingModel* model,
                       const EmbeddingProvider& embed, const WatermarkConfig& cfg,
                       Policy policy, PartitionCache* cache) {
  const auto table = count_green_all_offsets(seq, cfg.Q, model, embed, cfg, policy, cache);
  return best_offset_z(table, cfg.Q, cfg.Q, cfg.gamma_detect, policy);
}

}  // namespace semamark

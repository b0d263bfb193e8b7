#pragma once

#include <span>
#include <string>

#include "semamark/config.hpp"
#include "semamark/lm.hpp"
#include "semamark/nering.hpp"
#include "semamark/partition.hpp"
#include "semamark/sequence.hpp"

namespace semamark {

enum class Policy {
  None,
  Semamark,
  Lefthash,
};

std::string to_string(Policy policy);
Policy policy_from_string(const std::string& s);

// Autoregressive sampling loop with optional green-list biasing. For
// policy Semamark the partition seed at each step is the semantic value of
// the preceding window; for Lefthash it is the keyed hash of the single
// preceding token. All sampling randomness comes from `rng`; the partition
// itself is keyed and consumes no rng draws, so delta = 0 reproduces the
// unwatermarked stream bit for bit.
//
// `model` is required for Semamark and ignored otherwise. `cache` may be
// shared across calls with the same (key, vocab, gamma_gen).
TokenSequence generate(const LMInterface& lm, std::span<const TokenId> prompt, int length,
                       Policy policy, const NERingModel* model, const WatermarkConfig& cfg,
                       Rng64& rng, PartitionCache* cache = nullptr);

}  // namespace semamark

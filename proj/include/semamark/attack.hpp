#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "semamark/lm.hpp"
#include "semamark/sequence.hpp"

namespace semamark {

enum class AttackKind {
  None,
  Substitute,
  InsertDelete,
};

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

struct AttackConfig {
  AttackKind kind = AttackKind::None;
  double rate = 0.0;
  int neighbor_k = 5;  // substitute only
  std::uint64_t rng_seed = 0;
};

// Memoized embedding-space nearest-neighbor lists, one attack run each.
class NeighborCache {
 public:
  NeighborCache(const LMInterface& lm, int k) : lm_(&lm), k_(k) {}
  const std::vector<TokenId>& nearest(TokenId token);

 private:
  const LMInterface* lm_;
  int k_;
  std::unordered_map<TokenId, std::vector<TokenId>> neighbors_;
};

// Paraphrase stand-in: each non-prompt token is independently replaced with
// probability `rate` by a uniformly chosen one of its neighbor_k nearest
// embedding-space neighbors (itself excluded). Meaning-preserving in the
// mock geometry, seed-destroying for token-hash schemes.
TokenSequence substitute_attack(const TokenSequence& seq, const AttackConfig& cfg,
                                const LMInterface& lm, NeighborCache* cache = nullptr);

// Alignment attack: per non-prompt position, delete the token with
// probability rate/2, or keep it and insert a model-sampled continuation
// after it with probability rate/2. rate must lie in [0, 0.5].
TokenSequence insert_delete_attack(const TokenSequence& seq, const AttackConfig& cfg,
                                   const LMInterface& lm);

// Dispatch on cfg.kind; None (or rate = 0) returns the sequence unchanged.
TokenSequence apply_attack(const TokenSequence& seq, const AttackConfig& cfg,
                           const LMInterface& lm, NeighborCache* cache = nullptr);

}  // namespace semamark

#include "semamark/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semamark {

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Substitute: return "substitute";
    case AttackKind::InsertDelete: return "insert_delete";
  }
  throw std::logic_error("unknown attack kind");
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::None;
  if (s == "substitute") return AttackKind::Substitute;
  if (s == "insert_delete") return AttackKind::InsertDelete;
  throw std::invalid_argument("unknown attack kind: " + s);
}

const std::vector<TokenId>& NeighborCache::nearest(TokenId token) {
  auto it = neighbors_.find(token);
  if (it != neighbors_.end()) {
    return it->second;
  }

  const EmbeddingVector center = lm_->token_embedding(token);
  const int vocab = lm_->vocab_size();
  std::vector<std::pair<double, TokenId>> dist;
  dist.reserve(static_cast<std::size_t>(vocab) - 1);
  for (TokenId t = 0; t < vocab; ++t) {
    if (t == token) {
      continue;
    }
    const EmbeddingVector e = lm_->token_embedding(t);
    double d2 = 0.0;
    for (std::size_t c = 0; c < e.size(); ++c) {
      const double diff = e[c] - center[c];
      d2 += diff * diff;
    }
    dist.emplace_back(d2, t);
  }
  const auto k = static_cast<std::size_t>(std::min(k_, vocab - 1));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<TokenId> top(k);
  for (std::size_t i = 0; i < k; ++i) {
    top[i] = dist[i].second;
  }
  return neighbors_.emplace(token, std::move(top)).first->second;
}

namespace {

void stamp_attack_provenance(TokenSequence& seq, const AttackConfig& cfg, Label original) {
  seq.provenance["attack"] = to_string(cfg.kind);
  seq.provenance["attack_rate"] = cfg.rate;
  seq.provenance["attack_seed"] = cfg.rng_seed;
  seq.provenance["original_label"] = to_string(original);
  if (cfg.kind == AttackKind::Substitute) {
    seq.provenance["neighbor_k"] = cfg.neighbor_k;
  }
  seq.label = Label::Attacked;
}

}  // namespace

TokenSequence substitute_attack(const TokenSequence& seq, const AttackConfig& cfg,
                                const LMInterface& lm, NeighborCache* cache) {
  if (cfg.rate < 0.0 || cfg.rate > 1.0) {
    throw std::invalid_argument("substitution rate must lie in [0, 1]");
  }
  if (cfg.neighbor_k < 1 || cfg.neighbor_k >= lm.vocab_size()) {
    throw std::invalid_argument("neighbor_k must lie in [1, vocab_size)");
  }
  if (cfg.rate == 0.0) {
    return seq;
  }

  NeighborCache local_cache(lm, cfg.neighbor_k);
  if (cache == nullptr) {
    cache = &local_cache;
  }

  TokenSequence out = seq;
  Rng64 rng(cfg.rng_seed);
  for (int i = seq.prompt_len; i < seq.length(); ++i) {
    if (rng.uniform01() >= cfg.rate) {
      continue;
    }
    const auto& neighbors = cache->nearest(out.tokens[static_cast<std::size_t>(i)]);
    const auto pick = static_cast<std::size_t>(rng.bounded(neighbors.size()));
    out.tokens[static_cast<std::size_t>(i)] = neighbors[pick];
  }
  stamp_attack_provenance(out, cfg, seq.label);
  return out;
}

TokenSequence insert_delete_attack(const TokenSequence& seq, const AttackConfig& cfg,
                                   const LMInterface& lm) {
  if (cfg.rate < 0.0 || cfg.rate > 0.5) {
    throw std::invalid_argument("insert/delete rate must lie in [0, 0.5]");
  }
  if (cfg.rate == 0.0) {
    return seq;
  }

  TokenSequence out = seq;
  out.tokens.assign(seq.tokens.begin(), seq.tokens.begin() + seq.prompt_len);
  Rng64 rng(cfg.rng_seed);
  for (int i = seq.prompt_len; i < seq.length(); ++i) {
    const TokenId token = seq.tokens[static_cast<std::size_t>(i)];
    const double u = rng.uniform01();
    if (u < cfg.rate / 2.0) {
      continue;  // delete
    }
    out.tokens.push_back(token);
    if (u < cfg.rate) {
      const TokenId context[] = {token};
      out.tokens.push_back(sample_token(lm.next_logits(context), 1.0, rng));
    }
  }
  stamp_attack_provenance(out, cfg, seq.label);
  return out;
}

TokenSequence apply_attack(const TokenSequence& seq, const AttackConfig& cfg,
                           const LMInterface& lm, NeighborCache* cache) {
  switch (cfg.kind) {
    case AttackKind::None: return seq;
    case AttackKind::Substitute: return substitute_attack(seq, cfg, lm, cache);
    case AttackKind::InsertDelete: return insert_delete_attack(seq, cfg, lm);
  }
  throw std::logic_error("unknown attack kind");
}

}  // namespace semamark

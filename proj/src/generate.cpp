#include "semamark/generate.hpp"

#include <optional>
#include <stdexcept>

#include "semamark/semantic.hpp"

namespace semamark {

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::None: return "none";
    case Policy::Semamark: return "semamark";
    case Policy::Lefthash: return "lefthash";
  }
  throw std::logic_error("unknown policy");
}

Policy policy_from_string(const std::string& s) {
  if (s == "none") return Policy::None;
  if (s == "semamark") return Policy::Semamark;
  if (s == "lefthash") return Policy::Lefthash;
  throw std::invalid_argument("unknown policy: " + s);
}

TokenSequence generate(const LMInterface& lm, std::span<const TokenId> prompt, int length,
                       Policy policy, const NERingModel* model, const WatermarkConfig& cfg,
                       Rng64& rng, PartitionCache* cache) {
  cfg.validate();
  if (prompt.empty()) {
    throw std::invalid_argument("prompt must contain at least one token");
  }
  if (length < 1) {
    throw std::invalid_argument("generation length must be at least 1");
  }
  if (policy == Policy::Semamark && model == nullptr) {
    throw std::invalid_argument("semamark policy requires a NE-Ring model");
  }
  for (TokenId t : prompt) {
    if (t < 0 || t >= lm.vocab_size()) {
      throw std::invalid_argument("prompt token outside vocabulary");
    }
  }

  std::optional<PartitionCache> local_cache;
  if (cache == nullptr && policy != Policy::None) {
    local_cache.emplace(cfg.key, lm.vocab_size(), cfg.gamma_gen);
    cache = &*local_cache;
  }

  TokenSequence seq;
  seq.tokens.assign(prompt.begin(), prompt.end());
  seq.prompt_len = static_cast<int>(prompt.size());
  switch (policy) {
    case Policy::None: seq.label = Label::Unwatermarked; break;
    case Policy::Semamark: seq.label = Label::WatermarkedSemamark; break;
    case Policy::Lefthash: seq.label = Label::WatermarkedLefthash; break;
  }

  std::string green_pattern;
  long green_count = 0;
  if (policy != Policy::None) {
    green_pattern.reserve(static_cast<std::size_t>(length));
  }

  for (int step = 0; step < length; ++step) {
    const int position = seq.length();
    std::vector<double> logits = lm.next_logits(seq.tokens);

    const GreenList* green = nullptr;
    if (policy != Policy::None && position >= 1) {
      std::uint64_t seed = 0;
      if (policy == Policy::Semamark) {
        seed = static_cast<std::uint64_t>(
            semantic_value_at(seq.tokens, position, lm, *model, cfg));
      } else {
        seed = lefthash_seed(seq.tokens.back(), cfg.key);
      }
      green = &cache->get(seed);
      logits = bias_logits(logits, *green, cfg.delta);
    }

    const TokenId token = sample_token(logits, 1.0, rng);
    seq.tokens.push_back(token);

    if (green != nullptr) {
      const bool hit = green->contains(token);
      green_pattern.push_back(hit ? '1' : '0');
      green_count += hit ? 1 : 0;
    }
  }

  seq.provenance["policy"] = to_string(policy);
  seq.provenance["delta"] = cfg.delta;
  seq.provenance["config_hash"] = config_hash_hex(cfg);
  if (policy != Policy::None) {
    seq.provenance["green_pattern"] = green_pattern;
    seq.provenance["gen_green_count"] = green_count;
  }
  return seq;
}

}  // namespace semamark

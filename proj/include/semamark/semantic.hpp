#pragma once

#include <span>

#include "semamark/config.hpp"
#include "semamark/embedding.hpp"
#include "semamark/nering.hpp"
#include "semamark/pooling.hpp"

namespace semamark {

// Discrete semantic value seeding the partition at `position`: pools the up
// to m preceding token embeddings, projects onto the ring and discretizes
// into one of K sections. Position 0 has no context and is never seeded.
int semantic_value_at(std::span<const TokenId> tokens, int position,
                      const EmbeddingProvider& embed, const NERingModel& model,
                      const WatermarkConfig& cfg);

}  // namespace semamark

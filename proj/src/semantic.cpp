#include "semamark/semantic.hpp"

namespace semamark {

int semantic_value_at(std::span<const TokenId> tokens, int position,
                      const EmbeddingProvider& embed, const NERingModel& model,
                      const WatermarkConfig& cfg) {
  const PooledEmbedding pooled = pool_context(tokens, position, cfg.m, embed);
  const RingPoint point = model.forward(pooled);
  return discretize(point.angle, cfg.K);
}

}  // namespace semamark

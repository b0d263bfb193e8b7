#pragma once

#include <span>

#include "semamark/embedding.hpp"

namespace semamark {

// Linear pooling weight for index j (1-based) in a window of n tokens:
// (j + n/2) / (n^2 + n/2). Weights increase toward the window end and sum
// to 1 for every n.
double pooling_weight(int j, int n);

// Weighted mean of a context window. window[0] is the most distant token,
// window.back() the token adjacent to the position being generated. The
// window may be shorter than m (truncated near a sequence start) but never
// longer, and never empty.
PooledEmbedding pooled_embedding(std::span<const EmbeddingVector> window, int m);

// Pools the embeddings of tokens [max(0, position - m) .. position - 1].
// position must have at least one preceding token.
PooledEmbedding pool_context(std::span<const TokenId> tokens, int position, int m,
                             const EmbeddingProvider& embed);

}  // namespace semamark

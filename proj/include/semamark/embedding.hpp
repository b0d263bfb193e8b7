#pragma once

#include <cstdint>
#include <vector>

namespace semamark {

using TokenId = std::int32_t;
using EmbeddingVector = std::vector<double>;

// Weighted pool of a context window; window_length is the number of tokens
// that actually contributed (may be shorter than m near a sequence start).
struct PooledEmbedding {
  std::vector<double> values;
  int window_length = 0;
};

// Read-only source of per-token embeddings. Implementations must be stable:
// the same token id always yields the same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int embedding_dim() const = 0;
  virtual EmbeddingVector token_embedding(TokenId token) const = 0;
};

}  // namespace semamark

#include "semamark/pooling.hpp"

#include <stdexcept>
#include <string>

namespace semamark {

double pooling_weight(int j, int n) {
  const double nn = static_cast<double>(n);
  return (static_cast<double>(j) + nn / 2.0) / (nn * nn + nn / 2.0);
}

PooledEmbedding pooled_embedding(std::span<const EmbeddingVector> window, int m) {
  if (window.empty()) {
    throw std::invalid_argument("empty pooling window");
  }
  const int n = static_cast<int>(window.size());
  if (n > m) {
    throw std::invalid_argument("pooling window longer than m (" +
                                std::to_string(n) + " > " + std::to_string(m) + ")");
  }
  const std::size_t d = window[0].size();
  if (d == 0) {
    throw std::invalid_argument("zero-dimensional embedding in pooling window");
  }

  PooledEmbedding pooled;
  pooled.window_length = n;
  pooled.values.assign(d, 0.0);
  for (int j = 1; j <= n; ++j) {
    const EmbeddingVector& e = window[static_cast<std::size_t>(j - 1)];
    if (e.size() != d) {
      throw std::invalid_argument("mismatched embedding dimensions in pooling window");
    }
    const double w = pooling_weight(j, n);
    for (std::size_t c = 0; c < d; ++c) {
      pooled.values[c] += w * e[c];
    }
  }
  return pooled;
}

PooledEmbedding pool_context(std::span<const TokenId> tokens, int position, int m,
                             const EmbeddingProvider& embed) {
  if (position < 1) {
    throw std::invalid_argument("no context");
  }
  if (position > static_cast<int>(tokens.size())) {
    throw std::invalid_argument("context position past end of sequence");
  }
  const int start = position > m ? position - m : 0;
  std::vector<EmbeddingVector> window;
  window.reserve(static_cast<std::size_t>(position - start));
  for (int i = start; i < position; ++i) {
    window.push_back(embed.token_embedding(tokens[static_cast<std::size_t>(i)]));
  }
  return pooled_embedding(window, m);
}

}  // namespace semamark

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semamark/embedding.hpp"
#include "semamark/rng.hpp"

namespace semamark {

// Language model surface the watermark engine needs: next-token logits and
// a stable embedding table. Implementations must be pure with respect to
// the context and safe for concurrent read-only use.
class LMInterface : public EmbeddingProvider {
 public:
  virtual int vocab_size() const = 0;
  virtual std::vector<double> next_logits(std::span<const TokenId> context) const = 0;
};

// Deterministic bigram stand-in for a real backbone. Next-token logits
// depend only on the final context token, and the embedding table shares
// low-rank structure with the bigram matrix so that pooled windows carry
// usable semantics and embedding-space neighbors are genuinely close.
class MockLM final : public LMInterface {
 public:
  MockLM(int vocab_size, int dim, std::uint64_t rng_seed, double concentration,
         std::vector<double> bigram_logits, std::vector<double> embeddings);

  int vocab_size() const override { return vocab_size_; }
  int embedding_dim() const override { return dim_; }
  EmbeddingVector token_embedding(TokenId token) const override;
  std::vector<double> next_logits(std::span<const TokenId> context) const override;

  std::uint64_t rng_seed() const { return rng_seed_; }
  double concentration() const { return concentration_; }

  // Digest of the realized matrices; persisted next to rng_seed so a
  // reconstructed model can be verified.
  std::uint64_t checksum() const;

  std::span<const double> bigram_row(TokenId token) const;

 private:
  int vocab_size_;
  int dim_;
  std::uint64_t rng_seed_;
  double concentration_;
  std::vector<double> bigram_logits_;  // row-major, vocab x vocab
  std::vector<double> embeddings_;     // row-major, vocab x dim
};

MockLM build_mock_lm(std::uint64_t rng_seed, int vocab_size, int dim, double concentration);

// Multinomial draw from softmax(logits / temperature) by inverse CDF.
TokenId sample_token(std::span<const double> logits, double temperature, Rng64& rng);

// Mean entropy (nats) of the next-token distributions, averaged over rows.
double mean_next_token_entropy(const MockLM& lm);

}  // namespace semamark

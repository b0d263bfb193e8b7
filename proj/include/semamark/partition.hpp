#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "semamark/embedding.hpp"

namespace semamark {

// Opaque watermark key. Never logged, never serialized into outputs; only
// its FNV fingerprint enters the seed mixers (PROTOCOL.md).
class SecretKey {
 public:
  static SecretKey from_bytes(std::vector<std::uint8_t> bytes);
  static SecretKey from_string(const std::string& s);
  static SecretKey from_file(const std::string& path);

  std::uint64_t fingerprint() const { return fingerprint_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  SecretKey() = default;
  std::vector<std::uint8_t> bytes_;
  std::uint64_t fingerprint_ = 0;
};

// Keyed gamma-fraction of the vocabulary for one seed value.
class GreenList {
 public:
  GreenList() = default;
  GreenList(std::vector<TokenId> members, double gamma, int vocab_size);

  bool contains(TokenId token) const;
  const std::vector<TokenId>& members() const { return members_; }  // sorted
  std::size_t size() const { return members_.size(); }
  double gamma() const { return gamma_; }
  int vocab_size() const { return vocab_size_; }

 private:
  std::vector<TokenId> members_;
  double gamma_ = 0.0;
  int vocab_size_ = 0;
};

// Keyed pseudo-random partition: first floor(gamma * vocab_size) entries of
// a Fisher-Yates permutation driven by partition_state(seed, key).
GreenList green_list(std::uint64_t seed, const SecretKey& key, int vocab_size, double gamma);

// Baseline scheme: seed from the single preceding token.
std::uint64_t lefthash_seed(TokenId prev_token, const SecretKey& key);

// Keyed 128-bit digest of the raw coordinate bytes, truncated to 64 bits.
// Deliberately sensitive to any bit-level change of the embedding.
std::uint64_t embedding_hash_seed(const PooledEmbedding& e, const SecretKey& key);

// logits + delta on green tokens, untouched elsewhere. Input is not mutated.
std::vector<double> bias_logits(const std::vector<double>& logits, const GreenList& green,
                                double delta);

// Memoizes partitions by seed for one fixed (key, vocab, gamma) context.
// Watermark seeds repeat constantly (only K distinct semantic values), so
// generation and detection share lists instead of reshuffling per token.
class PartitionCache {
 public:
  PartitionCache(const SecretKey& key, int vocab_size, double gamma)
      : key_(&key), vocab_size_(vocab_size), gamma_(gamma) {}

  const GreenList& get(std::uint64_t seed);

 private:
  const SecretKey* key_;
  int vocab_size_;
  double gamma_;
  std::unordered_map<std::uint64_t, GreenList> lists_;
};

}  // namespace semamark

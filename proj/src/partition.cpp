#include "semamark/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "semamark/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "canonical byte serialization assumes a little-endian host");

namespace semamark {

SecretKey SecretKey::from_bytes(std::vector<std::uint8_t> bytes) {
  if (bytes.size() < 16) {
    throw std::invalid_argument("secret key must be at least 16 bytes");
  }
  SecretKey key;
  key.fingerprint_ = fnv1a64(bytes.data(), bytes.size());
  key.bytes_ = std::move(bytes);
  return key;
}

SecretKey SecretKey::from_string(const std::string& s) {
  return from_bytes(std::vector<std::uint8_t>(s.begin(), s.end()));
}

SecretKey SecretKey::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open key file: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return from_bytes(std::move(bytes));
}

GreenList::GreenList(std::vector<TokenId> members, double gamma, int vocab_size)
    : members_(std::move(members)), gamma_(gamma), vocab_size_(vocab_size) {
  std::sort(members_.begin(), members_.end());
}

bool GreenList::contains(TokenId token) const {
  return std::binary_search(members_.begin(), members_.end(), token);
}

namespace {

std::uint64_t partition_state(std::uint64_t seed, const SecretKey& key) {
  return seed ^ key.fingerprint();
}

}  // namespace

GreenList green_list(std::uint64_t seed, const SecretKey& key, int vocab_size, double gamma) {
  if (vocab_size < 2) {
    throw std::invalid_argument("vocab_size must be at least 2");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }

  std::vector<TokenId> perm(static_cast<std::size_t>(vocab_size));
  std::iota(perm.begin(), perm.end(), TokenId{0});

  Rng64 rng(partition_state(seed, key));  // Rng64 applies the mix64 finalizer
  for (std::size_t i = perm.size() - 1; i >= 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
    std::swap(perm[i], perm[j]);
  }

  const auto green_size =
      static_cast<std::size_t>(std::floor(gamma * static_cast<double>(vocab_size)));
  perm.resize(green_size);
  return GreenList(std::move(perm), gamma, vocab_size);
}

std::uint64_t lefthash_seed(TokenId prev_token, const SecretKey& key) {
  const auto t = static_cast<std::uint32_t>(prev_token);
  return murmur3_x64_128(&t, sizeof(t), key.fingerprint()).h1;
}

std::uint64_t embedding_hash_seed(const PooledEmbedding& e, const SecretKey& key) {
  for (double v : e.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite embedding coordinate");
    }
  }
  return murmur3_x64_128(e.values.data(), e.values.size() * sizeof(double),
                         key.fingerprint())
      .h1;
}

std::vector<double> bias_logits(const std::vector<double>& logits, const GreenList& green,
                                double delta) {
  if (static_cast<int>(logits.size()) != green.vocab_size()) {
    throw std::invalid_argument("logits length does not match partition vocab size");
  }
  if (delta < 0.0) {
    throw std::invalid_argument("delta must be non-negative");
  }
  std::vector<double> out = logits;
  if (delta == 0.0) {
    return out;
  }
  for (TokenId t : green.members()) {
    out[static_cast<std::size_t>(t)] += delta;
  }
  return out;
}

const GreenList& PartitionCache::get(std::uint64_t seed) {
  auto it = lists_.find(seed);
  if (it == lists_.end()) {
    it = lists_.emplace(seed, green_list(seed, *key_, vocab_size_, gamma_)).first;
  }
  return it->second;
}

}  // namespace semamark

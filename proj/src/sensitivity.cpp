#include "semamark/sensitivity.hpp"

#include <stdexcept>

#include "semamark/rng.hpp"

namespace semamark {

namespace {

double green_overlap(const GreenList& a, const GreenList& b) {
  // Both lists are sorted; classic two-pointer intersection.
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t shared = 0;
  while (i < a.members().size() && j < b.members().size()) {
    if (a.members()[i] < b.members()[j]) {
      ++i;
    } else if (a.members()[i] > b.members()[j]) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(a.members().size());
}

}  // namespace

SensitivityResult sensitivity_experiment(int n, double perturbation,
                                         const NERingModel& model, const SecretKey& key,
                                         int vocab_size, double gamma, int K,
                                         std::span<const PooledEmbedding> pool,
                                         std::uint64_t rng_seed) {
  if (n < 100) {
    throw std::invalid_argument("sensitivity experiment needs n >= 100");
  }
  if (perturbation < 0.0) {
    throw std::invalid_argument("perturbation must be non-negative");
  }
  if (pool.empty()) {
    throw std::invalid_argument("empty embedding pool");
  }

  Rng64 rng(rng_seed);
  double hash_total = 0.0;
  double discrete_total = 0.0;

  for (int trial = 0; trial < n; ++trial) {
    const PooledEmbedding& base = pool[static_cast<std::size_t>(rng.bounded(pool.size()))];
    PooledEmbedding bumped = base;
    const auto coord = static_cast<std::size_t>(rng.bounded(bumped.values.size()));
    bumped.values[coord] += perturbation;

    const GreenList hash_before =
        green_list(embedding_hash_seed(base, key), key, vocab_size, gamma);
    const GreenList hash_after =
        green_list(embedding_hash_seed(bumped, key), key, vocab_size, gamma);
    hash_total += green_overlap(hash_before, hash_after);

    const auto value_before =
        static_cast<std::uint64_t>(discretize(model.forward(base).angle, K));
    const auto value_after =
        static_cast<std::uint64_t>(discretize(model.forward(bumped).angle, K));
    if (value_before == value_after) {
      discrete_total += 1.0;
    } else {
      discrete_total += green_overlap(green_list(value_before, key, vocab_size, gamma),
                                      green_list(value_after, key, vocab_size, gamma));
    }
  }

  return {hash_total / static_cast<double>(n), discrete_total / static_cast<double>(n)};
}

}  // namespace semamark

#pragma once

#include <cstdint>
#include <span>

#include "semamark/nering.hpp"
#include "semamark/partition.hpp"

namespace semamark {

struct SensitivityResult {
  double overlap_hash = 0.0;      // continuous-hash seed path
  double overlap_discrete = 0.0;  // NE-Ring semantic-value path
};

// Partition-sensitivity experiment: perturb one random coordinate of each
// of n pooled embeddings by `perturbation` and measure how much of the
// green list survives under (a) the direct continuous-embedding hash seed
// and (b) the discretized semantic-value seed. The hash path collapses to
// the independent-subset overlap gamma; the discrete path is expected to be
// nearly always exact.
SensitivityResult sensitivity_experiment(int n, double perturbation,
                                         const NERingModel& model, const SecretKey& key,
                                         int vocab_size, double gamma, int K,
                                         std::span<const PooledEmbedding> pool,
                                         std::uint64_t rng_seed);

}  // namespace semamark

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semamark/config.hpp"
#include "semamark/nering.hpp"
#include "semamark/rng.hpp"
#include "semamark/sequence.hpp"

namespace semamark {

enum class LrSchedule {
  Constant,
  LinearDecay,  // lr * (1 - step / steps); settles the late-training ripple
};

struct TrainingConfig {
  double sigma = 0.05;
  double tau = 0.7;
  int batch_size = 256;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int steps = 2000;
  LrSchedule lr_schedule = LrSchedule::LinearDecay;
  // One window per sequence within a batch (when the corpus has enough
  // sequences): adjacent windows of one rollout are near-duplicates, and
  // treating them as negatives in the same batch injects repulsion noise.
  bool stratify_by_sequence = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// anchors[j] and augmented[j] form a positive pair; everything else in the
// combined 2B set is a negative for both.
struct ContrastiveBatch {
  std::vector<PooledEmbedding> anchors;
  std::vector<PooledEmbedding> augmented;
};

// Positive-pair construction: augmented[j] = anchors[j] + Gaussian noise of
// std sigma per coordinate. Draw order is per anchor, per coordinate.
ContrastiveBatch soft_augment(std::span<const PooledEmbedding> anchors, double sigma,
                              Rng64& rng);

// InfoNCE over 2B unit ring points: mean over anchors j of
// -log( exp(sim(p_j, p_pos(j)) / tau) / sum_{k != j} exp(sim(p_j, p_k) / tau) )
// with pos(j) the other element of j's pair and sim the cosine similarity
// (plain dot product on the unit circle).
double contrastive_loss(std::span<const RingPoint> points, double tau);

// Parameter-shaped gradient record (weights and biases per layer).
using GradientRecord = std::vector<DenseLayer>;

// Analytic gradient of contrastive_loss(normalize(MLP(batch))) with respect
// to every model parameter. Batch embeddings are fed to the MLP directly;
// standardize beforehand when the model carries stats. Returns the loss
// value through loss_out when non-null.
GradientRecord loss_gradient(const NERingModel& model, const ContrastiveBatch& batch,
                             double tau, double* loss_out = nullptr);

struct TrainResult {
  NERingModel model;
  std::vector<double> loss_log;  // one entry per step
};

// Mini-batch SGD with classical momentum over all m-token windows of the
// corpus. Computes per-coordinate standardization stats first and stores
// them in the returned model; steps = 0 returns init_model bit-exactly.
TrainResult train(std::span<const TokenSequence> corpus, const EmbeddingProvider& embed,
                  const NERingModel& init_model, const TrainingConfig& cfg,
                  const WatermarkConfig& wcfg);

void write_loss_csv(const std::string& path, std::span<const double> losses);

}  // namespace semamark

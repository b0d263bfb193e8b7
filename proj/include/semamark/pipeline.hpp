#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semamark/attack.hpp"
#include "semamark/config.hpp"
#include "semamark/detect.hpp"
#include "semamark/generate.hpp"
#include "semamark/lm.hpp"
#include "semamark/metrics.hpp"
#include "semamark/nering.hpp"
#include "semamark/sequence.hpp"
#include "semamark/training.hpp"

// Batch orchestration over the core operations: corpora, generation,
// attacks, detection and metric sweeps. Every batch derives one seed per
// sequence index from a base seed, so results are independent of thread
// count and schedule.

namespace semamark {

// Runs fn(0..n-1), on `threads` workers when threads > 1. Exceptions from
// workers are rethrown on the caller thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Plain unwatermarked rollouts (training corpus material). Each sequence
// starts from one uniformly drawn token and has total length in
// [min_len, max_len].
std::vector<TokenSequence> rollout_corpus(const MockLM& lm, int n_sequences, int min_len,
                                          int max_len, std::uint64_t seed, int threads = 1);

struct GenerationParams {
  int n_sequences = 500;
  int prompt_len = 20;
  int min_new_tokens = 175;
  int max_new_tokens = 225;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Watermarked (or plain) generations from mock-LM prompts. Prompt tokens
// and sampling draws depend only on params.seed and the sequence index, so
// runs with different policies share prompts and rng streams.
std::vector<TokenSequence> generate_batch(const MockLM& lm, const NERingModel* model,
                                          const WatermarkConfig& cfg, Policy policy,
                                          const GenerationParams& params);

// Applies cfg.kind to every sequence, seeding per index from base_seed.
std::vector<TokenSequence> attack_batch(std::span<const TokenSequence> seqs,
                                        const AttackConfig& cfg, const MockLM& lm,
                                        std::uint64_t base_seed, int threads = 1);

std::vector<DetectionResult> detect_batch(std::span<const TokenSequence> seqs,
                                          const NERingModel* model, const MockLM& lm,
                                          const WatermarkConfig& cfg, Policy policy,
                                          int threads = 1);

std::vector<double> z_scores(std::span<const DetectionResult> results);

// Pools every m-token window of the corpus; subsamples uniformly without
// replacement down to max_windows when the corpus yields more (0 = keep all).
std::vector<PooledEmbedding> collect_pooled_windows(std::span<const TokenSequence> corpus,
                                                    int m, const EmbeddingProvider& embed,
                                                    std::size_t max_windows = 0,
                                                    std::uint64_t subsample_seed = 0);

struct EvalRow {
  Policy policy = Policy::Semamark;
  AttackKind attack = AttackKind::None;
  double rate = 0.0;
  int offset_q = 0;  // Q used by the detector for this row
  MetricReport metrics;
};

struct EvalOptions {
  std::vector<Policy> policies = {Policy::Semamark, Policy::Lefthash};
  std::vector<AttackConfig> attacks = {{}};  // default: unattacked row only
  GenerationParams generation;
  bool with_nll = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double nll_unwatermarked = 0.0;
  std::vector<std::pair<Policy, double>> nll_watermarked;
};

// Detection benchmark: per (policy, attack) row, watermarked sequences are
// attacked and scored against clean unwatermarked negatives. SemaMark rows
// use the configured Q-offset search; the LeftHash baseline keeps its
// standard one-to-one detection (Q = 0).
EvalReport eval_run(const MockLM& lm, const NERingModel* model, const WatermarkConfig& cfg,
                    const EvalOptions& options);

void write_eval_csv(const std::string& path, std::span<const EvalRow> rows);

struct SweepRow {
  int m = 0;
  int Q = 0;
  double gamma_detect = 0.0;
  MetricReport metrics;
};

struct SweepOptions {
  std::vector<int> m_grid;
  std::vector<int> q_grid;
  std::vector<double> gamma_grid;
  AttackConfig attack;  // applied to the watermarked side, None allowed
  GenerationParams generation;
};

// Ablation grid for the semamark policy. Sequences are regenerated per m;
// offset tables are computed once per sequence and reused across (Q, gamma).
std::vector<SweepRow> sweep_run(const MockLM& lm, const NERingModel& model,
                                const WatermarkConfig& cfg, const SweepOptions& options);

void write_sweep_csv(const std::string& path, std::span<const SweepRow> rows);

}  // namespace semamark

#include "semamark/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "semamark/format.hpp"
#include "semamark/pooling.hpp"

namespace semamark {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) {
    return;
  }
  const auto worker_count =
      static_cast<std::size_t>(std::max(1, threads)) < n
          ? static_cast<std::size_t>(std::max(1, threads))
          : n;
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(worker_count);
  for (std::size_t t = 0; t < worker_count; ++t) {
    pool.emplace_back(body);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

std::vector<TokenSequence> rollout_corpus(const MockLM& lm, int n_sequences, int min_len,
                                          int max_len, std::uint64_t seed, int threads) {
  if (n_sequences < 1 || min_len < 2 || max_len < min_len) {
    throw std::invalid_argument("invalid rollout corpus parameters");
  }
  const WatermarkConfig plain_cfg;
  std::vector<TokenSequence> corpus(static_cast<std::size_t>(n_sequences));
  parallel_for(static_cast<std::size_t>(n_sequences), threads, [&](std::size_t i) {
    const std::uint64_t seq_seed = derive_seed(seed, i);
    Rng64 rng(seq_seed);
    const int len =
        min_len + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_len - min_len + 1)));
    const TokenId first = static_cast<TokenId>(rng.bounded(static_cast<std::uint64_t>(lm.vocab_size())));
    const TokenId prompt[] = {first};
    TokenSequence seq = generate(lm, prompt, len - 1, Policy::None, nullptr, plain_cfg, rng);
    seq.provenance["rng_seed"] = seq_seed;
    seq.provenance["sequence_index"] = i;
    corpus[i] = std::move(seq);
  });
  return corpus;
}

std::vector<TokenSequence> generate_batch(const MockLM& lm, const NERingModel* model,
                                          const WatermarkConfig& cfg, Policy policy,
                                          const GenerationParams& params) {
  if (params.n_sequences < 1 || params.prompt_len < 1 || params.min_new_tokens < 1 ||
      params.max_new_tokens < params.min_new_tokens) {
    throw std::invalid_argument("invalid generation batch parameters");
  }
  std::vector<TokenSequence> out(static_cast<std::size_t>(params.n_sequences));
  parallel_for(static_cast<std::size_t>(params.n_sequences), params.threads, [&](std::size_t i) {
    // Prompt and sampling streams depend on the seed and index only, never
    // on the policy, so policies can be compared draw for draw.
    const std::uint64_t prompt_seed = derive_seed(params.seed, 2 * i);
    const std::uint64_t gen_seed = derive_seed(params.seed, 2 * i + 1);

    Rng64 prompt_rng(prompt_seed);
    const TokenId first =
        static_cast<TokenId>(prompt_rng.bounded(static_cast<std::uint64_t>(lm.vocab_size())));
    std::vector<TokenId> prompt{first};
    if (params.prompt_len > 1) {
      const TokenId start[] = {first};
      prompt = generate(lm, start, params.prompt_len - 1, Policy::None, nullptr, cfg,
                        prompt_rng)
                   .tokens;
    }

    Rng64 gen_rng(gen_seed);
    const int span = params.max_new_tokens - params.min_new_tokens;
    const int length =
        params.min_new_tokens +
        static_cast<int>(span == 0 ? 0 : gen_rng.bounded(static_cast<std::uint64_t>(span + 1)));

    TokenSequence seq = generate(lm, prompt, length, policy, model, cfg, gen_rng);
    seq.provenance["sequence_index"] = i;
    seq.provenance["prompt_seed"] = prompt_seed;
    seq.provenance["gen_seed"] = gen_seed;
    out[i] = std::move(seq);
  });
  return out;
}

std::vector<TokenSequence> attack_batch(std::span<const TokenSequence> seqs,
                                        const AttackConfig& cfg, const MockLM& lm,
                                        std::uint64_t base_seed, int threads) {
  std::vector<TokenSequence> out(seqs.size());
  NeighborCache neighbors(lm, cfg.neighbor_k);
  if (cfg.kind == AttackKind::Substitute && cfg.rate > 0.0) {
    for (TokenId t = 0; t < lm.vocab_size(); ++t) {
      neighbors.nearest(t);  // warm before the read-only parallel section
    }
  }
  parallel_for(seqs.size(), threads, [&](std::size_t i) {
    AttackConfig seq_cfg = cfg;
    seq_cfg.rng_seed = derive_seed(base_seed, i);
    out[i] = apply_attack(seqs[i], seq_cfg, lm, &neighbors);
  });
  return out;
}

std::vector<DetectionResult> detect_batch(std::span<const TokenSequence> seqs,
                                          const NERingModel* model, const MockLM& lm,
                                          const WatermarkConfig& cfg, Policy policy,
                                          int threads) {
  std::vector<DetectionResult> out(seqs.size());
  parallel_for(seqs.size(), threads,
               [&](std::size_t i) { out[i] = detect(seqs[i], model, lm, cfg, policy); });
  return out;
}

std::vector<double> z_scores(std::span<const DetectionResult> results) {
  std::vector<double> z;
  z.reserve(results.size());
  for (const auto& r : results) {
    z.push_back(r.z);
  }
  return z;
}

std::vector<PooledEmbedding> collect_pooled_windows(std::span<const TokenSequence> corpus,
                                                    int m, const EmbeddingProvider& embed,
                                                    std::size_t max_windows,
                                                    std::uint64_t subsample_seed) {
  std::vector<std::pair<std::size_t, int>> slots;  // (sequence, position)
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (int pos = m; pos <= corpus[s].length(); ++pos) {
      slots.emplace_back(s, pos);
    }
  }
  if (slots.empty()) {
    throw std::invalid_argument("corpus yields no full windows");
  }
  if (max_windows > 0 && slots.size() > max_windows) {
    Rng64 rng(subsample_seed);
    for (std::size_t i = 0; i < max_windows; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.bounded(slots.size() - i));
      std::swap(slots[i], slots[j]);
    }
    slots.resize(max_windows);
  }

  std::vector<PooledEmbedding> windows(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    windows[i] = pool_context(corpus[slots[i].first].tokens, slots[i].second, m, embed);
  }
  return windows;
}

EvalReport eval_run(const MockLM& lm, const NERingModel* model, const WatermarkConfig& cfg,
                    const EvalOptions& options) {
  if (options.policies.empty() || options.attacks.empty()) {
    throw std::invalid_argument("eval needs at least one policy and one attack row");
  }

  EvalReport report;
  const auto negatives = generate_batch(lm, model, cfg, Policy::None, options.generation);
  if (options.with_nll) {
    report.nll_unwatermarked = mean_nll(lm, negatives);
  }

  std::uint64_t row_counter = 0;
  for (const Policy policy : options.policies) {
    if (policy == Policy::None) {
      throw std::invalid_argument("eval rows need a watermarking policy");
    }
    const auto positives_clean = generate_batch(lm, model, cfg, policy, options.generation);
    if (options.with_nll) {
      report.nll_watermarked.emplace_back(policy, mean_nll(lm, positives_clean));
    }

    WatermarkConfig row_cfg = cfg;
    if (policy == Policy::Lefthash) {
      row_cfg.Q = 0;  // baseline keeps its one-to-one detection
    }

    const auto neg_results =
        detect_batch(negatives, model, lm, row_cfg, policy, options.generation.threads);
    const auto neg_z = z_scores(neg_results);

    for (const AttackConfig& attack : options.attacks) {
      ++row_counter;
      std::vector<TokenSequence> positives;
      if (attack.kind == AttackKind::None || attack.rate == 0.0) {
        positives = positives_clean;
      } else {
        positives = attack_batch(positives_clean, attack, lm,
                                 derive_seed(options.generation.seed, 0xa77ac0 + row_counter),
                                 options.generation.threads);
      }
      const auto pos_results =
          detect_batch(positives, model, lm, row_cfg, policy, options.generation.threads);
      const auto pos_z = z_scores(pos_results);

      EvalRow row;
      row.policy = policy;
      row.attack = attack.kind;
      row.rate = attack.kind == AttackKind::None ? 0.0 : attack.rate;
      row.offset_q = row_cfg.Q;
      row.metrics = compute_metrics(pos_z, neg_z);
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_eval_csv(const std::string& path, std::span<const EvalRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open eval output: " + path);
  }
  out << "policy,attack,rate,Q,auc,f1,threshold,n_pos,n_neg\n";
  for (const auto& row : rows) {
    out << to_string(row.policy) << ',' << to_string(row.attack) << ','
        << format_double(row.rate) << ',' << row.offset_q << ','
        << format_double(row.metrics.roc_auc) << ',' << format_double(row.metrics.f1_best)
        << ',' << format_double(row.metrics.best_threshold) << ',' << row.metrics.n_pos
        << ',' << row.metrics.n_neg << '\n';
  }
}

std::vector<SweepRow> sweep_run(const MockLM& lm, const NERingModel& model,
                                const WatermarkConfig& cfg, const SweepOptions& options) {
  if (options.m_grid.empty() || options.q_grid.empty() || options.gamma_grid.empty()) {
    throw std::invalid_argument("sweep needs non-empty m, Q and gamma grids");
  }
  const int max_q = *std::max_element(options.q_grid.begin(), options.q_grid.end());

  const auto negatives = generate_batch(lm, &model, cfg, Policy::None, options.generation);

  std::vector<SweepRow> rows;
  for (const int m : options.m_grid) {
    WatermarkConfig m_cfg = cfg;
    m_cfg.m = m;

    auto positives = generate_batch(lm, &model, m_cfg, Policy::Semamark, options.generation);
    if (options.attack.kind != AttackKind::None && options.attack.rate > 0.0) {
      positives = attack_batch(positives, options.attack, lm,
                               derive_seed(derive_seed(options.generation.seed, 0x577ee9), m),
                               options.generation.threads);
    }

    // One offset table per sequence, shared by every (Q, gamma) cell.
    std::vector<std::vector<GreenCount>> pos_tables(positives.size());
    std::vector<std::vector<GreenCount>> neg_tables(negatives.size());
    parallel_for(positives.size(), options.generation.threads, [&](std::size_t i) {
      pos_tables[i] =
          count_green_all_offsets(positives[i], max_q, &model, lm, m_cfg, Policy::Semamark);
    });
    parallel_for(negatives.size(), options.generation.threads, [&](std::size_t i) {
      neg_tables[i] =
          count_green_all_offsets(negatives[i], max_q, &model, lm, m_cfg, Policy::Semamark);
    });

    for (const int q : options.q_grid) {
      for (const double gamma : options.gamma_grid) {
        std::vector<double> pos_z;
        pos_z.reserve(pos_tables.size());
        for (const auto& table : pos_tables) {
          pos_z.push_back(best_offset_z(table, max_q, q, gamma, Policy::Semamark).z);
        }
        std::vector<double> neg_z;
        neg_z.reserve(neg_tables.size());
        for (const auto& table : neg_tables) {
          neg_z.push_back(best_offset_z(table, max_q, q, gamma, Policy::Semamark).z);
        }
        SweepRow row;
        row.m = m;
        row.Q = q;
        row.gamma_detect = gamma;
        row.metrics = compute_metrics(pos_z, neg_z);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::string& path, std::span<const SweepRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open sweep output: " + path);
  }
  out << "m,Q,gamma_detect,auc,f1,threshold,n_pos,n_neg\n";
  for (const auto& row : rows) {
    out << row.m << ',' << row.Q << ',' << format_double(row.gamma_detect) << ','
        << format_double(row.metrics.roc_auc) << ',' << format_double(row.metrics.f1_best)
        << ',' << format_double(row.metrics.best_threshold) << ',' << row.metrics.n_pos
        << ',' << row.metrics.n_neg << '\n';
  }
}

}  // namespace semamark

// scratch: joint preview of uniformity + detection criteria
#include <chrono>
#include <algorithm>
#include <set>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include "semamark/density.hpp"
#include "semamark/lm.hpp"
#include "semamark/pipeline.hpp"
#include "semamark/semantic.hpp"
#include "semamark/training.hpp"

using namespace semamark;

int main(int argc, char** argv) {
  TrainingConfig tcfg;
  tcfg.learning_rate = argc > 1 ? std::atof(argv[1]) : 1e-2;
  tcfg.steps = argc > 2 ? std::atoi(argv[2]) : 2000;
  tcfg.tau = argc > 3 ? std::atof(argv[3]) : 0.7;
  tcfg.sigma = argc > 4 ? std::atof(argv[4]) : 0.05;
  const std::uint64_t lm_seed = argc > 5 ? std::strtoull(argv[5], nullptr, 10) : 11;
  tcfg.rng_seed = argc > 6 ? std::strtoull(argv[6], nullptr, 10) : 7;
  if (argc > 10) tcfg.batch_size = std::atoi(argv[10]);
  const int n_seq = argc > 7 ? std::atoi(argv[7]) : 150;
  const double conc = argc > 8 ? std::atof(argv[8]) : 2.0;

  const MockLM lm = build_mock_lm(lm_seed, 1000, 64, conc);
  std::printf("entropy: %.2f nats\n", mean_next_token_entropy(lm));
  const int n_corpus = argc > 9 ? std::atoi(argv[9]) : 300;
  const auto corpus = rollout_corpus(lm, n_corpus, 180, 220, 2024, 8);
  WatermarkConfig cfg;
  cfg.sigma = tcfg.sigma;
  cfg.tau = tcfg.tau;

  const NERingModel init = NERingModel::init(64, 100);
  auto t0 = std::chrono::steady_clock::now();
  const auto trained = train(corpus, lm, init, tcfg, cfg);
  std::printf("train: %.0f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  const NERingModel& model = trained.model;

  auto windows = collect_pooled_windows(corpus, cfg.m, lm, 50000, 1);
  const auto dens = ring_density(model, windows, 0.2);
  std::printf("uniformity: %.4f\n", dens.uniformity_ratio);
  {
    std::printf("density bins:");
    for (int b = 0; b < 36; ++b) {
      double acc = 0.0;
      for (int j = 0; j < 10; ++j) acc += dens.density[static_cast<std::size_t>(b * 10 + j)];
      std::printf(" %.0f", acc * 1000.0 / 10.0);
    }
    std::printf("\n");
  }

  GenerationParams params;
  params.n_sequences = n_seq;
  params.seed = 31415;
  params.threads = 8;

  EvalOptions opts;
  opts.generation = params;
  AttackConfig none;
  AttackConfig sub;  sub.kind = AttackKind::Substitute;  sub.rate = 0.15; sub.neighbor_k = 5;
  AttackConfig ins;  ins.kind = AttackKind::InsertDelete; ins.rate = 0.1;
  opts.attacks = {none, sub, ins};
  const auto report = eval_run(lm, &model, cfg, opts);
  for (const auto& row : report.rows) {
    std::printf("%-9s %-13s rate=%.2f Q=%-2d auc=%.4f f1=%.4f\n",
                to_string(row.policy).c_str(), to_string(row.attack).c_str(), row.rate,
                row.offset_q, row.metrics.roc_auc, row.metrics.f1_best);
  }

  // seed-stream smoothness: adjacent-value agreement and mean run length
  {
    const auto wm3 = generate_batch(lm, &model, cfg, Policy::Semamark, params);
    long same = 0, adjacent = 0, run_count = 0, positions = 0;
    for (const auto& s3 : wm3) {
      int prev = -1;
      for (int i = std::max(1, s3.prompt_len); i < s3.length(); ++i) {
        const int value = semantic_value_at(s3.tokens, i, lm, model, cfg);
        ++positions;
        if (prev >= 0) {
          ++adjacent;
          same += value == prev ? 1 : 0;
        }
        if (value != prev) {
          ++run_count;
        }
        prev = value;
      }
    }
    std::printf("adjacent same-value rate: %.3f mean run: %.2f\n",
                static_cast<double>(same) / adjacent,
                static_cast<double>(positions) / run_count);
  }

  // null z spread at Q=0 (gamma_detect)
  {
    WatermarkConfig qcfg = cfg;
    qcfg.Q = 0;
    const auto nulls = generate_batch(lm, &model, cfg, Policy::None, params);
    const auto res = detect_batch(nulls, &model, lm, qcfg, Policy::Semamark, 8);
    double mean = 0.0, var = 0.0;
    for (const auto& r2 : res) mean += r2.z;
    mean /= res.size();
    for (const auto& r2 : res) var += (r2.z - mean) * (r2.z - mean);
    std::printf("null z: mean %.2f std %.2f\n", mean, std::sqrt(var / res.size()));
  }

  // seed survival under substitution + watermarked green fraction
  {
    AttackConfig sub2 = sub;
    const auto wm2 = generate_batch(lm, &model, cfg, Policy::Semamark, params);
    long green = 0, total = 0;
    for (const auto& s2 : wm2) {
      green += s2.provenance["gen_green_count"].get<long>();
      total += s2.length() - s2.prompt_len;
    }
    std::printf("gen green fraction: %.3f\n", static_cast<double>(green) / total);
    const auto att = attack_batch(wm2, sub2, lm, 4242, 8);
    long sema_keep = 0, left_keep = 0, positions = 0;
    for (std::size_t si = 0; si < att.size(); ++si) {
      const auto& a = wm2[si];
      const auto& b = att[si];
      for (int i = a.prompt_len; i < a.length(); ++i) {
        ++positions;
        sema_keep += semantic_value_at(a.tokens, i, lm, model, cfg) ==
                             semantic_value_at(b.tokens, i, lm, model, cfg)
                         ? 1 : 0;
        left_keep += lefthash_seed(a.tokens[i - 1], cfg.key) ==
                             lefthash_seed(b.tokens[i - 1], cfg.key)
                         ? 1 : 0;
      }
    }
    std::printf("seed survival: semantic %.3f lefthash %.3f\n",
                static_cast<double>(sema_keep) / positions,
                static_cast<double>(left_keep) / positions);
  }

  // criterion-5 view: clean semamark at Q = 0, with outlier forensics
  {
    WatermarkConfig qcfg = cfg;
    qcfg.Q = 0;
    const auto wm4 = generate_batch(lm, &model, cfg, Policy::Semamark, params);
    const auto neg4 = generate_batch(lm, &model, cfg, Policy::None, params);
    auto pos_r = detect_batch(wm4, &model, lm, qcfg, Policy::Semamark, 8);
    auto neg_r = detect_batch(neg4, &model, lm, qcfg, Policy::Semamark, 8);
    auto pos_z = z_scores(pos_r);
    auto neg_z = z_scores(neg_r);
    std::printf("clean Q0 auc=%.4f\n", compute_metrics(pos_z, neg_z).roc_auc);
    std::sort(pos_z.begin(), pos_z.end());
    std::sort(neg_z.begin(), neg_z.end());
    std::printf("pos z low: %.2f %.2f %.2f %.2f | neg z high: %.2f %.2f %.2f %.2f\n",
                pos_z[0], pos_z[1], pos_z[2], pos_z[3], neg_z[neg_z.size() - 1],
                neg_z[neg_z.size() - 2], neg_z[neg_z.size() - 3], neg_z[neg_z.size() - 4]);
    // forensic dump of the weakest positive and hottest null
    const auto raw_pos = detect_batch(wm4, &model, lm, qcfg, Policy::Semamark, 8);
    std::size_t worst = 0;
    for (std::size_t k = 0; k < raw_pos.size(); ++k) {
      if (raw_pos[k].z < raw_pos[worst].z) worst = k;
    }
    const auto& wseq = wm4[worst];
    std::set<TokenId> distinct(wseq.tokens.begin(), wseq.tokens.end());
    std::printf("worst pos: z=%.2f gen_green=%ld/%d distinct_tokens=%zu\n",
                raw_pos[worst].z, wseq.provenance["gen_green_count"].get<long>(),
                wseq.length() - wseq.prompt_len, distinct.size());
    const auto raw_neg = detect_batch(neg4, &model, lm, qcfg, Policy::Semamark, 8);
    std::size_t hot = 0;
    for (std::size_t k = 0; k < raw_neg.size(); ++k) {
      if (raw_neg[k].z > raw_neg[hot].z) hot = k;
    }
    std::set<TokenId> distinct_n(neg4[hot].tokens.begin(), neg4[hot].tokens.end());
    std::printf("hot null: z=%.2f distinct_tokens=%zu len=%d\n", raw_neg[hot].z,
                distinct_n.size(), neg4[hot].length());
  }

  // Q-offset benefit on insert/delete (criterion 7 preview)
  const auto wm = generate_batch(lm, &model, cfg, Policy::Semamark, params);
  const auto attacked = attack_batch(wm, ins, lm, 99, 8);
  const auto negatives = generate_batch(lm, &model, cfg, Policy::None, params);
  for (int Q : {0, 5, 10, 15}) {
    WatermarkConfig qcfg = cfg;
    qcfg.Q = Q;
    const auto pos_r = detect_batch(attacked, &model, lm, qcfg, Policy::Semamark, 8);
    const auto neg_r = detect_batch(negatives, &model, lm, qcfg, Policy::Semamark, 8);
    std::printf("insdel Q=%-2d auc=%.4f\n", Q,
                compute_metrics(z_scores(pos_r), z_scores(neg_r)).roc_auc);
  }
  return 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>

#include "semamark/attack.hpp"
#include "semamark/density.hpp"
#include "semamark/metrics.hpp"
#include "semamark/pipeline.hpp"
#include "semamark/sensitivity.hpp"

using namespace semamark;

namespace {

struct AttackFixture {
  MockLM lm = build_mock_lm(71, 300, 16, 2.0);

  // prompt_len = 0 marks every position attackable (the attacks only read
  // prompt_len, generation itself always needs one context token)
  TokenSequence rollout(std::uint64_t seed, int length, int prompt_len = 10) const {
    Rng64 rng(seed);
    std::vector<TokenId> prompt;
    for (int i = 0; i < std::max(1, prompt_len); ++i) {
      prompt.push_back(static_cast<TokenId>(rng.bounded(300)));
    }
    WatermarkConfig cfg;
    TokenSequence seq = generate(lm, prompt, length, Policy::None, nullptr, cfg, rng);
    seq.prompt_len = prompt_len;
    return seq;
  }
};

TokenId brute_force_nearest(const MockLM& lm, TokenId token) {
  const auto center = lm.token_embedding(token);
  double best = std::numeric_limits<double>::infinity();
  TokenId arg = -1;
  for (TokenId t = 0; t < lm.vocab_size(); ++t) {
    if (t == token) {
      continue;
    }
    const auto e = lm.token_embedding(t);
    double d2 = 0.0;
    for (std::size_t c = 0; c < e.size(); ++c) {
      d2 += (e[c] - center[c]) * (e[c] - center[c]);
    }
    if (d2 < best) {
      best = d2;
      arg = t;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("substitute attack identity and full-replacement limits") {
  const AttackFixture fx;
  const auto seq = fx.rollout(1, 80);

  AttackConfig none;
  none.kind = AttackKind::Substitute;
  none.rate = 0.0;
  const auto untouched = substitute_attack(seq, none, fx.lm);
  CHECK(untouched.tokens == seq.tokens);
  CHECK(untouched.label == seq.label);

  AttackConfig full;
  full.kind = AttackKind::Substitute;
  full.rate = 1.0;
  full.neighbor_k = 1;
  full.rng_seed = 5;
  const auto replaced = substitute_attack(seq, full, fx.lm);
  CHECK(replaced.label == Label::Attacked);
  for (int i = 0; i < seq.prompt_len; ++i) {
    CHECK(replaced.tokens[static_cast<std::size_t>(i)] ==
          seq.tokens[static_cast<std::size_t>(i)]);
  }
  for (int i = seq.prompt_len; i < seq.length(); ++i) {
    CHECK(replaced.tokens[static_cast<std::size_t>(i)] ==
          brute_force_nearest(fx.lm, seq.tokens[static_cast<std::size_t>(i)]));
  }
}

TEST_CASE("substitute attack is deterministic and hits the requested rate") {
  const AttackFixture fx;
  const auto seq = fx.rollout(2, 200, 0);

  AttackConfig cfg;
  cfg.kind = AttackKind::Substitute;
  cfg.rate = 0.15;
  cfg.neighbor_k = 5;
  cfg.rng_seed = 99;
  const auto once = substitute_attack(seq, cfg, fx.lm);
  const auto twice = substitute_attack(seq, cfg, fx.lm);
  CHECK(once.tokens == twice.tokens);

  NeighborCache cache(fx.lm, cfg.neighbor_k);
  double replaced_total = 0.0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const auto attacked = substitute_attack(seq, cfg, fx.lm, &cache);
    int replaced = 0;
    for (int i = 0; i < seq.length(); ++i) {
      replaced += attacked.tokens[static_cast<std::size_t>(i)] !=
                          seq.tokens[static_cast<std::size_t>(i)]
                      ? 1
                      : 0;
    }
    replaced_total += replaced / static_cast<double>(seq.length());
  }
  CHECK(std::abs(replaced_total / trials - 0.15) < 0.01);
}

TEST_CASE("insert delete attack identity, bounds and determinism") {
  const AttackFixture fx;
  const auto seq = fx.rollout(3, 200);

  AttackConfig cfg;
  cfg.kind = AttackKind::InsertDelete;
  cfg.rate = 0.0;
  CHECK(insert_delete_attack(seq, cfg, fx.lm).tokens == seq.tokens);

  cfg.rate = 0.6;
  CHECK_THROWS_AS(insert_delete_attack(seq, cfg, fx.lm), std::invalid_argument);

  cfg.rate = 0.1;
  cfg.rng_seed = 17;
  const auto a = insert_delete_attack(seq, cfg, fx.lm);
  const auto b = insert_delete_attack(seq, cfg, fx.lm);
  CHECK(a.tokens == b.tokens);
  CHECK(a.label == Label::Attacked);
  for (int i = 0; i < seq.prompt_len; ++i) {
    CHECK(a.tokens[static_cast<std::size_t>(i)] == seq.tokens[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("insert delete length stays concentrated around the original") {
  const AttackFixture fx;
  const auto seq = fx.rollout(4, 200, 0);
  AttackConfig cfg;
  cfg.kind = AttackKind::InsertDelete;
  cfg.rate = 0.1;

  const int trials = 500;
  int within = 0;
  double mean_len = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const int len = insert_delete_attack(seq, cfg, fx.lm).length();
    mean_len += len;
    if (len >= 180 && len <= 220) {
      ++within;
    }
  }
  mean_len /= trials;
  CHECK(within >= static_cast<int>(0.95 * trials));
  CHECK(std::abs(mean_len - 200.0) < 2.0);  // symmetric insert/delete rates
}

TEST_CASE("roc auc frozen examples") {
  const std::vector<double> sep_pos = {5.0, 6.0, 7.0};
  const std::vector<double> sep_neg = {1.0, 2.0};
  CHECK(roc_auc(sep_pos, sep_neg) == 1.0);

  const std::vector<double> same = {0.5, 1.5, 2.5};
  CHECK(roc_auc(same, same) == 0.5);

  const std::vector<double> pos = {3.0, 1.0};
  const std::vector<double> neg = {2.0, 0.0};
  CHECK(roc_auc(pos, neg) == doctest::Approx(0.75).epsilon(1e-12));

  CHECK_THROWS_AS(roc_auc({}, sep_neg), std::invalid_argument);
}

TEST_CASE("roc auc symmetry and rank invariance") {
  Rng64 rng(31);
  std::vector<double> pos(40);
  std::vector<double> neg(55);
  for (auto& v : pos) {
    v = rng.gaussian() + 0.8;
  }
  for (auto& v : neg) {
    v = rng.gaussian();
  }
  CHECK(roc_auc(pos, neg) + roc_auc(neg, pos) == doctest::Approx(1.0).epsilon(1e-12));

  auto transformed = [](std::vector<double> v) {
    for (auto& x : v) {
      x = std::exp(0.7 * x) + 3.0;  // strictly increasing
    }
    return v;
  };
  CHECK(roc_auc(transformed(pos), transformed(neg)) ==
        doctest::Approx(roc_auc(pos, neg)).epsilon(1e-12));
}

TEST_CASE("f1 best threshold frozen examples") {
  const std::vector<double> sep_pos = {5.0, 6.0};
  const std::vector<double> sep_neg = {1.0, 2.0};
  const auto sep = f1_best_threshold(sep_pos, sep_neg);
  CHECK(sep.f1 == 1.0);
  CHECK(sep.threshold == 5.0);

  const std::vector<double> one = {1.0};
  const auto tied = f1_best_threshold(one, one);
  CHECK(tied.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(tied.threshold == 1.0);

  CHECK_THROWS_AS(f1_best_threshold({}, one), std::invalid_argument);
}

TEST_CASE("f1 is invariant under positive scaling") {
  Rng64 rng(33);
  std::vector<double> pos(30);
  std::vector<double> neg(30);
  for (auto& v : pos) {
    v = rng.gaussian() + 1.0;
  }
  for (auto& v : neg) {
    v = rng.gaussian();
  }
  const auto base = f1_best_threshold(pos, neg);
  std::vector<double> pos2 = pos;
  std::vector<double> neg2 = neg;
  for (auto& v : pos2) {
    v *= 2.5;
  }
  for (auto& v : neg2) {
    v *= 2.5;
  }
  const auto scaled = f1_best_threshold(pos2, neg2);
  CHECK(scaled.f1 == doctest::Approx(base.f1).epsilon(1e-12));
  CHECK(scaled.threshold == doctest::Approx(base.threshold * 2.5).epsilon(1e-12));
}

TEST_CASE("ring density of synthetic uniform angles is flat") {
  Rng64 rng(35);
  std::vector<double> angles(100000);
  for (auto& a : angles) {
    a = rng.uniform01() * 2.0 * std::numbers::pi;
  }
  const auto density = ring_density_from_angles(angles, 0.2);
  CHECK(density.uniformity_ratio < 1.05);
  CHECK_FALSE(density.degenerate);

  double integral = 0.0;
  for (double v : density.density) {
    integral += v;
  }
  integral *= 2.0 * std::numbers::pi / static_cast<double>(density.density.size());
  CHECK(std::abs(integral - 1.0) < 1e-6);
}

TEST_CASE("ring density flags a point mass as degenerate") {
  const std::vector<double> angles(2000, 1.234);
  const auto density = ring_density_from_angles(angles, 0.05);
  CHECK(density.degenerate);
  CHECK(density.uniformity_ratio > 100.0);
}

TEST_CASE("ring density validates its inputs") {
  const NERingModel model = NERingModel::init(8, 3);
  std::vector<PooledEmbedding> few(10, PooledEmbedding{std::vector<double>(8, 0.1), 1});
  CHECK_THROWS_AS(ring_density(model, few, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(ring_density_from_angles(std::vector<double>(5, 0.0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("sensitivity experiment with zero perturbation is exact") {
  const AttackFixture fx;
  const NERingModel model = NERingModel::init(16, 5);
  const auto corpus = rollout_corpus(fx.lm, 10, 60, 60, 7);
  const auto pool = collect_pooled_windows(corpus, 8, fx.lm);
  const SecretKey key = SecretKey::from_string("sensitivity-test-key-00000000000");
  const auto result = sensitivity_experiment(200, 0.0, model, key, 300, 0.25, 5, pool, 3);
  CHECK(result.overlap_hash == 1.0);
  CHECK(result.overlap_discrete == 1.0);
  CHECK_THROWS_AS(sensitivity_experiment(50, 0.0, model, key, 300, 0.25, 5, pool, 3),
                  std::invalid_argument);
}

TEST_CASE("mean nll basics") {
  const AttackFixture fx;

  // near-deterministic model: sampled continuations sit at the mode
  const MockLM peaky = build_mock_lm(73, 100, 16, 40.0);
  const auto greedy = rollout_corpus(peaky, 10, 80, 80, 11);
  CHECK(mean_nll(peaky, greedy) < 0.25);

  // zero-delta equivalence carries over to NLL
  const NERingModel model = NERingModel::init(16, 6);
  WatermarkConfig cfg;
  cfg.key = SecretKey::from_string("nll-test-key-00000000000000000000");
  cfg.delta = 0.0;
  GenerationParams params;
  params.n_sequences = 20;
  params.prompt_len = 5;
  params.min_new_tokens = 60;
  params.max_new_tokens = 60;
  params.seed = 13;
  const auto wm = generate_batch(fx.lm, &model, cfg, Policy::Semamark, params);
  const auto plain = generate_batch(fx.lm, &model, cfg, Policy::None, params);
  CHECK(mean_nll(fx.lm, wm) == mean_nll(fx.lm, plain));

  // positive delta tilts sampling away from the unbiased distribution
  cfg.delta = 2.0;
  const auto biased = generate_batch(fx.lm, &model, cfg, Policy::Semamark, params);
  CHECK(mean_nll(fx.lm, biased) >= mean_nll(fx.lm, plain));
}

TEST_CASE("eval csv row layout") {
  std::vector<EvalRow> rows(1);
  rows[0].policy = Policy::Semamark;
  rows[0].attack = AttackKind::Substitute;
  rows[0].rate = 0.15;
  rows[0].offset_q = 15;
  rows[0].metrics = {0.99, 0.97, 3.5, 500, 500};
  write_eval_csv("test_eval_rows.csv", rows);
  std::ifstream in("test_eval_rows.csv");
  std::string header;
  std::string line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == "policy,attack,rate,Q,auc,f1,threshold,n_pos,n_neg");
  CHECK(line.find("semamark,substitute,0.15") == 0);
  CHECK(line.find(",500,500") != std::string::npos);
  std::remove("test_eval_rows.csv");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <fstream>
#include <array>

#include "semamark/generate.hpp"
#include "semamark/lm.hpp"
#include "semamark/pipeline.hpp"

using namespace semamark;

namespace {

WatermarkConfig test_config() {
  WatermarkConfig cfg;
  cfg.key = SecretKey::from_string("generation-test-key-000000000000");
  cfg.m = 8;
  cfg.K = 5;
  cfg.Q = 5;
  return cfg;
}

}  // namespace

TEST_CASE("mock LM construction is deterministic") {
  const MockLM a = build_mock_lm(11, 100, 16, 2.0);
  const MockLM b = build_mock_lm(11, 100, 16, 2.0);
  CHECK(a.checksum() == b.checksum());
  CHECK(a.token_embedding(37) == b.token_embedding(37));
  const MockLM c = build_mock_lm(12, 100, 16, 2.0);
  CHECK(a.checksum() != c.checksum());
}

TEST_CASE("mock LM parameter validation") {
  CHECK_THROWS_AS(build_mock_lm(1, 10, 16, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_mock_lm(1, 100, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_mock_lm(1, 100, 16, 0.0), std::invalid_argument);
}

TEST_CASE("vanishing concentration approaches the uniform distribution") {
  const MockLM lm = build_mock_lm(5, 200, 16, 1e-6);
  CHECK(mean_next_token_entropy(lm) == doctest::Approx(std::log(200.0)).epsilon(1e-3));
}

TEST_CASE("production-scale mock LM entropy regime") {
  const MockLM lm = build_mock_lm(7, 1000, 64, 2.0);
  const double entropy = mean_next_token_entropy(lm);
  CHECK(entropy > 2.0);
  CHECK(entropy < 6.5);
}

TEST_CASE("bigram property: logits depend only on the last token") {
  const MockLM lm = build_mock_lm(19, 100, 16, 2.0);
  const std::vector<TokenId> ctx_a = {5, 9, 32};
  const std::vector<TokenId> ctx_b = {71, 32};
  CHECK(lm.next_logits(ctx_a) == lm.next_logits(ctx_b));
}

TEST_CASE("sample_token picks the dominant logit") {
  std::vector<double> logits(50, -100.0);
  logits[17] = 100.0;
  Rng64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    CHECK(sample_token(logits, 1.0, rng) == 17);
  }
}

TEST_CASE("sample_token matches uniform frequencies") {
  const std::vector<double> logits(4, 0.0);
  Rng64 rng(2);
  std::array<int, 4> counts{};
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    counts[static_cast<std::size_t>(sample_token(logits, 1.0, rng))]++;
  }
  for (int c : counts) {
    CHECK(std::abs(c / static_cast<double>(draws) - 0.25) < 0.01);
  }
}

TEST_CASE("sample_token reproducibility and errors") {
  const std::vector<double> logits = {0.1, 1.2, -0.3, 0.8, 2.0};
  Rng64 a(3);
  Rng64 b(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_token(logits, 1.0, a) == sample_token(logits, 1.0, b));
  }
  const std::vector<double> all_neg_inf(4, -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(sample_token(all_neg_inf, 1.0, a), std::invalid_argument);
  CHECK_THROWS_AS(sample_token(logits, 0.0, a), std::invalid_argument);
}

TEST_CASE("zero delta generation is bit-identical to the unwatermarked stream") {
  const MockLM lm = build_mock_lm(23, 200, 16, 2.0);
  const NERingModel model = NERingModel::init(16, 8);
  WatermarkConfig cfg = test_config();
  cfg.delta = 0.0;

  const std::vector<TokenId> prompt = {3, 141, 59};
  for (Policy policy : {Policy::Semamark, Policy::Lefthash}) {
    Rng64 rng_wm(99);
    Rng64 rng_plain(99);
    const auto wm = generate(lm, prompt, 120, policy, &model, cfg, rng_wm);
    const auto plain = generate(lm, prompt, 120, Policy::None, nullptr, cfg, rng_plain);
    CHECK(wm.tokens == plain.tokens);
  }
}

TEST_CASE("generation is deterministic given the rng seed") {
  const MockLM lm = build_mock_lm(29, 200, 16, 2.0);
  const NERingModel model = NERingModel::init(16, 9);
  const WatermarkConfig cfg = test_config();
  const std::vector<TokenId> prompt = {17};
  Rng64 a(5);
  Rng64 b(5);
  const auto first = generate(lm, prompt, 80, Policy::Semamark, &model, cfg, a);
  const auto second = generate(lm, prompt, 80, Policy::Semamark, &model, cfg, b);
  CHECK(first.tokens == second.tokens);
  CHECK(first.provenance["green_pattern"] == second.provenance["green_pattern"]);
}

TEST_CASE("generation never leaves the vocabulary and labels its output") {
  const MockLM lm = build_mock_lm(31, 150, 16, 2.0);
  const NERingModel model = NERingModel::init(16, 10);
  const WatermarkConfig cfg = test_config();
  Rng64 rng(6);
  const std::vector<TokenId> prompt = {2, 4};
  const auto seq = generate(lm, prompt, 100, Policy::Semamark, &model, cfg, rng);
  CHECK(seq.label == Label::WatermarkedSemamark);
  CHECK(seq.prompt_len == 2);
  CHECK(seq.length() == 102);
  for (TokenId t : seq.tokens) {
    CHECK(t >= 0);
    CHECK(t < 150);
  }
  const std::string pattern = seq.provenance["green_pattern"].get<std::string>();
  CHECK(pattern.size() == 100);
  long ones = 0;
  for (char c : pattern) {
    ones += c == '1' ? 1 : 0;
  }
  CHECK(seq.provenance["gen_green_count"].get<long>() == ones);
}

TEST_CASE("generation input validation") {
  const MockLM lm = build_mock_lm(37, 100, 16, 2.0);
  const WatermarkConfig cfg = test_config();
  Rng64 rng(7);
  CHECK_THROWS_AS(generate(lm, {}, 10, Policy::None, nullptr, cfg, rng),
                  std::invalid_argument);
  const std::vector<TokenId> prompt = {1};
  CHECK_THROWS_AS(generate(lm, prompt, 0, Policy::None, nullptr, cfg, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate(lm, prompt, 10, Policy::Semamark, nullptr, cfg, rng),
                  std::invalid_argument);
  const std::vector<TokenId> bad_prompt = {512};
  CHECK_THROWS_AS(generate(lm, bad_prompt, 10, Policy::None, nullptr, cfg, rng),
                  std::invalid_argument);
}

TEST_CASE("green fraction grows monotonically with delta") {
  const MockLM lm = build_mock_lm(41, 300, 24, 2.0);
  const NERingModel model = NERingModel::init(24, 11);
  GenerationParams params;
  params.n_sequences = 200;
  params.prompt_len = 5;
  params.min_new_tokens = 120;
  params.max_new_tokens = 120;
  params.seed = 404;
  params.threads = 4;

  double previous = -1.0;
  for (double delta : {0.0, 1.0, 2.0, 4.0}) {
    WatermarkConfig cfg = test_config();
    cfg.delta = delta;
    const auto batch = generate_batch(lm, &model, cfg, Policy::Semamark, params);
    long green = 0;
    long total = 0;
    for (const auto& seq : batch) {
      green += seq.provenance["gen_green_count"].get<long>();
      total += seq.length() - seq.prompt_len;
    }
    const double fraction = static_cast<double>(green) / static_cast<double>(total);
    if (delta == 0.0) {
      CHECK(std::abs(fraction - 0.25) < 0.02);  // unbiased baseline at gamma_gen
    }
    CHECK(fraction >= previous - 0.005);
    previous = fraction;
  }
  CHECK(previous > 0.30);  // delta = 4 boost is far above the base rate
}

TEST_CASE("jsonl round trip preserves sequences") {
  const MockLM lm = build_mock_lm(43, 100, 16, 2.0);
  const auto corpus = rollout_corpus(lm, 5, 30, 40, 99);
  write_jsonl("test_seqs.jsonl", corpus);
  const auto loaded = read_jsonl("test_seqs.jsonl");
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].tokens == corpus[i].tokens);
    CHECK(loaded[i].prompt_len == corpus[i].prompt_len);
    CHECK(loaded[i].label == corpus[i].label);
  }
  std::remove("test_seqs.jsonl");
}

TEST_CASE("jsonl reader reports malformed lines and continues") {
  {
    std::ofstream out("test_bad.jsonl", std::ios::binary);
    out << R"({"tokens":[1,2,3],"prompt_len":1,"label":"unwatermarked"})" << "\n";
    out << "this is not json\n";
    out << R"({"tokens":[4,5],"prompt_len":9,"label":"unwatermarked"})" << "\n";
    out << R"({"tokens":[6],"prompt_len":0,"label":"attacked"})" << "\n";
  }
  std::vector<std::string> errors;
  const auto seqs = read_jsonl("test_bad.jsonl", &errors);
  CHECK(seqs.size() == 2);
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].find("line 2") == 0);
  CHECK(errors[1].find("line 3") == 0);
  std::remove("test_bad.jsonl");
}

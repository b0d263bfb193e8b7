#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <cstdio>
#include <numbers>

#include "helpers.hpp"
#include "semamark/lm.hpp"
#include "semamark/pipeline.hpp"
#include "semamark/training.hpp"

using namespace semamark;
using namespace semamark::testing;

TEST_CASE("soft augment shrinks to the identity with vanishing sigma") {
  Rng64 rng(1);
  const auto batch = random_batch(8, 16, 1.0, rng);
  Rng64 aug_rng(2);
  const auto tiny = soft_augment(batch.anchors, 1e-12, aug_rng);
  for (std::size_t j = 0; j < tiny.anchors.size(); ++j) {
    for (std::size_t c = 0; c < tiny.anchors[j].values.size(); ++c) {
      CHECK(std::abs(tiny.augmented[j].values[c] - tiny.anchors[j].values[c]) < 1e-9);
    }
  }
}

TEST_CASE("soft augment is deterministic per seed") {
  Rng64 rng(3);
  const auto base = random_batch(4, 8, 1.0, rng);
  Rng64 a(42);
  Rng64 b(42);
  const auto first = soft_augment(base.anchors, 0.3, a);
  const auto second = soft_augment(base.anchors, 0.3, b);
  for (std::size_t j = 0; j < first.augmented.size(); ++j) {
    CHECK(first.augmented[j].values == second.augmented[j].values);
  }
  CHECK_THROWS_AS(soft_augment(base.anchors, 0.0, a), std::invalid_argument);
}

TEST_CASE("soft augment noise has the requested scale") {
  const int b = 256;
  const int d = 64;
  std::vector<PooledEmbedding> anchors(b);
  Rng64 rng(9);
  for (auto& a : anchors) {
    a.window_length = 1;
    a.values.resize(d);
    for (auto& v : a.values) {
      v = rng.gaussian();
    }
  }
  Rng64 aug_rng(10);
  const auto batch = soft_augment(anchors, 0.1, aug_rng);

  double sum = 0.0;
  double sum_sq = 0.0;
  const double n = static_cast<double>(b) * d;
  for (int j = 0; j < b; ++j) {
    for (int c = 0; c < d; ++c) {
      const double diff = batch.augmented[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(c)] -
                          batch.anchors[static_cast<std::size_t>(j)].values[static_cast<std::size_t>(c)];
      sum += diff;
      sum_sq += diff * diff;
    }
  }
  const double stddev = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
  CHECK(stddev >= 0.095);
  CHECK(stddev <= 0.105);
}

TEST_CASE("contrastive loss closed-form cases") {
  // B = 1: the denominator holds exactly the positive term.
  std::vector<RingPoint> pair = {{1.0, 0.0, 0.0}, {0.0, 1.0, std::numbers::pi / 2}};
  CHECK(contrastive_loss(pair, 0.2) == 0.0);

  // B = 2, all four points identical: every similarity equals 1, so the
  // fraction is 1 / (2B - 1) and the loss is log 3 independent of tau.
  std::vector<RingPoint> same(4, RingPoint{1.0, 0.0, 0.0});
  CHECK(contrastive_loss(same, 0.2) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(contrastive_loss(same, 0.7) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("contrastive loss is non-negative on random batches") {
  Rng64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = 1 + rng.bounded(8);
    std::vector<RingPoint> points(2 * b);
    for (auto& p : points) {
      const double phi = rng.uniform01() * 2.0 * std::numbers::pi;
      p = {std::cos(phi), std::sin(phi), phi};
    }
    CHECK(contrastive_loss(points, 0.2) >= 0.0);
  }
}

TEST_CASE("contrastive loss is rotation invariant") {
  Rng64 rng(6);
  std::vector<double> phis(12);
  for (auto& phi : phis) {
    phi = rng.uniform01() * 2.0 * std::numbers::pi;
  }
  auto make_points = [&](double shift) {
    std::vector<RingPoint> points;
    for (double phi : phis) {
      const double a = std::fmod(phi + shift, 2.0 * std::numbers::pi);
      points.push_back({std::cos(a), std::sin(a), a});
    }
    return points;
  };
  const double base = contrastive_loss(make_points(0.0), 0.2);
  for (double shift : {0.3, 1.7, 4.4}) {
    CHECK(contrastive_loss(make_points(shift), 0.2) ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("contrastive loss rejects non-unit points") {
  std::vector<RingPoint> points = {{1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}};
  CHECK_THROWS_AS(contrastive_loss(points, 0.2), std::invalid_argument);
}

TEST_CASE("gradient is zero for the B = 1 constant loss") {
  NERingModel model = NERingModel::init(8, 13, 6, 4);
  Rng64 rng(7);
  const auto batch = random_batch(1, 8, 1.0, rng);
  double loss = 1.0;
  const auto grads = loss_gradient(model, batch, 0.2, &loss);
  CHECK(loss == 0.0);
  for (const auto& layer : grads) {
    for (double g : layer.w) {
      CHECK(std::abs(g) < 1e-10);
    }
    for (double g : layer.b) {
      CHECK(std::abs(g) < 1e-10);
    }
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  NERingModel model = NERingModel::init(8, 29, 6, 4);
  Rng64 rng(8);
  const auto batch = random_batch(4, 8, 1.5, rng);
  const auto grads = loss_gradient(model, batch, 0.2);

  const auto params = all_params(model);
  Rng64 pick(15);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const FlatParam& p = params[pick.bounded(params.size())];
    const double analytic = grad_entry(grads, p);
    const double fd = fd_gradient(model, batch, 0.2, p);
    worst = std::max(worst, gradient_error(analytic, fd));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("dead path has zero gradient") {
  NERingModel model = NERingModel::init(8, 31, 6, 4);
  // cut hidden unit 2 of the first layer out of the forward graph
  const int unit = 2;
  for (int r = 0; r < model.layers()[1].out; ++r) {
    model.layers()[1].w[static_cast<std::size_t>(r) * model.layers()[1].in + unit] = 0.0;
  }
  Rng64 rng(16);
  const auto batch = random_batch(4, 8, 1.0, rng);
  const auto grads = loss_gradient(model, batch, 0.2);
  // its incoming weights and bias receive no signal
  for (int c = 0; c < model.layers()[0].in; ++c) {
    CHECK(grads[0].w[static_cast<std::size_t>(unit) * model.layers()[0].in + c] == 0.0);
  }
  CHECK(grads[0].b[unit] == 0.0);
}

namespace {

std::vector<TokenSequence> tiny_corpus(const MockLM& lm, int n_sequences, int length) {
  return rollout_corpus(lm, n_sequences, length, length, 123);
}

}  // namespace

TEST_CASE("train with zero steps is the identity") {
  const MockLM lm = build_mock_lm(1, 100, 16, 1.0);
  const auto corpus = tiny_corpus(lm, 6, 40);
  const NERingModel init = NERingModel::init(16, 3, 12, 8);
  TrainingConfig cfg;
  cfg.steps = 0;
  WatermarkConfig wcfg;
  wcfg.m = 5;
  const auto result = train(corpus, lm, init, cfg, wcfg);
  CHECK(result.model == init);
  CHECK(result.loss_log.empty());
}

TEST_CASE("training is deterministic and reduces the loss") {
  const MockLM lm = build_mock_lm(2, 100, 16, 1.5);
  const auto corpus = tiny_corpus(lm, 10, 60);
  const NERingModel init = NERingModel::init(16, 4, 24, 12);
  TrainingConfig cfg;
  cfg.batch_size = 32;
  cfg.steps = 150;
  cfg.learning_rate = 0.02;
  cfg.rng_seed = 2024;
  WatermarkConfig wcfg;
  wcfg.m = 5;

  const auto a = train(corpus, lm, init, cfg, wcfg);
  const auto b = train(corpus, lm, init, cfg, wcfg);
  CHECK(a.model == b.model);
  CHECK(a.loss_log == b.loss_log);

  // byte-identical model files
  a.model.save("train_det_a.json");
  b.model.save("train_det_b.json");
  {
    std::ifstream fa("train_det_a.json", std::ios::binary);
    std::ifstream fb("train_det_b.json", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
  }
  std::remove("train_det_a.json");
  std::remove("train_det_b.json");

  // smoke: late loss below early loss
  const double early = a.loss_log[0];
  double late = 0.0;
  for (std::size_t i = a.loss_log.size() - 10; i < a.loss_log.size(); ++i) {
    late += a.loss_log[i];
  }
  late /= 10.0;
  CHECK(late < early);
}

TEST_CASE("training rejects an undersized corpus") {
  const MockLM lm = build_mock_lm(3, 100, 16, 1.0);
  const auto corpus = tiny_corpus(lm, 1, 20);
  const NERingModel init = NERingModel::init(16, 5, 12, 8);
  TrainingConfig cfg;
  cfg.batch_size = 64;
  cfg.steps = 1;
  WatermarkConfig wcfg;
  wcfg.m = 15;
  CHECK_THROWS_AS(train(corpus, lm, init, cfg, wcfg), std::invalid_argument);
}

TEST_CASE("trained standardization gives pooled windows unit RMS norm") {
  const MockLM lm = build_mock_lm(4, 120, 16, 1.5);
  const auto corpus = tiny_corpus(lm, 12, 60);
  const NERingModel init = NERingModel::init(16, 6, 12, 8);
  TrainingConfig cfg;
  cfg.batch_size = 16;
  cfg.steps = 1;
  WatermarkConfig wcfg;
  wcfg.m = 5;
  const auto result = train(corpus, lm, init, cfg, wcfg);
  CHECK(result.model.has_standardization());

  const auto windows = collect_pooled_windows(corpus, wcfg.m, lm);
  double total_sq = 0.0;
  for (const auto& w : windows) {
    const auto x = result.model.standardize(w.values);
    for (double v : x) {
      total_sq += v * v;
    }
  }
  CHECK(total_sq / static_cast<double>(windows.size()) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

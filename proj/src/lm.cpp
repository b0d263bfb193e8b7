#include "semamark/lm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace semamark {

namespace {

// Mock construction: every token owns a latent position z_t in a small
// latent space; transition logits follow a Gaussian kernel on the distance
// from a slightly rotated image of the current latent, plus idiosyncratic
// Gaussian texture, and the embedding table is a random linear image of the
// same latents. Sampling therefore drifts around the latent cloud in small
// steps, so consecutive windows share semantics, co-occurring tokens sit
// close in embedding space, and pooled windows move smoothly, which is the
// structure the semantic seed relies on in real text. The rotation keeps
// the walk ergodic: standing still is penalized and token cycles cannot
// persist, so no sequence parks on a single semantic value.
constexpr int kLatentRank = 4;
constexpr double kWalkWidth = 0.7;    // kernel width of the latent walk
constexpr double kLogitNoise = 1.0;   // absolute Gaussian texture on the kernel
constexpr double kOrbitStep = 0.04;  // per-step rotation of the kernel center
constexpr double kCollocationBonus = 4.5;  // fixed boost of the kernel-preferred successor
constexpr double kEscapeMass = 0.08;    // uniform floor of each transition row
constexpr double kEmbeddingNoise = 0.03;
constexpr int kMaxMockVocab = 16384;

}  // namespace

MockLM::MockLM(int vocab_size, int dim, std::uint64_t rng_seed, double concentration,
               std::vector<double> bigram_logits, std::vector<double> embeddings)
    : vocab_size_(vocab_size),
      dim_(dim),
      rng_seed_(rng_seed),
      concentration_(concentration),
      bigram_logits_(std::move(bigram_logits)),
      embeddings_(std::move(embeddings)) {
  const auto v = static_cast<std::size_t>(vocab_size_);
  if (bigram_logits_.size() != v * v || embeddings_.size() != v * static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("mock LM matrix dimensions inconsistent");
  }
}

EmbeddingVector MockLM::token_embedding(TokenId token) const {
  if (token < 0 || token >= vocab_size_) {
    throw std::invalid_argument("token id outside vocabulary");
  }
  const auto* row = embeddings_.data() + static_cast<std::size_t>(token) * dim_;
  return EmbeddingVector(row, row + dim_);
}

std::span<const double> MockLM::bigram_row(TokenId token) const {
  if (token < 0 || token >= vocab_size_) {
    throw std::invalid_argument("token id outside vocabulary");
  }
  return {bigram_logits_.data() + static_cast<std::size_t>(token) * vocab_size_,
          static_cast<std::size_t>(vocab_size_)};
}

std::vector<double> MockLM::next_logits(std::span<const TokenId> context) const {
  if (context.empty()) {
    throw std::invalid_argument("empty context");
  }
  const auto row = bigram_row(context.back());
  return std::vector<double>(row.begin(), row.end());
}

std::uint64_t MockLM::checksum() const {
  const std::uint64_t a =
      murmur3_x64_128(bigram_logits_.data(), bigram_logits_.size() * sizeof(double), 0x42).h1;
  return murmur3_x64_128(embeddings_.data(), embeddings_.size() * sizeof(double), a).h1;
}

MockLM build_mock_lm(std::uint64_t rng_seed, int vocab_size, int dim, double concentration) {
  if (vocab_size < 50) {
    throw std::invalid_argument("mock LM vocab_size must be at least 50");
  }
  if (vocab_size > kMaxMockVocab) {
    throw std::invalid_argument("mock LM vocab_size too large to materialize");
  }
  if (dim < 8) {
    throw std::invalid_argument("mock LM embedding dim must be at least 8");
  }
  if (!(concentration > 0.0)) {
    throw std::invalid_argument("concentration must be positive");
  }

  const auto v = static_cast<std::size_t>(vocab_size);
  const auto d = static_cast<std::size_t>(dim);
  const auto r = static_cast<std::size_t>(kLatentRank);
  Rng64 rng(rng_seed);

  // Latents uniform in a ball (not Gaussian): no sparse tail pockets where
  // a mutually-nearest token pair could form an absorbing cycle.
  std::vector<double> latent(v * r);
  const double ball_radius = std::sqrt(6.0);  // matches E|z|^2 = 4 of a 4-d Gaussian
  for (std::size_t i = 0; i < v; ++i) {
    double* zi = latent.data() + i * r;
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
      zi[k] = rng.gaussian();
      norm_sq += zi[k] * zi[k];
    }
    const double radius = ball_radius * std::pow(rng.uniform01(), 0.25);
    const double rescale = radius / std::sqrt(norm_sq);
    for (std::size_t k = 0; k < r; ++k) {
      zi[k] *= rescale;
    }
  }
  std::vector<double> map(d * r);
  for (auto& x : map) {
    x = rng.gaussian();
  }

  const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(kLatentRank));
  const double kernel_scale =
      1.0 / (2.0 * kWalkWidth * kWalkWidth * static_cast<double>(kLatentRank));

  // Kernel centers: each latent advanced along the orbit by one step, in
  // two incommensurate rotation planes so every token keeps moving.
  std::vector<double> center(v * r);
  const double c1 = std::cos(kOrbitStep);
  const double s1 = std::sin(kOrbitStep);
  const double c2 = std::cos(kOrbitStep * 1.618);
  const double s2 = std::sin(kOrbitStep * 1.618);
  for (std::size_t i = 0; i < v; ++i) {
    const double* zi = latent.data() + i * r;
    double* ci = center.data() + i * r;
    ci[0] = c1 * zi[0] - s1 * zi[1];
    ci[1] = s1 * zi[0] + c1 * zi[1];
    ci[2] = c2 * zi[2] - s2 * zi[3];
    ci[3] = s2 * zi[2] + c2 * zi[3];
  }

  std::vector<double> logits(v * v);
  for (std::size_t i = 0; i < v; ++i) {
    const double* ci = center.data() + i * r;
    double* row = logits.data() + i * v;
    for (std::size_t j = 0; j < v; ++j) {
      const double* zj = latent.data() + j * r;
      double dist_sq = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double diff = ci[k] - zj[k];
        dist_sq += diff * diff;
      }
      // tanh-bounded texture: no token pair can earn an unbeatable mutual
      // bonus, so noise hubs cannot form absorbing cycles
      row[j] = -concentration * dist_sq * kernel_scale +
               kLogitNoise * 2.0 * std::tanh(0.5 * rng.gaussian());
    }
    // collocation texture: the kernel-nearest successor gets a fixed bonus
    // large enough that a delta-sized boost rarely overrides it
    std::size_t preferred = i == 0 ? 1 : 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v; ++j) {
      if (j == i) {
        continue;
      }
      const double* zj = latent.data() + j * r;
      double dist_sq = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double diff = ci[k] - zj[k];
        dist_sq += diff * diff;
      }
      if (dist_sq < best_dist) {
        best_dist = dist_sq;
        preferred = j;
      }
    }
    row[preferred] += kCollocationBonus;

    // uniform mixture floor: every continuation keeps kEscapeMass / V
    // probability, bounding how long any local loop can persist
    double max_logit = row[0];
    for (std::size_t j = 1; j < v; ++j) {
      max_logit = std::max(max_logit, row[j]);
    }
    double z_norm = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      row[j] = std::exp(row[j] - max_logit);
      z_norm += row[j];
    }
    for (std::size_t j = 0; j < v; ++j) {
      row[j] = std::log((1.0 - kEscapeMass) * row[j] / z_norm +
                        kEscapeMass / static_cast<double>(v));
    }
  }

  std::vector<double> embeddings(v * d);
  for (std::size_t i = 0; i < v; ++i) {
    const double* zi = latent.data() + i * r;
    double* row = embeddings.data() + i * d;
    for (std::size_t c = 0; c < d; ++c) {
      const double* ac = map.data() + c * r;
      double dot = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        dot += ac[k] * zi[k];
      }
      row[c] = dot * inv_sqrt_r + kEmbeddingNoise * rng.gaussian();
    }
  }

  return MockLM(vocab_size, dim, rng_seed, concentration, std::move(logits),
                std::move(embeddings));
}

TokenId sample_token(std::span<const double> logits, double temperature, Rng64& rng) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  if (logits.empty()) {
    throw std::invalid_argument("empty logits");
  }

  double max_logit = -std::numeric_limits<double>::infinity();
  for (double x : logits) {
    if (x > max_logit) {
      max_logit = x;
    }
  }
  if (!std::isfinite(max_logit)) {
    throw std::invalid_argument("no finite logit to sample from");
  }

  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp((logits[i] - max_logit) / temperature);
    total += probs[i];
  }

  const double u = rng.uniform01() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
    }
    cumulative += probs[i];
    if (u < cumulative) {
      return static_cast<TokenId>(i);
    }
  }
  return static_cast<TokenId>(last_positive);  // float drift at u ~ total
}

double mean_next_token_entropy(const MockLM& lm) {
  const int v = lm.vocab_size();
  double total = 0.0;
  for (TokenId t = 0; t < v; ++t) {
    const auto row = lm.bigram_row(t);
    double max_logit = row[0];
    for (double x : row) {
      max_logit = std::max(max_logit, x);
    }
    double z = 0.0;
    double weighted = 0.0;
    for (double x : row) {
      const double e = std::exp(x - max_logit);
      z += e;
      weighted += e * (x - max_logit);
    }
    total += std::log(z) - weighted / z;
  }
  return total / static_cast<double>(v);
}

}  // namespace semamark

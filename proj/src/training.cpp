#include "semamark/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "semamark/format.hpp"
#include "semamark/pooling.hpp"

namespace semamark {

void TrainingConfig::validate() const {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("tau must be positive");
  }
  if (batch_size < 2) {
    throw std::invalid_argument("batch_size must be at least 2");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (steps < 0) {
    throw std::invalid_argument("steps must be non-negative");
  }
}

ContrastiveBatch soft_augment(std::span<const PooledEmbedding> anchors, double sigma,
                              Rng64& rng) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  ContrastiveBatch batch;
  batch.anchors.assign(anchors.begin(), anchors.end());
  batch.augmented.reserve(anchors.size());
  for (const auto& anchor : anchors) {
    PooledEmbedding noisy = anchor;
    for (auto& v : noisy.values) {
      v += sigma * rng.gaussian();
    }
    batch.augmented.push_back(std::move(noisy));
  }
  return batch;
}

namespace {

std::size_t positive_index(std::size_t j, std::size_t b) {
  return j < b ? j + b : j - b;
}

// Loss and, when grads != nullptr, d(loss)/d(point) for all 2B points.
double loss_and_point_grads(std::span<const RingPoint> points, double tau,
                            std::vector<double>* grads) {
  const std::size_t n = points.size();
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("contrastive loss needs an even number (>= 2) of points");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("tau must be positive");
  }
  for (const auto& p : points) {
    if (std::abs(p.x * p.x + p.y * p.y - 1.0) > 1e-6) {
      throw std::invalid_argument("non-unit point in contrastive loss");
    }
  }
  const std::size_t b = n / 2;
  const double inv_n = 1.0 / static_cast<double>(n);

  if (grads != nullptr) {
    grads->assign(2 * n, 0.0);
  }

  std::vector<double> scaled(n);
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t pos = positive_index(j, b);
    double max_scaled = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) {
        continue;
      }
      scaled[k] = (points[j].x * points[k].x + points[j].y * points[k].y) / tau;
      max_scaled = std::max(max_scaled, scaled[k]);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) {
        continue;
      }
      denom += std::exp(scaled[k] - max_scaled);
    }
    total += -(scaled[pos] - max_scaled) + std::log(denom);

    if (grads != nullptr) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) {
          continue;
        }
        weights[k] = std::exp(scaled[k] - max_scaled) / denom;
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) {
          continue;
        }
        const double g = (weights[k] - (k == pos ? 1.0 : 0.0)) * inv_n / tau;
        (*grads)[2 * j] += g * points[k].x;
        (*grads)[2 * j + 1] += g * points[k].y;
        (*grads)[2 * k] += g * points[j].x;
        (*grads)[2 * k + 1] += g * points[j].y;
      }
    }
  }
  return total * inv_n;
}

GradientRecord zero_like(const NERingModel& model) {
  GradientRecord grads;
  for (const auto& layer : model.layers()) {
    DenseLayer g;
    g.in = layer.in;
    g.out = layer.out;
    g.w.assign(layer.w.size(), 0.0);
    g.b.assign(layer.b.size(), 0.0);
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace

double contrastive_loss(std::span<const RingPoint> points, double tau) {
  return loss_and_point_grads(points, tau, nullptr);
}

GradientRecord loss_gradient(const NERingModel& model, const ContrastiveBatch& batch,
                             double tau, double* loss_out) {
  if (batch.anchors.size() != batch.augmented.size() || batch.anchors.empty()) {
    throw std::invalid_argument("batch anchors/augmented size mismatch");
  }
  const std::size_t n = 2 * batch.anchors.size();

  std::vector<ForwardTrace> traces(n);
  std::vector<RingPoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PooledEmbedding& e =
        i < batch.anchors.size() ? batch.anchors[i] : batch.augmented[i - batch.anchors.size()];
    points[i] = model.forward_standardized(e.values, &traces[i]);
  }

  std::vector<double> point_grads;
  const double loss = loss_and_point_grads(points, tau, &point_grads);
  if (loss_out != nullptr) {
    *loss_out = loss;
  }

  GradientRecord grads = zero_like(model);
  const auto& layers = model.layers();
  const int h1_dim = layers[0].out;
  const int h2_dim = layers[1].out;

  std::vector<double> delta2(static_cast<std::size_t>(h2_dim));
  std::vector<double> delta1(static_cast<std::size_t>(h1_dim));
  for (std::size_t i = 0; i < n; ++i) {
    const ForwardTrace& tr = traces[i];
    const RingPoint& p = points[i];

    // Through p = u / |u|: dL/du = (I - p p^T) dL/dp / |u|.
    const double gx = point_grads[2 * i];
    const double gy = point_grads[2 * i + 1];
    const double radial = p.x * gx + p.y * gy;
    const double du0 = (gx - radial * p.x) / tr.raw_norm;
    const double du1 = (gy - radial * p.y) / tr.raw_norm;

    // Output layer (linear).
    for (int c = 0; c < h2_dim; ++c) {
      grads[2].w[static_cast<std::size_t>(c)] += du0 * tr.h2[static_cast<std::size_t>(c)];
      grads[2].w[static_cast<std::size_t>(h2_dim + c)] +=
          du1 * tr.h2[static_cast<std::size_t>(c)];
    }
    grads[2].b[0] += du0;
    grads[2].b[1] += du1;

    // Second hidden layer (tanh).
    for (int c = 0; c < h2_dim; ++c) {
      const double h = tr.h2[static_cast<std::size_t>(c)];
      const double back = layers[2].w[static_cast<std::size_t>(c)] * du0 +
                          layers[2].w[static_cast<std::size_t>(h2_dim + c)] * du1;
      delta2[static_cast<std::size_t>(c)] = back * (1.0 - h * h);
    }
    for (int r = 0; r < h2_dim; ++r) {
      const double d = delta2[static_cast<std::size_t>(r)];
      double* grow = grads[1].w.data() + static_cast<std::size_t>(r) * h1_dim;
      for (int c = 0; c < h1_dim; ++c) {
        grow[c] += d * tr.h1[static_cast<std::size_t>(c)];
      }
      grads[1].b[static_cast<std::size_t>(r)] += d;
    }

    // First hidden layer (tanh).
    for (int c = 0; c < h1_dim; ++c) {
      double back = 0.0;
      for (int r = 0; r < h2_dim; ++r) {
        back += layers[1].w[static_cast<std::size_t>(r) * h1_dim + c] *
                delta2[static_cast<std::size_t>(r)];
      }
      const double h = tr.h1[static_cast<std::size_t>(c)];
      delta1[static_cast<std::size_t>(c)] = back * (1.0 - h * h);
    }
    const int in_dim = layers[0].in;
    for (int r = 0; r < h1_dim; ++r) {
      const double d = delta1[static_cast<std::size_t>(r)];
      double* grow = grads[0].w.data() + static_cast<std::size_t>(r) * in_dim;
      for (int c = 0; c < in_dim; ++c) {
        grow[c] += d * tr.input[static_cast<std::size_t>(c)];
      }
      grads[0].b[static_cast<std::size_t>(r)] += d;
    }
  }
  return grads;
}

TrainResult train(std::span<const TokenSequence> corpus, const EmbeddingProvider& embed,
                  const NERingModel& init_model, const TrainingConfig& cfg,
                  const WatermarkConfig& wcfg) {
  cfg.validate();
  if (embed.embedding_dim() != init_model.input_dim()) {
    throw std::invalid_argument("embedding dim does not match model input dim");
  }
  if (cfg.steps == 0) {
    return {init_model, {}};
  }

  const int m = wcfg.m;
  const std::size_t d = static_cast<std::size_t>(init_model.input_dim());

  // Pool every full m-token window once.
  std::vector<std::vector<double>> windows;
  std::vector<std::uint32_t> window_seq;
  std::vector<std::vector<std::size_t>> seq_windows(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (int pos = m; pos <= corpus[s].length(); ++pos) {
      seq_windows[s].push_back(windows.size());
      window_seq.push_back(static_cast<std::uint32_t>(s));
      windows.push_back(pool_context(corpus[s].tokens, pos, m, embed).values);
    }
  }
  if (windows.size() < static_cast<std::size_t>(cfg.batch_size)) {
    throw std::invalid_argument("training corpus too small: " +
                                std::to_string(windows.size()) + " windows, need >= " +
                                std::to_string(cfg.batch_size));
  }

  // Per-coordinate standardization; scale carries the sqrt(d) factor so the
  // standardized vectors have unit mean squared norm and sigma is relative
  // to the whole-vector scale.
  std::vector<double> mean(d, 0.0);
  for (const auto& w : windows) {
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] += w[c];
    }
  }
  for (auto& v : mean) {
    v /= static_cast<double>(windows.size());
  }
  std::vector<double> scale(d, 0.0);
  for (const auto& w : windows) {
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = w[c] - mean[c];
      scale[c] += diff * diff;
    }
  }
  for (auto& v : scale) {
    v = std::max(std::sqrt(v / static_cast<double>(windows.size()) * static_cast<double>(d)),
                 1e-8);
  }
  for (auto& w : windows) {
    for (std::size_t c = 0; c < d; ++c) {
      w[c] = (w[c] - mean[c]) / scale[c];
    }
  }

  NERingModel model = init_model;
  model.set_standardization(mean, scale);

  Rng64 rng(cfg.rng_seed);
  GradientRecord velocity = zero_like(model);
  std::vector<double> loss_log;
  loss_log.reserve(static_cast<std::size_t>(cfg.steps));

  const auto b = static_cast<std::size_t>(cfg.batch_size);
  const bool stratify = cfg.stratify_by_sequence && corpus.size() >= b;
  std::vector<std::size_t> seq_order(corpus.size());
  std::iota(seq_order.begin(), seq_order.end(), std::size_t{0});
  std::unordered_set<std::size_t> picked;
  std::vector<PooledEmbedding> anchors(b);

  for (int step = 0; step < cfg.steps; ++step) {
    std::size_t filled = 0;
    if (stratify) {
      // partial Fisher-Yates over sequences, then one window from each
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(seq_order.size() - i));
        std::swap(seq_order[i], seq_order[j]);
        const auto& pool = seq_windows[seq_order[i]];
        const std::size_t idx = pool[static_cast<std::size_t>(rng.bounded(pool.size()))];
        anchors[filled].values = windows[idx];
        anchors[filled].window_length = m;
        ++filled;
      }
    }
    picked.clear();
    while (filled < b) {
      const auto idx = static_cast<std::size_t>(rng.bounded(windows.size()));
      if (picked.insert(idx).second) {
        anchors[filled].values = windows[idx];
        anchors[filled].window_length = m;
        ++filled;
      }
    }

    const ContrastiveBatch batch = soft_augment(anchors, cfg.sigma, rng);
    double loss = 0.0;
    const GradientRecord grads = loss_gradient(model, batch, cfg.tau, &loss);
    loss_log.push_back(loss);

    double lr = cfg.learning_rate;
    if (cfg.lr_schedule == LrSchedule::LinearDecay) {
      lr *= 1.0 - static_cast<double>(step) / static_cast<double>(cfg.steps);
    }
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (std::size_t i = 0; i < layers[l].w.size(); ++i) {
        velocity[l].w[i] = cfg.momentum * velocity[l].w[i] - lr * grads[l].w[i];
        layers[l].w[i] += velocity[l].w[i];
      }
      for (std::size_t i = 0; i < layers[l].b.size(); ++i) {
        velocity[l].b[i] = cfg.momentum * velocity[l].b[i] - lr * grads[l].b[i];
        layers[l].b[i] += velocity[l].b[i];
      }
    }
  }

  return {std::move(model), std::move(loss_log)};
}

void write_loss_csv(const std::string& path, std::span<const double> losses) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open loss log for writing: " + path);
  }
  out << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out << i << ',' << format_double(losses[i]) << '\n';
  }
}

}  // namespace semamark

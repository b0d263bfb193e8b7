#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "semamark/nering.hpp"
#include "semamark/rng.hpp"
#include "semamark/training.hpp"

// Shared oracles for the test binaries. Everything here is independent of
// the implementation paths it checks: the finite-difference gradient goes
// through loss-by-value only, never through loss_gradient.

namespace semamark::testing {

inline double loss_by_value(const NERingModel& model, const ContrastiveBatch& batch,
                            double tau) {
  std::vector<RingPoint> points;
  points.reserve(2 * batch.anchors.size());
  for (const auto& e : batch.anchors) {
    points.push_back(model.forward_standardized(e.values));
  }
  for (const auto& e : batch.augmented) {
    points.push_back(model.forward_standardized(e.values));
  }
  return contrastive_loss(points, tau);
}

struct FlatParam {
  std::size_t layer;
  bool is_bias;
  std::size_t index;
};

inline std::vector<FlatParam> all_params(const NERingModel& model) {
  std::vector<FlatParam> params;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    for (std::size_t i = 0; i < model.layers()[l].w.size(); ++i) {
      params.push_back({l, false, i});
    }
    for (std::size_t i = 0; i < model.layers()[l].b.size(); ++i) {
      params.push_back({l, true, i});
    }
  }
  return params;
}

inline double& param_ref(NERingModel& model, const FlatParam& p) {
  return p.is_bias ? model.layers()[p.layer].b[p.index] : model.layers()[p.layer].w[p.index];
}

inline double grad_entry(const GradientRecord& grads, const FlatParam& p) {
  return p.is_bias ? grads[p.layer].b[p.index] : grads[p.layer].w[p.index];
}

// Central finite difference of the loss along one parameter.
inline double fd_gradient(const NERingModel& model, const ContrastiveBatch& batch, double tau,
                          const FlatParam& p, double h = 1e-5) {
  NERingModel bumped = model;
  param_ref(bumped, p) += h;
  const double up = loss_by_value(bumped, batch, tau);
  param_ref(bumped, p) -= 2.0 * h;
  const double down = loss_by_value(bumped, batch, tau);
  return (up - down) / (2.0 * h);
}

// Relative disagreement, with an absolute floor for near-zero gradients.
inline double gradient_error(double analytic, double fd) {
  const double mag = std::max(std::abs(analytic), std::abs(fd));
  if (mag < 1e-7) {
    return std::abs(analytic - fd) < 1e-9 ? 0.0 : 1.0;
  }
  return std::abs(analytic - fd) / mag;
}

inline ContrastiveBatch random_batch(int b, int d, double spread, Rng64& rng) {
  std::vector<PooledEmbedding> anchors(static_cast<std::size_t>(b));
  for (auto& a : anchors) {
    a.window_length = 1;
    a.values.resize(static_cast<std::size_t>(d));
    for (auto& v : a.values) {
      v = spread * rng.gaussian();
    }
  }
  return soft_augment(anchors, 0.1, rng);
}

}  // namespace semamark::testing

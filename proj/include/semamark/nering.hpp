#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semamark/embedding.hpp"

namespace semamark {

// Point on the unit circle with its polar angle in [0, 2*pi).
struct RingPoint {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out
};

// Intermediate activations of one forward pass, kept for backprop.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<double> h1;  // tanh outputs, first hidden layer
  std::vector<double> h2;  // tanh outputs, second hidden layer
  std::array<double, 2> raw{};
  double raw_norm = 0.0;
};

// Projection head mapping pooled embeddings onto the ring: two tanh hidden
// layers and a linear 2-unit output, followed by unit normalization.
// Immutable in normal use; the trainer mutates parameters through params().
class NERingModel {
 public:
  NERingModel() = default;

  // Deterministic init: weights uniform in +-1/sqrt(fan_in) drawn from
  // rng_seed in layer order (row-major), biases zero.
  static NERingModel init(int input_dim, std::uint64_t rng_seed,
                          int hidden1 = 128, int hidden2 = 64);

  int input_dim() const { return input_dim_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  bool has_standardization() const { return !std_mean_.empty(); }
  const std::vector<double>& std_mean() const { return std_mean_; }
  const std::vector<double>& std_scale() const { return std_scale_; }
  void set_standardization(std::vector<double> mean, std::vector<double> scale);

  // (e - mean) / scale, identity when no stats are stored.
  std::vector<double> standardize(std::span<const double> e) const;

  // Full inference path: standardize, MLP, normalize.
  RingPoint forward(const PooledEmbedding& e) const;

  // MLP on an already-standardized input; used by the trainer.
  RingPoint forward_standardized(std::span<const double> x,
                                 ForwardTrace* trace = nullptr) const;

  void save(const std::string& path) const;
  static NERingModel load(const std::string& path);

  bool operator==(const NERingModel& other) const;

 private:
  int input_dim_ = 0;
  std::uint64_t rng_seed_ = 0;
  std::vector<DenseLayer> layers_;
  std::vector<double> std_mean_;
  std::vector<double> std_scale_;
};

// Equal-arc discretization: floor(phi * K / (2*pi)), clamped to K-1 against
// floating-point spill just below 2*pi. phi must already lie in [0, 2*pi).
int discretize(double phi, int K);

}  // namespace semamark

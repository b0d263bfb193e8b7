#include "semamark/nering.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "semamark/rng.hpp"

namespace semamark {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kModelFormatVersion = 1;

DenseLayer init_layer(int in, int out, Rng64& rng) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  layer.w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
  layer.b.assign(static_cast<std::size_t>(out), 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& v : layer.w) {
    v = (2.0 * rng.uniform01() - 1.0) * bound;
  }
  return layer;
}

void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(layer.out), 0.0);
  for (int r = 0; r < layer.out; ++r) {
    const double* row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
    double acc = layer.b[static_cast<std::size_t>(r)];
    for (int c = 0; c < layer.in; ++c) {
      acc += row[c] * x[static_cast<std::size_t>(c)];
    }
    out[static_cast<std::size_t>(r)] = acc;
  }
}

}  // namespace

NERingModel NERingModel::init(int input_dim, std::uint64_t rng_seed,
                              int hidden1, int hidden2) {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1) {
    throw std::invalid_argument("invalid NE-Ring model dimensions");
  }
  NERingModel model;
  model.input_dim_ = input_dim;
  model.rng_seed_ = rng_seed;
  Rng64 rng(rng_seed);
  model.layers_.push_back(init_layer(input_dim, hidden1, rng));
  model.layers_.push_back(init_layer(hidden1, hidden2, rng));
  model.layers_.push_back(init_layer(hidden2, 2, rng));
  return model;
}

void NERingModel::set_standardization(std::vector<double> mean, std::vector<double> scale) {
  if (mean.size() != static_cast<std::size_t>(input_dim_) ||
      scale.size() != static_cast<std::size_t>(input_dim_)) {
    throw std::invalid_argument("standardization stats dimension mismatch");
  }
  for (double s : scale) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("standardization scale must be positive and finite");
    }
  }
  std_mean_ = std::move(mean);
  std_scale_ = std::move(scale);
}

std::vector<double> NERingModel::standardize(std::span<const double> e) const {
  if (e.size() != static_cast<std::size_t>(input_dim_)) {
    throw std::invalid_argument("embedding dimension does not match model input");
  }
  std::vector<double> x(e.begin(), e.end());
  if (!std_mean_.empty()) {
    for (std::size_t c = 0; c < x.size(); ++c) {
      x[c] = (x[c] - std_mean_[c]) / std_scale_[c];
    }
  }
  return x;
}

RingPoint NERingModel::forward(const PooledEmbedding& e) const {
  return forward_standardized(standardize(e.values));
}

RingPoint NERingModel::forward_standardized(std::span<const double> x,
                                            ForwardTrace* trace) const {
  if (x.size() != static_cast<std::size_t>(input_dim_)) {
    throw std::invalid_argument("embedding dimension does not match model input");
  }
  std::vector<double> h1;
  affine(layers_[0], x, h1);
  for (auto& v : h1) {
    v = std::tanh(v);
  }
  std::vector<double> h2;
  affine(layers_[1], h1, h2);
  for (auto& v : h2) {
    v = std::tanh(v);
  }
  std::vector<double> raw;
  affine(layers_[2], h2, raw);

  const double norm = std::hypot(raw[0], raw[1]);
  if (!(norm >= 1e-9)) {
    throw std::runtime_error("degenerate projection");
  }
  RingPoint p;
  p.x = raw[0] / norm;
  p.y = raw[1] / norm;
  p.angle = std::atan2(p.y, p.x);
  if (p.angle < 0.0) {
    p.angle += kTwoPi;
  }
  if (p.angle >= kTwoPi) {
    p.angle = 0.0;  // rounding of atan2(-eps, 1) + 2*pi
  }
  if (trace != nullptr) {
    trace->input.assign(x.begin(), x.end());
    trace->h1 = std::move(h1);
    trace->h2 = std::move(h2);
    trace->raw = {raw[0], raw[1]};
    trace->raw_norm = norm;
  }
  return p;
}

void NERingModel::save(const std::string& path) const {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["input_dim"] = input_dim_;
  j["rng_seed"] = rng_seed_;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) {
    layers.push_back({{"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b}});
  }
  j["layers"] = layers;
  j["std_mean"] = std_mean_;
  j["std_scale"] = std_scale_;

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open model file for writing: " + path);
  }
  out << j.dump() << '\n';
  if (!out) {
    throw std::runtime_error("failed writing model file: " + path);
  }
}

NERingModel NERingModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file: " + path);
  }
  nlohmann::json j;
  in >> j;
  if (j.at("format_version").get<int>() != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format version in " + path);
  }
  NERingModel model;
  model.input_dim_ = j.at("input_dim").get<int>();
  model.rng_seed_ = j.at("rng_seed").get<std::uint64_t>();
  for (const auto& lj : j.at("layers")) {
    DenseLayer layer;
    layer.in = lj.at("in").get<int>();
    layer.out = lj.at("out").get<int>();
    layer.w = lj.at("w").get<std::vector<double>>();
    layer.b = lj.at("b").get<std::vector<double>>();
    if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<std::size_t>(layer.out)) {
      throw std::runtime_error("inconsistent layer dimensions in " + path);
    }
    model.layers_.push_back(std::move(layer));
  }
  if (model.layers_.size() != 3 || model.layers_[0].in != model.input_dim_ ||
      model.layers_.back().out != 2 ||
      model.layers_[0].out != model.layers_[1].in ||
      model.layers_[1].out != model.layers_[2].in) {
    throw std::runtime_error("inconsistent model architecture in " + path);
  }
  auto mean = j.at("std_mean").get<std::vector<double>>();
  auto scale = j.at("std_scale").get<std::vector<double>>();
  if (!mean.empty()) {
    model.set_standardization(std::move(mean), std::move(scale));
  }
  return model;
}

bool NERingModel::operator==(const NERingModel& other) const {
  if (input_dim_ != other.input_dim_ || rng_seed_ != other.rng_seed_ ||
      layers_.size() != other.layers_.size() || std_mean_ != other.std_mean_ ||
      std_scale_ != other.std_scale_) {
    return false;
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].in != other.layers_[i].in || layers_[i].out != other.layers_[i].out ||
        layers_[i].w != other.layers_[i].w || layers_[i].b != other.layers_[i].b) {
      return false;
    }
  }
  return true;
}

int discretize(double phi, int K) {
  if (K < 2) {
    throw std::invalid_argument("discretize requires K >= 2");
  }
  if (!(phi >= 0.0) || phi >= kTwoPi) {
    throw std::invalid_argument("angle outside [0, 2*pi)");
  }
  int section = static_cast<int>(std::floor(phi * static_cast<double>(K) / kTwoPi));
  if (section >= K) {
    section = K - 1;
  }
  return section;
}

}  // namespace semamark

#include "semamark/density.hpp"

#include "semamark/format.hpp"
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace semamark {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

DensityResult ring_density_from_angles(std::span<const double> angles, double bandwidth,
                                       int grid_size) {
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  if (grid_size < 8) {
    throw std::invalid_argument("grid too coarse");
  }
  if (angles.empty()) {
    throw std::invalid_argument("no angles to estimate");
  }

  // Enough wraps that the truncated tails are far below the 1e-6 integral
  // tolerance even for wide kernels.
  const int wraps = std::max(2, static_cast<int>(std::ceil(3.0 * bandwidth)));

  DensityResult result;
  result.grid_angles.resize(static_cast<std::size_t>(grid_size));
  result.density.assign(static_cast<std::size_t>(grid_size), 0.0);
  const double inv_2h2 = 1.0 / (2.0 * bandwidth * bandwidth);

  for (int g = 0; g < grid_size; ++g) {
    const double theta = kTwoPi * static_cast<double>(g) / static_cast<double>(grid_size);
    result.grid_angles[static_cast<std::size_t>(g)] = theta;
    double acc = 0.0;
    for (const double phi : angles) {
      for (int w = -wraps; w <= wraps; ++w) {
        const double diff = theta - phi + kTwoPi * static_cast<double>(w);
        acc += std::exp(-diff * diff * inv_2h2);
      }
    }
    result.density[static_cast<std::size_t>(g)] = acc;
  }

  // Periodic trapezoid normalization: integral = spacing * sum.
  const double spacing = kTwoPi / static_cast<double>(grid_size);
  double integral = 0.0;
  for (double v : result.density) {
    integral += v;
  }
  integral *= spacing;
  if (!(integral > 0.0)) {
    throw std::runtime_error("degenerate density estimate");
  }
  for (double& v : result.density) {
    v /= integral;
  }

  double lo = result.density[0];
  double hi = result.density[0];
  for (double v : result.density) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  result.uniformity_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  result.degenerate = !(result.uniformity_ratio <= 100.0);
  return result;
}

DensityResult ring_density(const NERingModel& model, std::span<const PooledEmbedding> windows,
                           double bandwidth) {
  if (windows.size() < 1000) {
    throw std::invalid_argument("ring density needs at least 1000 windows");
  }
  std::vector<double> angles;
  angles.reserve(windows.size());
  for (const auto& w : windows) {
    angles.push_back(model.forward(w).angle);
  }
  return ring_density_from_angles(angles, bandwidth);
}

void write_density_csv(const std::string& path, const DensityResult& density) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open density output: " + path);
  }
  out << "angle,density\n";
  for (std::size_t i = 0; i < density.density.size(); ++i) {
    out << format_double(density.grid_angles[i]) << ',' << format_double(density.density[i])
        << '\n';
  }
}

}  // namespace semamark

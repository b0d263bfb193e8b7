#pragma once

#include <span>
#include <string>
#include <vector>

#include "semamark/nering.hpp"

namespace semamark {

struct DensityResult {
  std::vector<double> grid_angles;  // 360 grid points over [0, 2*pi)
  std::vector<double> density;      // normalized to integrate to 1
  double uniformity_ratio = 0.0;    // max density / min density
  bool degenerate = false;          // ratio above 100 (point-mass-like input)
};

// Wrapped-Gaussian kernel density of angles on the circle.
DensityResult ring_density_from_angles(std::span<const double> angles, double bandwidth,
                                       int grid_size = 360);

// Projects pooled windows through the model first. Needs at least 1000
// windows for a meaningful uniformity estimate.
DensityResult ring_density(const NERingModel& model, std::span<const PooledEmbedding> windows,
                           double bandwidth);

void write_density_csv(const std::string& path, const DensityResult& density);

}  // namespace semamark

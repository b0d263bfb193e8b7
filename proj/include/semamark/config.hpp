#pragma once

#include <cstdint>
#include <string>

#include "semamark/partition.hpp"

namespace semamark {

// Full watermark pipeline parameters. Defaults follow the production
// regime: quarter-vocabulary green lists at generation, gamma recalibrated
// to 1/3 inside the z-statistic, delta = 2, 15-token pooling windows,
// 5 ring sections and offset search up to +-15.
struct WatermarkConfig {
  double gamma_gen = 0.25;
  double gamma_detect = 1.0 / 3.0;
  double delta = 2.0;
  int m = 15;
  int K = 5;
  int Q = 15;
  double sigma = 0.05;
  double tau = 0.7;
  SecretKey key = SecretKey::from_string("semamark-default-insecure-key");

  void validate() const;
};

// Stable 64-bit digest of every parameter above (key enters via its
// fingerprint only). Stamped into generated artifacts for provenance.
std::uint64_t config_hash(const WatermarkConfig& cfg);
std::string config_hash_hex(const WatermarkConfig& cfg);

}  // namespace semamark
